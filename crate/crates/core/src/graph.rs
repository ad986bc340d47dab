//! Coupling graph of the control Hamiltonians in the drift eigenbasis.
//!
//! Vertices are the drift eigenspaces; `v -- w` is an edge when some control
//! has a matrix element between them above `edge_tol`. For a degenerate
//! drift the vertices are whole eigenspaces and the witness is the largest
//! cross-block element.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::linop::ControlSystem;

/// Relative edge threshold, scaled by the largest control norm.
pub const DEFAULT_RELATIVE_EDGE_TOL: f64 = 1e-12;

/// Elements within this factor above `edge_tol` are reported as near-threshold.
const NEAR_THRESHOLD_FACTOR: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    /// Smaller vertex index (0-based).
    pub v: usize,
    pub w: usize,
    /// Control index (0-based, `H_{control + 1}`).
    pub control: usize,
    /// `<phi_v, H_l phi_w>`.
    pub alpha_re: f64,
    pub alpha_im: f64,
}

impl Edge {
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingGraph {
    pub num_vertices: usize,
    pub edges: Vec<Edge>,
    pub edge_tol: f64,
    /// Edges whose witness is within a factor 1e3 of `edge_tol`.
    pub near_threshold: Vec<Edge>,
    /// Vertices are eigenspaces of dimension > 1 for some vertex.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Connectivity {
    pub connected: bool,
    /// Components sorted by least vertex, vertices ascending.
    pub components: Vec<Vec<usize>>,
}

/// `max_l ||H_l||` scaled by [`DEFAULT_RELATIVE_EDGE_TOL`].
pub fn default_edge_tol(system: &ControlSystem) -> f64 {
    let scale = system.controls().iter().map(|h| h.op_norm()).fold(0.0, f64::max);
    (DEFAULT_RELATIVE_EDGE_TOL * scale).max(f64::MIN_POSITIVE)
}

/// Scans every control matrix element between distinct eigenspaces.
pub fn build_graph(system: &ControlSystem, edge_tol: f64) -> CouplingGraph {
    let spectrum = system.drift();
    let m = spectrum.len();
    let mut edges = Vec::new();
    let mut near = Vec::new();
    for v in 0..m {
        let qv = spectrum.eigenspace(v).expect("vertex in range");
        for w in v + 1..m {
            let qw = spectrum.eigenspace(w).expect("vertex in range");
            let mut witness: Option<(usize, Complex64)> = None;
            for (l, h) in system.controls().iter().enumerate() {
                let block = qv.adjoint() * h.as_dmatrix() * qw;
                let alpha = block
                    .iter()
                    .copied()
                    .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                    .unwrap_or_default();
                if alpha.norm() > edge_tol && witness.is_none_or(|(_, a)| alpha.norm() > a.norm()) {
                    witness = Some((l, alpha));
                }
            }
            if let Some((control, alpha)) = witness {
                let e = Edge {
                    v,
                    w,
                    control,
                    alpha_re: alpha.re,
                    alpha_im: alpha.im,
                };
                if alpha.norm() < NEAR_THRESHOLD_FACTOR * edge_tol {
                    near.push(e.clone());
                }
                edges.push(e);
            }
        }
    }
    CouplingGraph {
        num_vertices: m,
        edges,
        edge_tol,
        near_threshold: near,
        degenerate: !spectrum.is_non_degenerate(),
    }
}

impl CouplingGraph {
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (v, w) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().any(|e| e.v == v && e.w == w)
    }

    /// The recorded edge between `a` and `b`, if any.
    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        let (v, w) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().find(|e| e.v == v && e.w == w)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for e in &self.edges {
            adj[e.v].push(e.w);
            adj[e.w].push(e.v);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Shortest path from `from` to `to` (inclusive), by breadth-first search.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        if from >= self.num_vertices || to >= self.num_vertices {
            return None;
        }
        let adj = self.adjacency();
        let mut prev = vec![usize::MAX; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &x in &adj[u] {
                if !seen[x] {
                    seen[x] = true;
                    prev[x] = u;
                    queue.push_back(x);
                }
            }
        }
        None
    }

    /// One `v w l re(alpha) im(alpha)` line per edge, 1-based indices.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {} {:.17e} {:.17e}",
                e.v + 1,
                e.w + 1,
                e.control + 1,
                e.alpha_re,
                e.alpha_im
            );
        }
        out
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

pub fn is_connected(graph: &CouplingGraph) -> Connectivity {
    let n = graph.num_vertices;
    let mut uf = UnionFind::new(n);
    for e in &graph.edges {
        uf.union(e.v, e.w);
    }
    let mut by_root: Vec<Option<usize>> = vec![None; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    // vertices visited in ascending order, so components come out sorted by least vertex
    for v in 0..n {
        let r = uf.find(v);
        match by_root[r] {
            Some(c) => components[c].push(v),
            None => {
                by_root[r] = Some(components.len());
                components.push(vec![v]);
            }
        }
    }
    Connectivity {
        connected: components.len() <= 1,
        components,
    }
}
