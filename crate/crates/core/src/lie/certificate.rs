//! Bracket certificates: every matrix unit `|phi_v><phi_w|` of the drift
//! eigenbasis written as an explicit (complex) combination of nested brackets
//! of the eigenprojections `F_k` and the controls `H_l`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_graph, default_edge_tol, is_connected, Connectivity, CouplingGraph};
use crate::linop::{commutator_unchecked, ComplexMatrix, ControlSystem};
use crate::spectral::{check_rational_independence, IndependenceVerdict, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL};

/// Re-evaluated certificates must reproduce their target to this accuracy.
pub const CERTIFICATE_TOL: f64 = 1e-9;

const PROJECTION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorRef {
    /// `F_{k+1}`.
    Projection(usize),
    /// `H_{l+1}`.
    Control(usize),
}

impl fmt::Display for GeneratorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorRef::Projection(k) => write!(f, "F{}", k + 1),
            GeneratorRef::Control(l) => write!(f, "H{}", l + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Gen(GeneratorRef),
    Bracket(Box<Expr>, Box<Expr>),
    Combination(Vec<(Complex64, Expr)>),
}

impl Expr {
    fn bracket(a: Expr, b: Expr) -> Expr {
        Expr::Bracket(Box::new(a), Box::new(b))
    }

    /// Evaluates with the given projections and controls; nothing else is used.
    pub fn evaluate(&self, projections: &[ComplexMatrix], controls: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        match self {
            Expr::Gen(GeneratorRef::Projection(k)) => projections.get(*k).cloned().ok_or(Error::IndexOutOfRange {
                index: *k,
                len: projections.len(),
            }),
            Expr::Gen(GeneratorRef::Control(l)) => controls.get(*l).cloned().ok_or(Error::IndexOutOfRange {
                index: *l,
                len: controls.len(),
            }),
            Expr::Bracket(a, b) => {
                let a = a.evaluate(projections, controls)?;
                let b = b.evaluate(projections, controls)?;
                crate::linop::commutator(&a, &b)
            }
            Expr::Combination(terms) => {
                let mut acc: Option<ComplexMatrix> = None;
                for (c, e) in terms {
                    let m = e.evaluate(projections, controls)?.scale(*c);
                    acc = Some(match acc {
                        None => m,
                        Some(a) => {
                            a.check_same_dim(&m)?;
                            a + m
                        }
                    });
                }
                acc.ok_or(Error::EmptyInput)
            }
        }
    }

    /// Nesting depth of brackets.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Gen(_) => 0,
            Expr::Bracket(a, b) => 1 + a.depth().max(b.depth()),
            Expr::Combination(terms) => terms.iter().map(|(_, e)| e.depth()).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Gen(g) => write!(f, "{g}"),
            Expr::Bracket(a, b) => write!(f, "[{a},{b}]"),
            Expr::Combination(terms) => {
                write!(f, "(")?;
                for (i, (c, e)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "({:.16e}{:+.16e}i)*{e}", c.re, c.im)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// `[F_w,[H,F_v]]` and `[F_v,[F_w,[H,F_v]]]`.
#[derive(Clone, Debug)]
pub struct DoubleBracket {
    /// `alpha |v><w| + conj(alpha) |w><v|`.
    pub sym: ComplexMatrix,
    /// `alpha |v><w| - conj(alpha) |w><v|`.
    pub antisym: ComplexMatrix,
    /// `|alpha|`.
    pub coupling: f64,
}

fn is_rank_one_projection(f: &ComplexMatrix) -> bool {
    f.is_hermitian(PROJECTION_TOL)
        && (f * f).max_abs_diff(f) < PROJECTION_TOL
        && (f.trace() - Complex64::new(1.0, 0.0)).norm() < PROJECTION_TOL
}

pub fn double_bracket(f_v: &ComplexMatrix, h: &ComplexMatrix, f_w: &ComplexMatrix) -> Result<DoubleBracket> {
    f_v.check_same_dim(h)?;
    f_v.check_same_dim(f_w)?;
    if !is_rank_one_projection(f_v) || !is_rank_one_projection(f_w) || (f_v * f_w).max_abs() > PROJECTION_TOL {
        return Err(Error::InvalidProjections);
    }
    let sym = commutator_unchecked(f_w, &commutator_unchecked(h, f_v));
    let antisym = commutator_unchecked(f_v, &sym);
    let coupling = (&(f_v * h) * f_w).hs_norm();
    Ok(DoubleBracket { sym, antisym, coupling })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thm2Options {
    pub coeff_bound: u32,
    pub independence_tol: f64,
    /// `None` means [`default_edge_tol`].
    pub edge_tol: Option<f64>,
}

impl Default for Thm2Options {
    fn default() -> Self {
        Self {
            coeff_bound: DEFAULT_COEFF_BOUND,
            independence_tol: DEFAULT_INDEPENDENCE_TOL,
            edge_tol: None,
        }
    }
}

/// Checklist of the hypotheses of the constructive controllability theorem.
#[derive(Clone, Debug, Serialize)]
pub struct Thm2Hypotheses {
    pub non_degenerate: bool,
    pub independence: IndependenceVerdict,
    pub graph: CouplingGraph,
    pub connectivity: Connectivity,
}

impl Thm2Hypotheses {
    pub fn hold(&self) -> bool {
        self.non_degenerate && self.independence.is_independent() && self.connectivity.connected
    }

    /// Human-readable list of the failed hypotheses.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.non_degenerate {
            out.push("drift spectrum is degenerate".to_string());
        }
        if !self.independence.is_independent() {
            out.push(format!("eigenvalues not certified independent ({:?})", self.independence.status));
        }
        if !self.connectivity.connected {
            out.push(format!(
                "coupling graph has {} components",
                self.connectivity.components.len()
            ));
        }
        out
    }
}

pub fn check_thm2_hypotheses(system: &ControlSystem, opts: &Thm2Options) -> Thm2Hypotheses {
    let independence = check_rational_independence(system.drift(), opts.coeff_bound, opts.independence_tol);
    let tol = opts.edge_tol.unwrap_or_else(|| default_edge_tol(system));
    let graph = build_graph(system, tol);
    let connectivity = is_connected(&graph);
    Thm2Hypotheses {
        non_degenerate: system.drift().is_non_degenerate(),
        independence,
        graph,
        connectivity,
    }
}

/// A bracket expression for `|phi_from><phi_to|`, verified by re-evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct BracketCertificate {
    /// 0-based eigenvector indices.
    pub from: usize,
    pub to: usize,
    pub path: Vec<usize>,
    pub depth: usize,
    pub word: String,
    /// Operator-norm distance between the evaluated word and the target.
    pub residual: f64,
    #[serde(skip)]
    pub expr: Expr,
}

/// `|a><b|` for an edge `a -- b` witnessed by control `l`.
fn edge_unit(a: usize, b: usize, l: usize, alpha: Complex64) -> Expr {
    let fa = Expr::Gen(GeneratorRef::Projection(a));
    let fb = Expr::Gen(GeneratorRef::Projection(b));
    let h = Expr::Gen(GeneratorRef::Control(l));
    let sym = Expr::bracket(fb, Expr::bracket(h, fa.clone()));
    let antisym = Expr::bracket(fa, sym.clone());
    let c = Complex64::new(0.5, 0.0) / alpha;
    Expr::Combination(vec![(c, sym), (c, antisym)])
}

/// Certificates for every ordered pair of drift eigenvectors. Fails with
/// `HypothesesNotMet` unless the drift is non-degenerate, its eigenvalues are
/// certified independent and the coupling graph is connected.
pub fn thm2_certificate(system: &ControlSystem, opts: &Thm2Options) -> Result<Vec<BracketCertificate>> {
    let hyp = check_thm2_hypotheses(system, opts);
    if !hyp.hold() {
        return Err(Error::HypothesesNotMet(hyp.failures().join("; ")));
    }
    let spectrum = system.drift();
    let m = spectrum.len();
    let phi: Vec<_> = (0..m).map(|k| spectrum.eigenvector(k)).collect::<Result<_>>()?;
    let projections = spectrum.projections();
    let controls = system.controls();
    let mut out = Vec::with_capacity(m * m);
    for v in 0..m {
        for w in 0..m {
            let (path, expr) = if v == w {
                (vec![v], Expr::Gen(GeneratorRef::Projection(v)))
            } else {
                let path = hyp.graph.shortest_path(v, w).ok_or(Error::PathNotFound { from: v, to: w })?;
                let mut units = Vec::with_capacity(path.len() - 1);
                for step in path.windows(2) {
                    let (a, b) = (step[0], step[1]);
                    let l = hyp.graph.edge(a, b).ok_or(Error::PathNotFound { from: a, to: b })?.control;
                    let alpha = phi[a].dotc(&controls[l].apply(&phi[b]));
                    units.push(edge_unit(a, b, l, alpha));
                }
                let mut expr = units.pop().expect("path has an edge");
                while let Some(u) = units.pop() {
                    expr = Expr::bracket(u, expr);
                }
                (path, expr)
            };
            let produced = expr.evaluate(projections, controls)?;
            let target = ComplexMatrix::outer(&phi[v], &phi[w]);
            let residual = (&produced - &target).op_norm();
            if !(residual < CERTIFICATE_TOL) {
                return Err(Error::VerificationFailed {
                    achieved: residual,
                    bound: CERTIFICATE_TOL,
                });
            }
            out.push(BracketCertificate {
                from: v,
                to: w,
                path,
                depth: expr.depth(),
                word: expr.to_string(),
                residual,
                expr,
            });
        }
    }
    Ok(out)
}

/// One `from to word` line per certificate, 1-based indices.
pub fn certificates_to_text(certs: &[BracketCertificate]) -> String {
    certs
        .iter()
        .map(|c| format!("{} {} {}\n", c.from + 1, c.to + 1, c.word))
        .collect()
}
