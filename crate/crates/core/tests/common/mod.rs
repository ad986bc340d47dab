//! Independent oracles shared by the integration tests. Nothing here calls
//! into the closure engine, the commutant solver or the torus search.

#![allow(dead_code)]

use std::collections::VecDeque;

use larckit::nalgebra::DMatrix;
use larckit::num_complex::Complex64;
use larckit::ComplexMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Square matrix with Gaussian-integer entries `(re, im)`.
pub type GaussMatrix = Vec<Vec<(i64, i64)>>;

/// Random Hermitian Gaussian-integer matrix with entries in `[-r, r]`. Each
/// off-diagonal pair is zero with probability `sparsity`.
pub fn random_gauss_hermitian(rng: &mut ChaCha8Rng, n: usize, r: i64, sparsity: f64) -> GaussMatrix {
    let mut m = vec![vec![(0i64, 0i64); n]; n];
    for i in 0..n {
        m[i][i] = (rng.random_range(-r..=r), 0);
        for j in i + 1..n {
            if rng.random::<f64>() < sparsity {
                continue;
            }
            let z = (rng.random_range(-r..=r), rng.random_range(-r..=r));
            m[i][j] = z;
            m[j][i] = (z.0, -z.1);
        }
    }
    m
}

pub fn gauss_to_matrix(m: &GaussMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.len(), |i, j| Complex64::new(m[i][j].0 as f64, m[i][j].1 as f64))
}

fn gauss_mul(a: &GaussMatrix, b: &GaussMatrix) -> GaussMatrix {
    let n = a.len();
    let mut c = vec![vec![(0i64, 0i64); n]; n];
    for i in 0..n {
        for k in 0..n {
            let (ar, ai) = a[i][k];
            if ar == 0 && ai == 0 {
                continue;
            }
            for j in 0..n {
                let (br, bi) = b[k][j];
                c[i][j].0 += ar * br - ai * bi;
                c[i][j].1 += ar * bi + ai * br;
            }
        }
    }
    c
}

fn gauss_sub(a: &GaussMatrix, b: &GaussMatrix) -> GaussMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x.0 - y.0, x.1 - y.1)).collect())
        .collect()
}

fn gauss_bracket(a: &GaussMatrix, b: &GaussMatrix) -> GaussMatrix {
    gauss_sub(&gauss_mul(a, b), &gauss_mul(b, a))
}

/// `i H`.
pub fn gauss_times_i(m: &GaussMatrix) -> GaussMatrix {
    m.iter().map(|r| r.iter().map(|&(re, im)| (-im, re)).collect()).collect()
}

fn gauss_identity(n: usize) -> GaussMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { (1, 0) } else { (0, 0) }).collect()).collect()
}

fn real_vector(m: &GaussMatrix) -> Vec<i64> {
    m.iter().flat_map(|r| r.iter().flat_map(|&(re, im)| [re, im])).collect()
}

/// Row-echelon accumulator over the rationals.
#[derive(Default)]
pub struct ExactSpan {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl ExactSpan {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: &[i64]) -> bool {
        let mut v: Vec<BigRational> = v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(p) => {
                let inv = BigRational::one() / v[p].clone();
                for x in v.iter_mut() {
                    *x *= &inv;
                }
                for (_, row) in self.rows.iter_mut() {
                    if !row[p].is_zero() {
                        let f = row[p].clone();
                        for (x, y) in row.iter_mut().zip(&v) {
                            *x -= &f * y;
                        }
                    }
                }
                self.rows.push((p, v));
                true
            }
        }
    }
}

/// Real dimension of the Lie algebra generated by `i H_k`, from right-nested
/// brackets of length at most `max_len`, in exact arithmetic. The second
/// value is false when the last level still added new directions.
pub fn word_closure_dim(hermitian: &[GaussMatrix], max_len: usize) -> (usize, bool) {
    let gens: Vec<GaussMatrix> = hermitian.iter().map(gauss_times_i).collect();
    let mut span = ExactSpan::default();
    let mut level: Vec<GaussMatrix> = Vec::new();
    for g in &gens {
        if span.insert(&real_vector(g)) {
            level.push(g.clone());
        }
    }
    let mut saturated = level.is_empty();
    for _ in 1..max_len {
        let mut next = Vec::new();
        for g in &gens {
            for w in &level {
                let b = gauss_bracket(g, w);
                if span.insert(&real_vector(&b)) {
                    next.push(b);
                }
            }
        }
        saturated = next.is_empty();
        level = next;
        if saturated {
            break;
        }
    }
    (span.rank(), saturated)
}

/// Complex dimension of the unital associative algebra generated by
/// Hermitian `H_k`, from words of length up to `max_len`.
pub fn associative_algebra_dim(hermitian: &[GaussMatrix], max_len: usize) -> usize {
    let n = hermitian[0].len();
    let mut span = ExactSpan::default();
    let insert = |m: &GaussMatrix, span: &mut ExactSpan| {
        let a = span.insert(&real_vector(m));
        let b = span.insert(&real_vector(&gauss_times_i(m)));
        a || b
    };
    let id = gauss_identity(n);
    insert(&id, &mut span);
    let mut level = vec![id];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &level {
            for g in hermitian {
                let p = gauss_mul(w, g);
                if insert(&p, &mut span) {
                    next.push(p);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    span.rank() / 2
}

/// Connected components by breadth-first search on the pattern of nonzero
/// off-diagonal entries.
pub fn bfs_components(adjacent: &dyn Fn(usize, usize) -> bool, n: usize) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if !seen[w] && w != v && adjacent(v, w) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

/// `max_k dist(t x_k - lambda_k, Z)`.
pub fn torus_residual(xhat: &[f64], lambda: &[f64], t: f64) -> f64 {
    xhat.iter()
        .zip(lambda)
        .map(|(x, l)| {
            let p = t * x - l;
            (p - p.round()).abs()
        })
        .fold(0.0, f64::max)
}

/// First feasible run of the grid `t = k step`, `0 <= t <= horizon`:
/// `(start, end, best residual, t of best)`.
pub struct GridComponent {
    pub start: f64,
    pub end: f64,
    pub best: f64,
    pub best_t: f64,
}

pub fn grid_first_component(xhat: &[f64], lambda: &[f64], delta: f64, step: f64, horizon: f64) -> Option<GridComponent> {
    let steps = (horizon / step).floor() as u64;
    let mut found: Option<GridComponent> = None;
    for k in 0..=steps {
        let t = k as f64 * step;
        let r = torus_residual(xhat, lambda, t);
        match found.as_mut() {
            None if r < delta => {
                found = Some(GridComponent {
                    start: t,
                    end: t,
                    best: r,
                    best_t: t,
                })
            }
            None => {}
            Some(c) if r < delta => {
                c.end = t;
                if r < c.best {
                    c.best = r;
                    c.best_t = t;
                }
            }
            Some(_) => break,
        }
    }
    found
}

/// `sum_k c_k x_k` evaluated exactly on the binary values of `x`.
pub fn exact_relation_value(c: &[i64], x: &[f64]) -> BigRational {
    c.iter()
        .zip(x)
        .map(|(&ck, &xk)| {
            BigRational::from_float(xk).expect("finite") * BigRational::from_integer(BigInt::from(ck))
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

pub fn rational_abs_below(q: &BigRational, bound: f64) -> bool {
    q.abs() < BigRational::from_float(bound).expect("finite")
}

pub fn gaussian_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut a = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    ComplexMatrix::from_dmatrix(a).expect("square")
}

/// Haar-ish random unitary from the QR factors of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let q = a.qr().q();
    ComplexMatrix::from_dmatrix(q).expect("square")
}

/// `exp(i t diag(x)) v`, entrywise.
pub fn diagonal_flow(x: &[f64], t: f64, v: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(v).map(|(xk, vk)| Complex64::from_polar(1.0, t * xk) * vk).collect()
}
