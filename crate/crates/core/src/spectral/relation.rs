//! Rational (in)dependence of eigenvalues.
//!
//! Floating-point eigenvalues cannot be certified rationally independent, so
//! numerical verdicts are relative to a coefficient bound `B` and tolerance
//! `tau`: "no integer vector with `|c_k| <= B` has `|sum c_k x_k| < tau`".
//! When every eigenvalue carries an exact tag the decision is exact linear
//! algebra over the rationals.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::exact::{abs_max, primitive_integer_vector, ratio_to_f64, Symbol};
use super::DriftSpectrum;

pub const DEFAULT_COEFF_BOUND: u32 = 20;
pub const DEFAULT_INDEPENDENCE_TOL: f64 = 1e-9;

/// Exhaustive search is used for at most this many eigenvalues.
const EXHAUSTIVE_MAX_LEN: usize = 4;
/// ... and at most this many enumerated prefixes.
const EXHAUSTIVE_MAX_PREFIXES: u64 = 200_000_000;

const PSLQ_MAX_ITER: usize = 100_000;
/// Integer matrix entries beyond this lose exactness in `f64`.
const PSLQ_MAX_ENTRY: f64 = 4.5e15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IndependenceStatus {
    Independent,
    Dependent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RelationMethod {
    /// Rational linear algebra over the declared symbols.
    Exact,
    /// Enumeration of all coefficient vectors with `|c_k| <= B`.
    Exhaustive,
    /// PSLQ integer-relation detection.
    Pslq,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceVerdict {
    pub status: IndependenceStatus,
    pub relation: Option<Vec<i64>>,
    pub coeff_bound: u32,
    pub tolerance: f64,
    pub method: RelationMethod,
    /// `|sum c_k x_k|` of the relation, evaluated exactly on the stored floats.
    pub residual: Option<f64>,
    pub note: Option<String>,
}

impl IndependenceVerdict {
    pub fn is_independent(&self) -> bool {
        self.status == IndependenceStatus::Independent
    }

    pub fn is_dependent(&self) -> bool {
        self.status == IndependenceStatus::Dependent
    }
}

/// Decides rational independence of the distinct eigenvalues of `spectrum`.
///
/// Exact tags take precedence when every eigenvalue has one and the declared
/// symbols together with 1 are known to be linearly independent over the
/// rationals (square roots of distinct square-free integers plus at most one
/// of `pi`, `e`). Otherwise up to four eigenvalues are enumerated
/// exhaustively and longer lists go through PSLQ.
pub fn check_rational_independence(spectrum: &DriftSpectrum, coeff_bound: u32, tol: f64) -> IndependenceVerdict {
    if let Some(tags) = spectrum.exact_values() {
        if let Some(v) = exact_decision(tags, spectrum.eigenvalues(), coeff_bound, tol) {
            return v;
        }
    }
    let x = spectrum.eigenvalues();
    let b = coeff_bound.max(1) as u64;
    let prefixes = (2 * b + 1).saturating_pow(x.len().saturating_sub(1) as u32);
    if x.len() <= EXHAUSTIVE_MAX_LEN && prefixes <= EXHAUSTIVE_MAX_PREFIXES {
        exhaustive_relation_search(x, coeff_bound, tol)
    } else {
        pslq_relation_search(x, coeff_bound, tol)
    }
}

fn exact_decision(
    tags: &[super::ExactValue],
    values: &[f64],
    coeff_bound: u32,
    tol: f64,
) -> Option<IndependenceVerdict> {
    let symbols: BTreeSet<Symbol> = tags.iter().flat_map(|t| t.symbols()).collect();
    if symbols.iter().filter(|s| s.is_transcendental()).count() > 1 {
        // pi and e together: their rational independence is not known.
        return None;
    }
    let n = tags.len();
    let mut rows: Vec<Vec<BigRational>> = vec![tags.iter().map(|t| t.rational.clone()).collect()];
    for s in &symbols {
        rows.push(tags.iter().map(|t| t.coefficient(*s)).collect());
    }
    let kernel = rational_kernel_vector(rows, n);
    let verdict = match kernel {
        None => IndependenceVerdict {
            status: IndependenceStatus::Independent,
            relation: None,
            coeff_bound,
            tolerance: tol,
            method: RelationMethod::Exact,
            residual: None,
            note: Some("exact over the declared symbol basis".into()),
        },
        Some(k) => {
            let c = primitive_integer_vector(&k)?;
            let residual = exact_residual(&c, values);
            let note = if abs_max(&c) > coeff_bound as i64 {
                Some("exact relation exceeds the coefficient bound".into())
            } else {
                Some("exact over the declared symbol basis".into())
            };
            IndependenceVerdict {
                status: IndependenceStatus::Dependent,
                relation: Some(c),
                coeff_bound,
                tolerance: tol,
                method: RelationMethod::Exact,
                residual: Some(residual),
                note,
            }
        }
    };
    Some(verdict)
}

/// A nonzero rational vector `v` with `rows * v = 0`, if the columns are dependent.
fn rational_kernel_vector(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Option<Vec<BigRational>> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..ncols {
                    let delta = &f * &rows[r][j];
                    rows[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); ncols];
    v[free] = BigRational::from_integer(1.into());
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -rows[row][free].clone();
    }
    Some(v)
}

/// `|sum c_k x_k|` evaluated exactly on the binary values of `x`.
pub(crate) fn exact_residual(c: &[i64], x: &[f64]) -> f64 {
    let mut acc = BigRational::zero();
    for (&ck, &xk) in c.iter().zip(x) {
        if ck == 0 {
            continue;
        }
        let Some(q) = BigRational::from_float(xk) else {
            return f64::NAN;
        };
        acc += q * BigRational::from_integer(BigInt::from(ck));
    }
    ratio_to_f64(&acc.abs())
}

/// Half-width of the band around `tol` in which float inputs cannot decide
/// whether `|sum c_k x_k| < tol`: a few ulps of uncertainty per eigenvalue.
fn ambiguity(c: &[i64], x: &[f64]) -> f64 {
    let scale: f64 = c.iter().zip(x).map(|(&ck, &xk)| (ck as f64).abs() * xk.abs()).sum();
    8.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

enum Classified {
    Definite,
    Ambiguous,
    Rejected,
}

fn classify(c: &[i64], x: &[f64], tol: f64) -> (Classified, f64) {
    let r = exact_residual(c, x);
    let a = ambiguity(c, x);
    let class = if r < tol - a {
        Classified::Definite
    } else if r <= tol + a {
        Classified::Ambiguous
    } else {
        Classified::Rejected
    };
    (class, r)
}

/// Canonical preference among valid relations: fewest nonzero entries, then
/// smallest max-norm, then lexicographic order.
fn relation_key(c: &[i64]) -> (usize, i64, Vec<i64>) {
    (c.iter().filter(|&&v| v != 0).count(), abs_max(c), c.to_vec())
}

fn precision_floor(x: &[f64], coeff_bound: u32) -> f64 {
    let bound = vec![coeff_bound as i64; x.len()];
    ambiguity(&bound, x)
}

fn verdict(
    status: IndependenceStatus,
    relation: Option<(Vec<i64>, f64)>,
    coeff_bound: u32,
    tol: f64,
    method: RelationMethod,
    note: Option<String>,
) -> IndependenceVerdict {
    let (relation, residual) = match relation {
        Some((c, r)) => (Some(c), Some(r)),
        None => (None, None),
    };
    IndependenceVerdict {
        status,
        relation,
        coeff_bound,
        tolerance: tol,
        method,
        residual,
        note,
    }
}

/// Enumerates every integer vector with `|c_k| <= B` (first nonzero entry
/// positive). The last coefficient is solved for rather than enumerated.
pub fn exhaustive_relation_search(x: &[f64], coeff_bound: u32, tol: f64) -> IndependenceVerdict {
    let method = RelationMethod::Exhaustive;
    if tol <= precision_floor(x, coeff_bound) {
        return verdict(
            IndependenceStatus::Inconclusive,
            None,
            coeff_bound,
            tol,
            method,
            Some("tolerance below floating-point resolution".into()),
        );
    }
    let n = x.len();
    if n == 0 {
        return verdict(IndependenceStatus::Independent, None, coeff_bound, tol, method, None);
    }
    let b = coeff_bound as i64;
    let last = x[n - 1];
    let mut best: Option<(Vec<i64>, f64)> = None;
    let mut ambiguous: Option<(Vec<i64>, f64)> = None;
    let mut prefix = vec![-b; n - 1];
    let mut c = vec![0i64; n];
    loop {
        let s: f64 = prefix.iter().zip(x).map(|(&ck, &xk)| ck as f64 * xk).sum();
        let candidates: Vec<i64> = if last.abs() > 2.0 * tol {
            let center = (-s / last).round() as i64;
            (center - 1..=center + 1).filter(|v| v.abs() <= b).collect()
        } else {
            (-b..=b).collect()
        };
        for cn in candidates {
            c[..n - 1].copy_from_slice(&prefix);
            c[n - 1] = cn;
            match c.iter().find(|&&v| v != 0) {
                Some(&first) if first > 0 => {}
                _ => continue,
            }
            if (s + cn as f64 * last).abs() > 2.0 * tol {
                continue;
            }
            let (class, r) = classify(&c, x, tol);
            let slot = match class {
                Classified::Definite => &mut best,
                Classified::Ambiguous => &mut ambiguous,
                Classified::Rejected => continue,
            };
            if slot.as_ref().is_none_or(|(old, _)| relation_key(&c) < relation_key(old)) {
                *slot = Some((c.clone(), r));
            }
        }
        // odometer over the prefix
        let mut i = 0;
        loop {
            if i == n - 1 {
                return finish(best, ambiguous, coeff_bound, tol, method);
            }
            prefix[i] += 1;
            if prefix[i] <= b {
                break;
            }
            prefix[i] = -b;
            i += 1;
        }
    }
}

fn finish(
    best: Option<(Vec<i64>, f64)>,
    ambiguous: Option<(Vec<i64>, f64)>,
    coeff_bound: u32,
    tol: f64,
    method: RelationMethod,
) -> IndependenceVerdict {
    match (best, ambiguous) {
        (Some(rel), _) => verdict(IndependenceStatus::Dependent, Some(rel), coeff_bound, tol, method, None),
        (None, Some(rel)) => verdict(
            IndependenceStatus::Inconclusive,
            Some(rel),
            coeff_bound,
            tol,
            method,
            Some("relation residual indistinguishable from tolerance".into()),
        ),
        (None, None) => verdict(IndependenceStatus::Independent, None, coeff_bound, tol, method, None),
    }
}

enum PslqOutcome {
    Relation(Vec<i64>),
    NoneWithinNorm,
    Failed(&'static str),
}

/// PSLQ-based verdict. A detected relation outside the coefficient bound
/// still certifies independence relative to `B` when its norm exceeds the
/// PSLQ guarantee `gamma^(n-2) * B * sqrt(n)`.
pub fn pslq_relation_search(x: &[f64], coeff_bound: u32, tol: f64) -> IndependenceVerdict {
    let method = RelationMethod::Pslq;
    let n = x.len();
    if tol <= precision_floor(x, coeff_bound) {
        return verdict(
            IndependenceStatus::Inconclusive,
            None,
            coeff_bound,
            tol,
            method,
            Some("tolerance below floating-point resolution".into()),
        );
    }
    // Zero eigenvalues are trivially dependent.
    if let Some(k) = x.iter().position(|v| v.abs() < tol) {
        let mut c = vec![0; n];
        c[k] = 1;
        let r = exact_residual(&c, x);
        return verdict(IndependenceStatus::Dependent, Some((c, r)), coeff_bound, tol, method, None);
    }
    if n < 2 {
        return verdict(IndependenceStatus::Independent, None, coeff_bound, tol, method, None);
    }
    let gamma = 2.0 / 3f64.sqrt() + 0.01;
    let norm_bound = coeff_bound as f64 * (n as f64).sqrt();
    match pslq(x, tol, norm_bound, gamma) {
        PslqOutcome::NoneWithinNorm => {
            verdict(IndependenceStatus::Independent, None, coeff_bound, tol, method, None)
        }
        PslqOutcome::Failed(why) => {
            verdict(IndependenceStatus::Inconclusive, None, coeff_bound, tol, method, Some(why.into()))
        }
        PslqOutcome::Relation(mut c) => {
            if let Some(&first) = c.iter().find(|&&v| v != 0) {
                if first < 0 {
                    c.iter_mut().for_each(|v| *v = -*v);
                }
            }
            let (class, r) = classify(&c, x, tol);
            let within = abs_max(&c) <= coeff_bound as i64;
            match (class, within) {
                (Classified::Definite, true) => {
                    verdict(IndependenceStatus::Dependent, Some((c, r)), coeff_bound, tol, method, None)
                }
                (Classified::Definite, false) => {
                    let l2 = c.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
                    if l2 / gamma.powi(n as i32 - 2) > norm_bound {
                        verdict(
                            IndependenceStatus::Independent,
                            None,
                            coeff_bound,
                            tol,
                            method,
                            Some(format!("smallest relation found {c:?} exceeds the coefficient bound")),
                        )
                    } else {
                        verdict(
                            IndependenceStatus::Inconclusive,
                            Some((c, r)),
                            coeff_bound,
                            tol,
                            method,
                            Some("relation found outside the coefficient bound".into()),
                        )
                    }
                }
                _ => verdict(
                    IndependenceStatus::Inconclusive,
                    Some((c, r)),
                    coeff_bound,
                    tol,
                    method,
                    Some("PSLQ candidate not confirmed at the tolerance".into()),
                ),
            }
        }
    }
}

/// Real-number PSLQ (Ferguson-Bailey) in double precision.
fn pslq(x: &[f64], tol: f64, norm_bound: f64, gamma: f64) -> PslqOutcome {
    let n = x.len();
    let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut s = vec![0.0; n];
    for k in (0..n).rev() {
        s[k] = (x[k] * x[k] + if k + 1 < n { s[k + 1] * s[k + 1] } else { 0.0 }).sqrt();
    }
    let t0 = s[0];
    let mut y: Vec<f64> = x.iter().map(|v| v / t0).collect();
    s.iter_mut().for_each(|v| *v /= t0);

    let mut h = vec![vec![0.0; n - 1]; n];
    for j in 0..n - 1 {
        h[j][j] = s[j + 1] / s[j];
        for i in j + 1..n {
            h[i][j] = -y[i] * y[j] / (s[j] * s[j + 1]);
        }
    }
    let mut a = identity(n);
    let mut b = identity(n);

    let reduce = |i: usize, j: usize, h: &mut Vec<Vec<f64>>, y: &mut Vec<f64>, a: &mut Vec<Vec<f64>>, b: &mut Vec<Vec<f64>>| {
        if h[j][j] == 0.0 {
            return;
        }
        let t = (h[i][j] / h[j][j]).round();
        if t == 0.0 {
            return;
        }
        y[j] += t * y[i];
        for k in 0..=j {
            h[i][k] -= t * h[j][k];
        }
        for k in 0..n {
            a[i][k] -= t * a[j][k];
            b[k][j] += t * b[k][i];
        }
    };

    for i in 1..n {
        for j in (0..i).rev() {
            reduce(i, j, &mut h, &mut y, &mut a, &mut b);
        }
    }

    for _ in 0..PSLQ_MAX_ITER {
        if let Some(j) = detect(&y, xnorm, tol) {
            return PslqOutcome::Relation(column(&b, j));
        }
        let mut m = 0;
        let mut best = -1.0;
        for i in 0..n - 1 {
            let v = gamma.powi(i as i32 + 1) * h[i][i].abs();
            if v > best {
                best = v;
                m = i;
            }
        }
        y.swap(m, m + 1);
        a.swap(m, m + 1);
        h.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let t0 = h[m][m].hypot(h[m][m + 1]);
            let (t1, t2) = (h[m][m] / t0, h[m][m + 1] / t0);
            for row in h.iter_mut().skip(m) {
                let (t3, t4) = (row[m], row[m + 1]);
                row[m] = t1 * t3 + t2 * t4;
                row[m + 1] = -t2 * t3 + t1 * t4;
            }
        }
        for i in m + 1..n {
            for j in (0..i.min(m + 2)).rev() {
                reduce(i, j, &mut h, &mut y, &mut a, &mut b);
            }
        }
        if let Some(j) = detect(&y, xnorm, tol) {
            return PslqOutcome::Relation(column(&b, j));
        }
        let hmax = (0..n - 1).map(|j| h[j][j].abs()).fold(0.0, f64::max);
        if hmax == 0.0 {
            return PslqOutcome::Failed("PSLQ lost precision");
        }
        if 1.0 / hmax > norm_bound {
            return PslqOutcome::NoneWithinNorm;
        }
        let entry_max = a.iter().chain(b.iter()).flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if entry_max > PSLQ_MAX_ENTRY {
            return PslqOutcome::Failed("PSLQ exceeded double precision");
        }
    }
    PslqOutcome::Failed("PSLQ iteration limit")
}

fn detect(y: &[f64], xnorm: f64, tol: f64) -> Option<usize> {
    let (j, v) = y
        .iter()
        .enumerate()
        .map(|(j, v)| (j, v.abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    (v * xnorm < tol).then_some(j)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn column(b: &[Vec<f64>], j: usize) -> Vec<i64> {
    b.iter().map(|row| row[j].round() as i64).collect()
}
