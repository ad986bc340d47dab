//! Kronecker approximation on the maximal torus of the drift and recurrence
//! of the drift flow.
//!
//! The search for `t` with `|t x_k - y_k - lambda_k| < delta` for all `k` walks
//! along the `t` axis in increasing order. The feasible set of one anchor
//! frequency is a union of short windows; inside each window the feasible
//! sets of the remaining frequencies are intersected exactly, so every
//! feasible component in the horizon is found and none is skipped between
//! grid points. Within the first feasible component the returned `t`
//! minimizes the largest residual.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linop::ComplexMatrix;
use crate::spectral::{check_rational_independence, DriftSpectrum, IndependenceStatus};

/// Default cap on anchor windows examined by one search.
pub const DEFAULT_MAX_WINDOWS: u64 = 10_000_000;

/// Phases `lambda_k` (mod 1) of `V = sum_k exp(2 pi i lambda_k) F_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusElement {
    pub phases: Vec<f64>,
}

impl TorusElement {
    pub fn new(phases: Vec<f64>) -> Self {
        Self { phases }
    }

    pub fn identity(len: usize) -> Self {
        Self::new(vec![0.0; len])
    }

    /// The torus element `exp(i s H_0)`.
    pub fn on_orbit(spectrum: &DriftSpectrum, s: f64) -> Self {
        Self::new(spectrum.eigenvalues().iter().map(|x| s * x / (2.0 * PI)).collect())
    }

    pub fn materialize(&self, spectrum: &DriftSpectrum) -> Result<ComplexMatrix> {
        check_len(self.phases.len(), spectrum)?;
        let mut v = ComplexMatrix::zeros(spectrum.dim());
        for (lambda, f) in self.phases.iter().zip(spectrum.projections()) {
            v = &v + &f.scale(Complex64::from_polar(1.0, 2.0 * PI * lambda));
        }
        Ok(v)
    }
}

/// Real coefficients of `X = sum_k x_k F_k` in the torus Lie algebra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusGenerator {
    pub phases: Vec<f64>,
}

impl TorusGenerator {
    pub fn new(phases: Vec<f64>) -> Self {
        Self { phases }
    }

    pub fn materialize(&self, spectrum: &DriftSpectrum) -> Result<ComplexMatrix> {
        check_len(self.phases.len(), spectrum)?;
        let mut x = ComplexMatrix::zeros(spectrum.dim());
        for (c, f) in self.phases.iter().zip(spectrum.projections()) {
            x = &x + &f.scale_real(*c);
        }
        Ok(x)
    }

    /// `exp(iX) = sum_k exp(i x_k) F_k`.
    pub fn exp(&self, spectrum: &DriftSpectrum) -> Result<ComplexMatrix> {
        let scaled: Vec<f64> = self.phases.iter().map(|x| x / (2.0 * PI)).collect();
        TorusElement::new(scaled).materialize(spectrum)
    }
}

fn check_len(len: usize, spectrum: &DriftSpectrum) -> Result<()> {
    if len != spectrum.len() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.len(),
            found: len,
        });
    }
    Ok(())
}

/// Witness `t`, integers `y_k` and residuals `|t x_k - y_k - lambda_k|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KroneckerCertificate {
    pub t: f64,
    pub integers: Vec<i64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub delta: f64,
    pub search_horizon: f64,
    pub windows_scanned: u64,
}

impl KroneckerCertificate {
    fn evaluate(xhat: &[f64], lambda: &[f64], t: f64, delta: f64, horizon: f64, windows: u64) -> Self {
        let mut integers = Vec::with_capacity(xhat.len());
        let mut residuals = Vec::with_capacity(xhat.len());
        for (x, l) in xhat.iter().zip(lambda) {
            let phase = t * x - l;
            let y = phase.round();
            integers.push(y as i64);
            residuals.push((phase - y).abs());
        }
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Self {
            t,
            integers,
            residuals,
            max_residual,
            delta,
            search_horizon: horizon,
            windows_scanned: windows,
        }
    }

    pub fn is_success(&self) -> bool {
        self.max_residual < self.delta
    }

    /// Recomputes the residuals from `t` and checks them against `delta`.
    pub fn verify(&self, xhat: &[f64], lambda: &[f64]) -> bool {
        xhat.len() == self.integers.len()
            && xhat.iter().zip(lambda).zip(&self.integers).all(|((x, l), y)| {
                (self.t * x - *y as f64 - l).abs() < self.delta
            })
    }
}

/// Strong neighborhood `{W : ||W psi_k - V psi_k|| < eps for all k}`.
#[derive(Clone, Debug)]
pub struct NeighborhoodSpec {
    pub reference: ComplexMatrix,
    pub vectors: Vec<DVector<Complex64>>,
    pub eps: f64,
}

impl NeighborhoodSpec {
    pub fn new(reference: ComplexMatrix, vectors: Vec<DVector<Complex64>>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput("neighborhood radius must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut normalized = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != reference.dim() {
                return Err(Error::DimensionMismatch {
                    expected: reference.dim(),
                    found: v.len(),
                });
            }
            let norm = v.norm();
            if norm == 0.0 {
                return Err(Error::InvalidInput("test vectors must be nonzero".into()));
            }
            normalized.push(v / Complex64::new(norm, 0.0));
        }
        Ok(Self {
            reference,
            vectors: normalized,
            eps,
        })
    }

    /// `max_k ||(W - V) psi_k||`.
    pub fn distance(&self, w: &ComplexMatrix) -> f64 {
        let diff = w - &self.reference;
        self.vectors
            .iter()
            .map(|v| diff.apply(v).norm())
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, w: &ComplexMatrix) -> bool {
        self.distance(w) < self.eps
    }
}

/// Search limits shared by [`torus_approx`] and [`recurrence_time`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Initial horizon; `None` uses `1e3 / min_{k != j} |x_k - x_j|`.
    pub initial_horizon: Option<f64>,
    pub max_windows: u64,
    /// Refuse rationally dependent frequencies.
    pub enforce_independence: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            initial_horizon: None,
            max_windows: DEFAULT_MAX_WINDOWS,
            enforce_independence: true,
        }
    }
}

struct ScanOutcome {
    solution: Option<f64>,
    best_sample: Option<(f64, f64)>,
    windows: u64,
}

/// Scans `[t_from, t_to]`; see the module docs. When `skip_touching_start`
/// is set, a feasible component reaching down to `t_from` is ignored.
fn scan(
    xhat: &[f64],
    lambda: &[f64],
    delta: f64,
    t_from: f64,
    t_to: f64,
    skip_touching_start: bool,
    max_windows: u64,
) -> ScanOutcome {
    let residual_max = |t: f64| -> f64 {
        xhat.iter()
            .zip(lambda)
            .map(|(x, l)| {
                let p = t * x - l;
                (p - p.round()).abs()
            })
            .fold(0.0, f64::max)
    };

    // Frequencies that do not move contribute a constant residual.
    let moving: Vec<usize> = (0..xhat.len()).filter(|&k| xhat[k] != 0.0).collect();
    let static_ok = (0..xhat.len())
        .filter(|&k| xhat[k] == 0.0)
        .all(|k| (lambda[k] - lambda[k].round()).abs() < delta);

    if moving.is_empty() || !static_ok {
        let t = t_from;
        let feasible = static_ok && !skip_touching_start;
        return ScanOutcome {
            solution: feasible.then_some(t),
            best_sample: Some((t, residual_max(t))),
            windows: 0,
        };
    }

    let anchor = *moving
        .iter()
        .min_by(|&&a, &&b| xhat[a].abs().total_cmp(&xhat[b].abs()))
        .unwrap();
    let xa = xhat[anchor];
    let la = lambda[anchor];
    let phase_lo = (if xa > 0.0 { t_from } else { t_to }) * xa - la;
    let phase_hi = (if xa > 0.0 { t_to } else { t_from }) * xa - la;
    let m_lo = (phase_lo - delta).ceil() as i64;
    let m_hi = (phase_hi + delta).floor() as i64;

    let mut best_sample: Option<(f64, f64)> = None;
    let mut windows = 0u64;
    let total = (m_hi - m_lo + 1).max(0) as u64;
    for step in 0..total {
        if windows >= max_windows {
            break;
        }
        windows += 1;
        // increasing t
        let m = if xa > 0.0 { m_lo + step as i64 } else { m_hi - step as i64 };
        let center = (m as f64 + la) / xa;
        if (t_from..=t_to).contains(&center) {
            let r = residual_max(center);
            if best_sample.is_none_or(|(_, b)| r < b) {
                best_sample = Some((center, r));
            }
        }
        let mut intervals = vec![ordered((m as f64 + la - delta) / xa, (m as f64 + la + delta) / xa)];
        intervals[0].0 = intervals[0].0.max(t_from);
        intervals[0].1 = intervals[0].1.min(t_to);
        if intervals[0].0 >= intervals[0].1 {
            continue;
        }
        for &k in moving.iter().filter(|&&k| k != anchor) {
            intervals = restrict(&intervals, xhat[k], lambda[k], delta);
            if intervals.is_empty() {
                break;
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (lo, hi) in intervals {
            if skip_touching_start && lo <= t_from {
                continue;
            }
            let t = minimax_point(xhat, lambda, lo, hi);
            if residual_max(t) < delta {
                return ScanOutcome {
                    solution: Some(t),
                    best_sample,
                    windows,
                };
            }
        }
    }
    ScanOutcome {
        solution: None,
        best_sample,
        windows,
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Intersects each interval with `{t : dist(t x - lambda, Z) < delta}`.
fn restrict(intervals: &[(f64, f64)], x: f64, lambda: f64, delta: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(lo, hi) in intervals {
        let (p0, p1) = ordered(lo * x - lambda, hi * x - lambda);
        let j_lo = (p0 - delta).ceil() as i64;
        let j_hi = (p1 + delta).floor() as i64;
        for j in j_lo..=j_hi {
            let (a, b) = ordered((j as f64 + lambda - delta) / x, (j as f64 + lambda + delta) / x);
            let (a, b) = (a.max(lo), b.min(hi));
            if a < b {
                out.push((a, b));
            }
        }
    }
    out
}

/// Minimizes `max_k |t x_k - lambda_k - y_k|` over `[lo, hi]` with the
/// integers `y_k` fixed at their values at the midpoint. The objective is
/// convex and piecewise linear, so the minimum sits at an endpoint, a zero
/// of one term, or a crossing of two terms.
fn minimax_point(xhat: &[f64], lambda: &[f64], lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let offsets: Vec<f64> = xhat
        .iter()
        .zip(lambda)
        .map(|(x, l)| l + (mid * x - l).round())
        .collect();
    let f = |t: f64| {
        xhat.iter()
            .zip(&offsets)
            .map(|(x, c)| (t * x - c).abs())
            .fold(0.0, f64::max)
    };
    let mut candidates = vec![lo, hi, mid];
    for i in 0..xhat.len() {
        if xhat[i] != 0.0 {
            candidates.push(offsets[i] / xhat[i]);
        }
        for j in i + 1..xhat.len() {
            // x_i t - c_i = +-(x_j t - c_j)
            let d = xhat[i] - xhat[j];
            if d != 0.0 {
                candidates.push((offsets[i] - offsets[j]) / d);
            }
            let s = xhat[i] + xhat[j];
            if s != 0.0 {
                candidates.push((offsets[i] + offsets[j]) / s);
            }
        }
    }
    candidates
        .into_iter()
        .filter(|t| (lo..=hi).contains(t))
        .min_by(|a, b| f(*a).total_cmp(&f(*b)).then(a.total_cmp(b)))
        .unwrap_or(mid)
}

/// Finds `t` in `[0, horizon]` with `|t xhat_k - y_k - lambda_k| < delta` for
/// every `k`.
///
/// Fails with [`Error::HorizonExhausted`] carrying the best sampled
/// candidate when no such `t` exists below the horizon.
pub fn kronecker_solve(xhat: &[f64], lambda: &[f64], delta: f64, horizon: f64) -> Result<KroneckerCertificate> {
    kronecker_solve_limited(xhat, lambda, delta, horizon, DEFAULT_MAX_WINDOWS)
}

pub fn kronecker_solve_limited(
    xhat: &[f64],
    lambda: &[f64],
    delta: f64,
    horizon: f64,
    max_windows: u64,
) -> Result<KroneckerCertificate> {
    validate_inputs(xhat, lambda, delta)?;
    let out = scan(xhat, lambda, delta, 0.0, horizon.max(0.0), false, max_windows);
    finish_scan(xhat, lambda, delta, horizon, out)
}

fn validate_inputs(xhat: &[f64], lambda: &[f64], delta: f64) -> Result<()> {
    if xhat.is_empty() {
        return Err(Error::EmptyInput);
    }
    if xhat.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: xhat.len(),
            found: lambda.len(),
        });
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if xhat.iter().chain(lambda).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn finish_scan(
    xhat: &[f64],
    lambda: &[f64],
    delta: f64,
    horizon: f64,
    out: ScanOutcome,
) -> Result<KroneckerCertificate> {
    match out.solution {
        Some(t) => Ok(KroneckerCertificate::evaluate(xhat, lambda, t, delta, horizon, out.windows)),
        None => {
            let t = out.best_sample.map(|(t, _)| t).unwrap_or(0.0);
            let best = KroneckerCertificate::evaluate(xhat, lambda, t, delta, horizon, out.windows);
            Err(Error::HorizonExhausted { best: Box::new(best) })
        }
    }
}

/// Search with horizon doubling, starting at `t = 0`.
/// [`kronecker_solve`] with the horizon doubled (from `options.initial_horizon`
/// or [`default_horizon`]) until a solution appears or `max_windows` is spent.
pub fn kronecker_search(xhat: &[f64], lambda: &[f64], delta: f64, options: &SearchOptions) -> Result<KroneckerCertificate> {
    search_doubling(xhat, lambda, delta, options, false)
}

fn search_doubling(
    xhat: &[f64],
    lambda: &[f64],
    delta: f64,
    options: &SearchOptions,
    skip_start: bool,
) -> Result<KroneckerCertificate> {
    validate_inputs(xhat, lambda, delta)?;
    let mut horizon = options.initial_horizon.unwrap_or_else(|| default_horizon(xhat));
    let mut from = 0.0;
    let mut windows = 0u64;
    let mut best: Option<(f64, f64)> = None;
    loop {
        let remaining = options.max_windows.saturating_sub(windows);
        let out = scan(xhat, lambda, delta, from, horizon, skip_start && from == 0.0, remaining);
        windows += out.windows;
        if let Some(t) = out.solution {
            return Ok(KroneckerCertificate::evaluate(xhat, lambda, t, delta, horizon, windows));
        }
        if let Some((t, r)) = out.best_sample {
            if best.is_none_or(|(_, b)| r < b) {
                best = Some((t, r));
            }
        }
        if windows >= options.max_windows || out.windows == 0 && from > 0.0 {
            let t = best.map(|(t, _)| t).unwrap_or(0.0);
            let cert = KroneckerCertificate::evaluate(xhat, lambda, t, delta, horizon, windows);
            return Err(Error::HorizonExhausted { best: Box::new(cert) });
        }
        from = horizon;
        horizon *= 2.0;
    }
}

/// `1e3 / min_{k != j} |x_k - x_j|`, or `1e3 / |x|` for a single frequency.
pub fn default_horizon(xhat: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..xhat.len() {
        for j in i + 1..xhat.len() {
            let d = (xhat[i] - xhat[j]).abs();
            if d > 0.0 {
                gap = gap.min(d);
            }
        }
    }
    if !gap.is_finite() {
        gap = xhat.iter().map(|x| x.abs()).filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
    }
    if gap.is_finite() {
        1e3 / gap
    } else {
        1.0
    }
}

/// Result of [`torus_approx`].
#[derive(Clone, Debug, Serialize)]
pub struct TorusApproximation {
    pub t: f64,
    /// `||(exp(i t H_0) - V) P||` with `P` the projection onto the first
    /// `n_modes` eigenspaces, measured directly.
    pub achieved: f64,
    pub eps: f64,
    pub n_modes: usize,
    pub certificate: KroneckerCertificate,
}

/// Finds `t` with `exp(i t H_0)` within `eps` of the torus element `target`
/// on the first `n_modes` eigenspaces.
///
/// Per-mode tolerance `delta = eps / (4 pi n)`: the chordal bound
/// `|e^{2 pi i a} - e^{2 pi i b}| <= 2 pi |a - b|` summed over `n` modes keeps
/// the total below `eps / 2`.
pub fn torus_approx(
    spectrum: &DriftSpectrum,
    target: &TorusElement,
    eps: f64,
    n_modes: usize,
    options: &SearchOptions,
) -> Result<TorusApproximation> {
    check_len(target.phases.len(), spectrum)?;
    if n_modes == 0 || n_modes > spectrum.len() {
        return Err(Error::IndexOutOfRange {
            index: n_modes,
            len: spectrum.len(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let modes: Vec<usize> = (0..n_modes).collect();
    if options.enforce_independence {
        ensure_independent(spectrum, &modes)?;
    }
    let xhat: Vec<f64> = modes.iter().map(|&k| spectrum.eigenvalues()[k] / (2.0 * PI)).collect();
    let lambda: Vec<f64> = modes.iter().map(|&k| target.phases[k]).collect();
    let delta = eps / (4.0 * PI * n_modes as f64);
    let certificate = search_doubling(&xhat, &lambda, delta, options, false)?;

    let u = spectrum.reconstruct().herm_exp(certificate.t)?;
    let v = target.materialize(spectrum)?;
    let mut p = ComplexMatrix::zeros(spectrum.dim());
    for &k in &modes {
        p = &p + spectrum.eigenprojection(k)?;
    }
    let achieved = (&(&u - &v) * &p).op_norm();
    if achieved >= eps {
        return Err(Error::VerificationFailed { achieved, bound: eps });
    }
    Ok(TorusApproximation {
        t: certificate.t,
        achieved,
        eps,
        n_modes,
        certificate,
    })
}

fn ensure_independent(spectrum: &DriftSpectrum, modes: &[usize]) -> Result<()> {
    let sub = sub_spectrum(spectrum, modes)?;
    let verdict = check_rational_independence(
        &sub,
        crate::spectral::DEFAULT_COEFF_BOUND,
        crate::spectral::DEFAULT_INDEPENDENCE_TOL,
    );
    if verdict.status == IndependenceStatus::Dependent {
        return Err(Error::IndependenceViolated {
            witness: verdict.relation.unwrap_or_default(),
        });
    }
    Ok(())
}

/// Diagonal spectrum holding the selected eigenvalues (and their tags).
fn sub_spectrum(spectrum: &DriftSpectrum, modes: &[usize]) -> Result<DriftSpectrum> {
    let x: Vec<f64> = modes.iter().map(|&k| spectrum.eigenvalues()[k]).collect();
    let s = DriftSpectrum::group_degenerate(&x, 0.0)?;
    match spectrum.exact_values() {
        Some(tags) => {
            let tags: Vec<_> = modes.iter().map(|&k| tags[k].clone()).collect();
            s.with_exact(&tags)
        }
        None => Ok(s),
    }
}

/// Result of [`recurrence_time`].
#[derive(Clone, Debug, Serialize)]
pub struct Recurrence {
    pub t_plus: f64,
    /// `max_j ||(exp(i t_+ H_0) - exp(i t_- H_0)) psi_j||`, measured directly.
    pub achieved: f64,
    pub eps: f64,
    /// Eigenspaces included in the finite-dimensional return problem.
    pub modes: Vec<usize>,
    pub certificate: KroneckerCertificate,
}

/// Finds `t_+ > 0` with `exp(i t_+ H_0)` in the strong neighborhood `nbhd`
/// of `exp(i t_- H_0)`.
///
/// Eigenspaces are added in order of decreasing weight on the test vectors
/// until the neglected part of every test vector has norm at most `eps / 6`
/// (it contributes at most twice that); the remaining modes get
/// `delta = eps / (4 pi N)`. A feasible stretch that starts at `t = 0` is
/// not a return and is skipped.
pub fn recurrence_time(
    spectrum: &DriftSpectrum,
    t_minus: f64,
    nbhd: &NeighborhoodSpec,
    options: &SearchOptions,
) -> Result<Recurrence> {
    if t_minus > 0.0 {
        return Err(Error::InvalidInput("t_minus must be <= 0".into()));
    }
    let h0 = spectrum.reconstruct();
    let reference = h0.herm_exp(t_minus)?;
    if nbhd.reference.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            found: nbhd.reference.dim(),
        });
    }
    if nbhd.reference.max_abs_diff(&reference) > 1e-8 {
        return Err(Error::InvalidInput("neighborhood reference must equal exp(i t_minus H0)".into()));
    }
    let eps = nbhd.eps;

    let weights: Vec<Vec<f64>> = spectrum
        .projections()
        .iter()
        .map(|f| nbhd.vectors.iter().map(|v| f.apply(v).norm()).collect())
        .collect();
    let mut order: Vec<usize> = (0..spectrum.len()).collect();
    let key = |k: usize| weights[k].iter().copied().fold(0.0, f64::max);
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let mut modes = Vec::new();
    for &k in &order {
        let tail_ok = (0..nbhd.vectors.len()).all(|j| {
            let tail: f64 = order
                .iter()
                .filter(|m| !modes.contains(*m))
                .map(|&m| weights[m][j].powi(2))
                .sum();
            tail.sqrt() <= eps / 6.0
        });
        if tail_ok {
            break;
        }
        modes.push(k);
    }
    if modes.is_empty() {
        modes.push(order[0]);
    }
    modes.sort_unstable();
    if options.enforce_independence {
        // Rational spectra recur exactly; the check is advisory there.
        let _ = ensure_independent(spectrum, &modes);
    }

    let xhat: Vec<f64> = modes.iter().map(|&k| spectrum.eigenvalues()[k] / (2.0 * PI)).collect();
    let lambda: Vec<f64> = xhat.iter().map(|x| t_minus * x).collect();
    let delta = eps / (4.0 * PI * modes.len() as f64);
    let certificate = search_doubling(&xhat, &lambda, delta, options, true)?;

    let u = h0.herm_exp(certificate.t)?;
    let achieved = nbhd.distance(&u);
    if achieved >= eps {
        return Err(Error::VerificationFailed { achieved, bound: eps });
    }
    Ok(Recurrence {
        t_plus: certificate.t,
        achieved,
        eps,
        modes,
        certificate,
    })
}
