use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{lie_closure_labeled, ClosureOptions, LieBasis};
use crate::error::{Error, Result};
use crate::linop::{ComplexMatrix, ControlSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LarcVerdict {
    Full,
    Proper,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationResult {
    pub n: usize,
    pub closure_dim: usize,
    pub ambient_dim: usize,
    pub verdict: LarcVerdict,
    pub passes: usize,
}

/// Rank-condition result at the largest requested truncation, plus the
/// closure dimension at every truncation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LarcReport {
    pub closure_dim: usize,
    pub ambient_dim: usize,
    pub verdict: LarcVerdict,
    pub iterations: usize,
    pub rank_tol: f64,
    pub history: Vec<TruncationResult>,
}

impl LarcReport {
    pub fn is_full(&self) -> bool {
        self.verdict == LarcVerdict::Full
    }
}

fn verdict_of(basis: &LieBasis) -> LarcVerdict {
    if basis.is_full() {
        LarcVerdict::Full
    } else if !basis.converged {
        LarcVerdict::MaxIterations
    } else {
        LarcVerdict::Proper
    }
}

/// `{i F_k} ∪ {i H_j}` compressed onto the first `n` drift eigenvectors
/// (ascending eigenvalue), with labels. Generators that vanish there are dropped.
pub fn truncate_generators(system: &ControlSystem, n: usize) -> Result<(Vec<ComplexMatrix>, Vec<String>)> {
    let dim = system.dim();
    if n == 0 || n > dim {
        return Err(Error::InvalidInput(format!("truncation {n} outside 1..={dim}")));
    }
    let full: DMatrix<Complex64> = system.drift().eigenbasis();
    let basis = full.columns(0, n).into_owned();
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    let named = system
        .drift()
        .projections()
        .iter()
        .enumerate()
        .map(|(k, f)| (format!("F{}", k + 1), f))
        .chain(system.controls().iter().enumerate().map(|(l, h)| (format!("H{}", l + 1), h)));
    for (label, m) in named {
        let c = m.compress(&basis);
        if c.max_abs() > 1e-14 * m.max_abs().max(1.0) {
            gens.push(c.times_i());
            labels.push(label);
        }
    }
    Ok((gens, labels))
}

/// Closure of the projections and controls at each truncation. An empty
/// `truncations` list means the full working dimension.
pub fn larc_check(system: &ControlSystem, truncations: &[usize], opts: ClosureOptions) -> Result<LarcReport> {
    let mut ns = truncations.to_vec();
    if ns.is_empty() {
        ns.push(system.dim());
    }
    let mut history = Vec::with_capacity(ns.len());
    let mut last = None;
    for &n in &ns {
        let (gens, labels) = truncate_generators(system, n)?;
        let basis = lie_closure_labeled(&gens, labels, opts)?;
        let row = TruncationResult {
            n,
            closure_dim: basis.dim(),
            ambient_dim: n * n,
            verdict: verdict_of(&basis),
            passes: basis.passes,
        };
        history.push(row.clone());
        last = Some(row);
    }
    let last = last.expect("at least one truncation");
    Ok(LarcReport {
        closure_dim: last.closure_dim,
        ambient_dim: last.ambient_dim,
        verdict: last.verdict,
        iterations: last.passes,
        rank_tol: opts.rank_tol,
        history,
    })
}
