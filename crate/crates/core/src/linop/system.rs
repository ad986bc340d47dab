//! Bilinear control systems `H(y) = H_0 + sum_j y_j H_j` and their
//! piecewise-constant propagators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::spectral::DriftSpectrum;

/// One constant-control interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub controls: Vec<f64>,
}

/// Piecewise-constant control functions as an ordered list of segments.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (k, s) in segments.iter().enumerate() {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "segment {k} has non-positive duration {}",
                    s.duration
                )));
            }
            if s.controls.iter().any(|y| !y.is_finite()) {
                return Err(Error::InvalidInput(format!("segment {k} has non-finite controls")));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Control time `T`.
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Self { segments }
    }
}

/// Drift spectrum plus bounded Hermitian control Hamiltonians, all expressed
/// in one working basis of the truncated Hilbert space.
#[derive(Clone, Debug)]
pub struct ControlSystem {
    drift: DriftSpectrum,
    drift_matrix: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
}

impl ControlSystem {
    pub fn new(drift: DriftSpectrum, controls: Vec<ComplexMatrix>) -> Result<Self> {
        let n = drift.dim();
        for (j, h) in controls.iter().enumerate() {
            if h.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: h.dim(),
                });
            }
            let tol = DEFAULT_TOL * h.max_abs().max(1.0);
            if !h.is_hermitian(tol) {
                return Err(Error::InvalidInput(format!("control H{} is not Hermitian", j + 1)));
            }
        }
        let drift_matrix = drift.reconstruct();
        let controls = controls.iter().map(ComplexMatrix::hermitian_part).collect();
        Ok(Self {
            drift,
            drift_matrix,
            controls,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn drift(&self) -> &DriftSpectrum {
        &self.drift
    }

    /// `H_0 = sum_k x_k F_k`.
    pub fn drift_matrix(&self) -> &ComplexMatrix {
        &self.drift_matrix
    }

    pub fn controls(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    /// `H(y) = H_0 + sum_j y_j H_j`.
    pub fn hamiltonian(&self, y: &[f64]) -> Result<ComplexMatrix> {
        if y.len() != self.controls.len() {
            return Err(Error::DimensionMismatch {
                expected: self.controls.len(),
                found: y.len(),
            });
        }
        let mut h = self.drift_matrix.clone();
        for (yj, hj) in y.iter().zip(&self.controls) {
            h = &h + &hj.scale(Complex64::new(*yj, 0.0));
        }
        Ok(h)
    }
}

/// `exp(i tau_1 H(y_1)) ... exp(i tau_M H(y_M))`, first segment leftmost.
pub fn propagate(system: &ControlSystem, schedule: &ControlSchedule) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(system.dim());
    for seg in schedule.segments() {
        let h = system.hamiltonian(&seg.controls)?;
        u = &u * &h.herm_exp(seg.duration)?;
    }
    Ok(u)
}
