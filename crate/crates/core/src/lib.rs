//! Constructive controllability analysis for bilinear quantum control systems
//! `H(t) = H_0 + sum_j u_j(t) H_j` whose drift has pure point spectrum.
//!
//! Every check runs at a finite truncation of the Hilbert space:
//!
//! - [`spectral`]: eigenprojections of the drift and rational independence
//!   of its eigenvalues,
//! - [`torus`]: Kronecker approximation on the maximal torus and recurrence
//!   times of the drift flow,
//! - [`graph`]: the coupling graph of the controls in the drift eigenbasis,
//! - [`lie`]: Lie closures, the rank condition, and bracket certificates,
//! - [`blocks`]: commutants, centers and block decompositions,
//! - [`models`]: built-in example systems,
//! - [`report`]: configuration files, orchestration and JSON reports.

pub mod blocks;
pub mod error;
pub mod graph;
pub mod lie;
pub mod linop;
pub mod models;
pub mod report;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex;
pub use linop::{ComplexMatrix, ControlSchedule, ControlSystem};
pub use spectral::DriftSpectrum;
