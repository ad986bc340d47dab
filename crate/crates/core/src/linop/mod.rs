//! Dense complex linear algebra, product formulas and propagators.

mod matrix;
mod product;
mod system;

pub use matrix::{commutator, herm_exp, hs_inner, pauli, ComplexMatrix, HermitianEigen, DEFAULT_TOL};
pub(crate) use matrix::commutator_unchecked;
pub use product::{anti_exp, commutator_error, commutator_product, trotter_error, trotter_product};
pub use system::{propagate, ControlSchedule, ControlSystem, Segment};
