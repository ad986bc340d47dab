//! Trotter and commutator product formulas.

use super::matrix::{commutator, ComplexMatrix, DEFAULT_TOL};
use crate::error::{Error, Result};

/// `[exp(iA/n) exp(iB/n)]^n` for Hermitian `A`, `B`.
pub fn trotter_product(a: &ComplexMatrix, b: &ComplexMatrix, n: u64) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    if n == 0 {
        return Err(Error::InvalidInput("product formula needs n >= 1".into()));
    }
    let step = 1.0 / n as f64;
    let factor = &a.herm_exp(step)? * &b.herm_exp(step)?;
    Ok(factor.pow(n))
}

/// `[exp(A/n) exp(B/n) exp(-A/n) exp(-B/n)]^(n^2)` for anti-Hermitian `A`, `B`.
pub fn commutator_product(a: &ComplexMatrix, b: &ComplexMatrix, n: u64) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    if n == 0 {
        return Err(Error::InvalidInput("product formula needs n >= 1".into()));
    }
    let (ha, hb) = (anti_to_hermitian(a, 0)?, anti_to_hermitian(b, 1)?);
    let step = 1.0 / n as f64;
    let ea = ha.herm_exp(step)?;
    let eb = hb.herm_exp(step)?;
    let factor = &(&(&ea * &eb) * &ea.adjoint()) * &eb.adjoint();
    Ok(factor.pow(n * n))
}

/// Operator-norm distance of the Trotter product to `exp(i(A+B))`.
pub fn trotter_error(a: &ComplexMatrix, b: &ComplexMatrix, n: u64) -> Result<f64> {
    let exact = (a + b).herm_exp(1.0)?;
    Ok((&trotter_product(a, b, n)? - &exact).op_norm())
}

/// Operator-norm distance of the commutator product to `exp([A,B])`.
pub fn commutator_error(a: &ComplexMatrix, b: &ComplexMatrix, n: u64) -> Result<f64> {
    let exact = anti_exp(&commutator(a, b)?)?;
    Ok((&commutator_product(a, b, n)? - &exact).op_norm())
}

/// `exp(X)` for anti-Hermitian `X`.
pub fn anti_exp(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    anti_to_hermitian(x, 0)?.herm_exp(1.0)
}

fn anti_to_hermitian(x: &ComplexMatrix, index: usize) -> Result<ComplexMatrix> {
    if !x.is_anti_hermitian(DEFAULT_TOL.max(DEFAULT_TOL * x.max_abs())) {
        return Err(Error::NotAntiHermitian { index });
    }
    // X = iH  =>  H = -iX
    Ok(x.scale(-num_complex::Complex64::i()).hermitian_part())
}
