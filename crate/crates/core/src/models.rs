//! Built-in systems: the independent-spectrum path model, the truncated
//! Jaynes-Cummings model and the harmonic oscillator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::{pauli, ComplexMatrix, ControlSystem};
use crate::spectral::{DriftSpectrum, ExactValue};

#[derive(Clone, Debug)]
pub enum SpectrumKind {
    /// `x_k = sqrt(p_k)` for the first `n` primes, with exact tags.
    SqrtPrimes,
    /// Explicit eigenvalues, optionally with exact tags.
    User {
        values: Vec<f64>,
        exact: Option<Vec<ExactValue>>,
    },
}

#[derive(Clone, Debug)]
pub enum Coupling {
    /// Unit couplings between neighbouring eigenvectors.
    Tridiagonal,
    User(ComplexMatrix),
}

/// The first `n` primes.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut k = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= k).all(|&p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

pub fn tridiagonal(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| Complex64::new(if i.abs_diff(j) == 1 { 1.0 } else { 0.0 }, 0.0))
}

/// Diagonal drift with one control.
pub fn make_thm2_model(n: usize, spectrum: SpectrumKind, coupling: Coupling) -> Result<ControlSystem> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("model needs n >= 2, got {n}")));
    }
    let drift = match spectrum {
        SpectrumKind::SqrtPrimes => {
            let tags: Vec<ExactValue> = primes(n).into_iter().map(ExactValue::sqrt).collect();
            DriftSpectrum::from_exact(&tags)?
        }
        SpectrumKind::User { values, exact } => {
            if values.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: values.len(),
                });
            }
            let d = DriftSpectrum::from_diagonal(&values)?;
            match exact {
                Some(tags) => d.with_exact(&tags)?,
                None => d,
            }
        }
    };
    let h = match coupling {
        Coupling::Tridiagonal => tridiagonal(n),
        Coupling::User(m) => {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.dim(),
                });
            }
            m
        }
    };
    ControlSystem::new(drift, vec![h])
}

/// Truncated annihilation operator on photon numbers `0..=cutoff`.
pub fn annihilation(cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Product-basis index (atom state `s`, photon number `m`) of the `k`-th
/// block-basis vector: `|0;0>`, then `|mu;0> = |0>|mu>`, `|mu;1> = |1>|mu-1>`.
pub fn jc_product_index(k: usize) -> (usize, usize) {
    if k == 0 {
        return (0, 0);
    }
    let mu = k.div_ceil(2);
    if k % 2 == 1 {
        (0, mu)
    } else {
        (1, mu - 1)
    }
}

/// `(H_0, H_1, H_2)` in the block basis, `2 cutoff + 1` dimensional.
pub fn jaynes_cummings_matrices(
    omega_a: f64,
    omega_c: f64,
    omega_i: f64,
    cutoff: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if cutoff < 1 {
        return Err(Error::InvalidInput("cutoff must be at least 1".into()));
    }
    for (name, w) in [("omega_A", omega_a), ("omega_C", omega_c), ("omega_I", omega_i)] {
        if w == 0.0 || !w.is_finite() {
            return Err(Error::InvalidInput(format!("{name} must be a nonzero finite number")));
        }
    }
    let a = annihilation(cutoff);
    let ad = a.adjoint();
    let photons = &ad * &a;
    let id_f = DMatrix::<Complex64>::identity(cutoff + 1, cutoff + 1);
    let id_a = DMatrix::<Complex64>::identity(2, 2);
    // sigma_+ = |1><0|, sigma_- = |0><1| with sigma_3 = diag(1, -1) on |0>, |1>
    let sp = ComplexMatrix::unit(2, 1, 0).into_dmatrix();
    let sm = ComplexMatrix::unit(2, 0, 1).into_dmatrix();
    let s3 = pauli(3).into_dmatrix();
    let s1 = pauli(1).into_dmatrix();
    let c = |x: f64| Complex64::new(x, 0.0);
    let h0 = s3.kronecker(&id_f) * c(omega_a)
        + id_a.kronecker(&photons) * c(omega_c)
        + (sp.kronecker(&a) + sm.kronecker(&ad)) * c(omega_i);
    let h1 = s3.kronecker(&id_f);
    let h2 = s1.kronecker(&id_f);

    let dim = 2 * cutoff + 1;
    let mut select = DMatrix::<Complex64>::zeros(2 * (cutoff + 1), dim);
    for k in 0..dim {
        let (s, m) = jc_product_index(k);
        select[(s * (cutoff + 1) + m, k)] = c(1.0);
    }
    let compress = |m: DMatrix<Complex64>| ComplexMatrix::from_dmatrix(select.adjoint() * m * &select);
    Ok((compress(h0)?, compress(h1)?, compress(h2)?))
}

/// Drift `H_0`, controls `H_1 = sigma_3 ⊗ 1` and `H_2 = sigma_1 ⊗ 1`, in the
/// block basis with the incomplete last block dropped.
pub fn make_jaynes_cummings(omega_a: f64, omega_c: f64, omega_i: f64, cutoff: usize) -> Result<ControlSystem> {
    let (h0, h1, h2) = jaynes_cummings_matrices(omega_a, omega_c, omega_i, cutoff)?;
    let drift = DriftSpectrum::from_hermitian(&h0, None)?;
    ControlSystem::new(drift, vec![h1, h2])
}

/// Block-basis indices of `H^(mu)`.
pub fn jc_block(mu: usize) -> Vec<usize> {
    if mu == 0 {
        vec![0]
    } else {
        vec![2 * mu - 1, 2 * mu]
    }
}

/// Eigenvalues `k + 1/2`, `k = 0..=cutoff`, with exact rational tags.
pub fn make_harmonic_oscillator(cutoff: usize) -> Result<DriftSpectrum> {
    if cutoff < 2 {
        return Err(Error::InvalidInput("cutoff must be at least 2".into()));
    }
    let tags: Vec<ExactValue> = (0..=cutoff as i64).map(|k| ExactValue::from_ratio(2 * k + 1, 2)).collect();
    DriftSpectrum::from_exact(&tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{check_rational_independence, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL};

    #[test]
    fn first_primes() {
        assert_eq!(primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn sqrt_primes_model() {
        let sys = make_thm2_model(4, SpectrumKind::SqrtPrimes, Coupling::Tridiagonal).unwrap();
        let expect = [2f64, 3.0, 5.0, 7.0].map(f64::sqrt);
        for (x, e) in sys.drift().eigenvalues().iter().zip(expect) {
            assert!((x - e).abs() < 1e-15);
        }
        let v = check_rational_independence(sys.drift(), DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL);
        assert!(v.is_independent());
    }

    #[test]
    fn user_spectrum_is_dependent() {
        let sys = make_thm2_model(
            3,
            SpectrumKind::User {
                values: vec![1.0, 2.0, 3.0],
                exact: None,
            },
            Coupling::Tridiagonal,
        )
        .unwrap();
        let v = check_rational_independence(sys.drift(), DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL);
        assert!(v.is_dependent());
    }

    #[test]
    fn bad_inputs() {
        assert!(make_thm2_model(1, SpectrumKind::SqrtPrimes, Coupling::Tridiagonal).is_err());
        assert!(make_thm2_model(3, SpectrumKind::SqrtPrimes, Coupling::User(tridiagonal(4))).is_err());
        assert!(make_jaynes_cummings(1.0, 0.0, 1.0, 3).is_err());
        assert!(make_jaynes_cummings(1.0, 1.0, 1.0, 0).is_err());
        assert!(make_harmonic_oscillator(1).is_err());
    }

    #[test]
    fn jc_smallest_truncation() {
        let sys = make_jaynes_cummings(1.0, 0.7, 0.3, 1).unwrap();
        assert_eq!(sys.dim(), 3);
        assert_eq!(sys.num_controls(), 2);
    }

    #[test]
    fn jc_coupling_elements() {
        let (wa, wc, wi) = (1.3, 0.9, 0.4);
        let (h0, h1, _) = jaynes_cummings_matrices(wa, wc, wi, 6).unwrap();
        assert!(h0.is_hermitian(0.0));
        for mu in 1..=6 {
            let b = jc_block(mu);
            assert!((h0.get(b[1], b[0]) - Complex64::new(wi * (mu as f64).sqrt(), 0.0)).norm() < 1e-15);
            assert!((h0.get(b[0], b[0]).re - (wa + wc * mu as f64)).abs() < 1e-14);
            assert!((h0.get(b[1], b[1]).re - (-wa + wc * (mu - 1) as f64)).abs() < 1e-14);
        }
        assert!((h0.get(0, 0).re - wa).abs() < 1e-15);
        // H_1 is diagonal in the block basis
        for i in 0..13 {
            for j in 0..13 {
                if i != j {
                    assert_eq!(h1.get(i, j), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn jc_blocks_are_invariant() {
        let (h0, h1, _) = jaynes_cummings_matrices(1.0, 2.0, 0.5, 6).unwrap();
        for mu in 0..=6 {
            let inside = jc_block(mu);
            for &i in &inside {
                for j in (0..13).filter(|j| !inside.contains(j)) {
                    assert!(h0.get(i, j).norm() < 1e-9 && h0.get(j, i).norm() < 1e-9);
                    assert!(h1.get(i, j).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn oscillator_spectrum() {
        let d = make_harmonic_oscillator(4).unwrap();
        assert_eq!(d.eigenvalues(), &[0.5, 1.5, 2.5, 3.5, 4.5]);
        assert!(d.is_non_degenerate());
        let v = check_rational_independence(&d, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL);
        assert!(v.is_dependent());
    }
}
