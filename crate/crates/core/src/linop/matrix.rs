//! Dense complex square matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default absolute tolerance for the structural predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// A dense, square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

/// Eigenvalues (ascending) and orthonormal eigenvectors (as columns) of a
/// Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Wraps an nalgebra matrix, rejecting non-square or non-finite input.
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// The matrix unit `|i><j|`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    /// The outer product `|a><b|`.
    pub fn outer(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Self {
        Self(a * b.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.0[(i, j)] = z;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Multiplies by the imaginary unit; maps Hermitian to anti-Hermitian.
    pub fn times_i(&self) -> Self {
        self.scale(Complex64::i())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.0
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        let sum = &self.0 + self.0.adjoint();
        sum.iter().all(|z| z.norm() <= tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = Self(self.0.adjoint() * &self.0);
        prod.max_abs_diff(&Self::identity(self.dim())) < tol
    }

    /// `(A + A^†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Spectral decomposition of a Hermitian matrix.
    pub fn hermitian_eigen(&self, tol: f64) -> Result<HermitianEigen> {
        if !self.is_hermitian(tol) {
            return Err(Error::NotHermitian {
                deviation: self.max_abs_diff(&self.adjoint()),
            });
        }
        let n = self.dim();
        if n == 0 {
            return Ok(HermitianEigen {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            });
        }
        let eig = SymmetricEigen::try_new(self.hermitian_part().0, EIG_EPS, EIG_MAX_ITER)
            .ok_or(Error::EigenDecomposition)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianEigen { values, vectors })
    }

    /// `exp(i t H)` for Hermitian `H`, computed from the spectral
    /// decomposition so the result is unitary to eigensolver accuracy.
    pub fn herm_exp(&self, t: f64) -> Result<Self> {
        self.herm_exp_tol(t, DEFAULT_TOL)
    }

    pub fn herm_exp_tol(&self, t: f64, tol: f64) -> Result<Self> {
        let eig = self.hermitian_eigen(tol)?;
        let phases: Vec<Complex64> = eig
            .values
            .iter()
            .map(|&x| Complex64::from_polar(1.0, t * x))
            .collect();
        Ok(Self::recompose(&eig.vectors, &phases))
    }

    /// `V diag(d) V^†`.
    pub fn recompose(vectors: &DMatrix<Complex64>, diag: &[Complex64]) -> Self {
        let mut scaled = vectors.clone();
        for (j, d) in diag.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= d;
            }
        }
        Self(scaled * vectors.adjoint())
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::identity(self.dim());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Conjugation `U^† self U` restricted to the columns of `basis`.
    pub fn compress(&self, basis: &DMatrix<Complex64>) -> Self {
        Self(basis.adjoint() * &self.0 * basis)
    }

    /// Embeds `self` (acting on the span of `basis`) back into the ambient space.
    pub fn expand(&self, basis: &DMatrix<Complex64>) -> Self {
        Self(basis * &self.0 * basis.adjoint())
    }

    /// Upper-left `n x n` block.
    pub fn truncate(&self, n: usize) -> Self {
        Self(self.0.view((0, 0), (n, n)).into_owned())
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.0 * v
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) {}", self.dim(), self.dim(), self.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

/// `AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    Ok(commutator_unchecked(a, b))
}

pub(crate) fn commutator_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(&a.0 * &b.0 - &b.0 * &a.0)
}

/// Hilbert-Schmidt inner product `tr(A^† B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    a.check_same_dim(b)?;
    Ok(a.0
        .iter()
        .zip(b.0.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `exp(i t H)`; see [`ComplexMatrix::herm_exp`].
pub fn herm_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    h.herm_exp(t)
}

/// Pauli matrices `sigma_1, sigma_2, sigma_3`.
pub fn pauli(index: usize) -> ComplexMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let rows = match index {
        1 => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        2 => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
        3 => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        _ => panic!("pauli index must be 1, 2 or 3"),
    };
    ComplexMatrix::from_fn(2, |i, j| rows[i][j])
}
