//! Pure point spectrum of the drift Hamiltonian: eigenvalues, multiplicities,
//! eigenprojections, and rational-independence verdicts.

mod exact;
mod relation;

pub use exact::{parse_rational, ExactValue, Symbol};
pub use relation::{
    check_rational_independence, exhaustive_relation_search, pslq_relation_search, IndependenceStatus,
    IndependenceVerdict, RelationMethod, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::{ComplexMatrix, DEFAULT_TOL};

/// Relative gap below which eigenvalues are considered degenerate.
pub const DEFAULT_RELATIVE_GAP: f64 = 1e-9;

/// Eigenvalues `x_k` (one per distinct eigenvalue at truncation) together with
/// their eigenspaces.
///
/// Each eigenspace is stored as an orthonormal set of columns; the projection
/// `F_k` is the Gram matrix of those columns.
#[derive(Clone, Debug)]
pub struct DriftSpectrum {
    dim: usize,
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    eigenvectors: Vec<DMatrix<Complex64>>,
    projections: Vec<ComplexMatrix>,
    members: Vec<Vec<usize>>,
    exact: Option<Vec<ExactValue>>,
}

impl DriftSpectrum {
    /// Clusters a raw list of eigenvalues of a diagonal drift. Raw value `i`
    /// belongs to the standard basis vector `e_i`.
    pub fn group_degenerate(raw: &[f64], gap_tol: f64) -> Result<Self> {
        let n = raw.len();
        Self::from_eigen(raw, &DMatrix::identity(n, n), gap_tol)
    }

    /// `group_degenerate` with the default relative gap.
    pub fn from_diagonal(raw: &[f64]) -> Result<Self> {
        Self::group_degenerate(raw, default_gap_tol(raw))
    }

    /// Clusters eigenpairs; column `i` of `vectors` is the eigenvector of `values[i]`.
    pub fn from_eigen(values: &[f64], vectors: &DMatrix<Complex64>, gap_tol: f64) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: vectors.ncols(),
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match clusters.last_mut() {
                Some(c) if values[i] - values[*c.last().unwrap()] < gap_tol => c.push(i),
                _ => clusters.push(vec![i]),
            }
        }

        let mut spectrum = Self {
            dim: n,
            eigenvalues: Vec::with_capacity(clusters.len()),
            multiplicities: Vec::with_capacity(clusters.len()),
            eigenvectors: Vec::with_capacity(clusters.len()),
            projections: Vec::with_capacity(clusters.len()),
            members: Vec::new(),
            exact: None,
        };
        for members in &clusters {
            let mean = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
            let cols = DMatrix::from_fn(n, members.len(), |r, c| vectors[(r, members[c])]);
            let proj = ComplexMatrix::from_dmatrix(&cols * cols.adjoint())?;
            spectrum.eigenvalues.push(mean);
            spectrum.multiplicities.push(members.len());
            spectrum.eigenvectors.push(cols);
            spectrum.projections.push(proj);
        }
        spectrum.members = clusters;
        Ok(spectrum)
    }

    /// Diagonalizes a Hermitian drift matrix and clusters its spectrum.
    pub fn from_hermitian(h: &ComplexMatrix, gap_tol: Option<f64>) -> Result<Self> {
        let eig = h.hermitian_eigen(DEFAULT_TOL.max(DEFAULT_TOL * h.max_abs()))?;
        let gap = gap_tol.unwrap_or_else(|| default_gap_tol(&eig.values));
        Self::from_eigen(&eig.values, &eig.vectors, gap)
    }

    /// Diagonal drift with exact tags, one per raw value.
    pub fn from_exact(values: &[ExactValue]) -> Result<Self> {
        let raw: Vec<f64> = values.iter().map(ExactValue::to_f64).collect();
        Self::from_diagonal(&raw)?.with_exact(values)
    }

    /// Attaches exact tags given per raw eigenvalue (same order as the raw
    /// list). Members of one cluster must carry identical tags, and each tag
    /// must agree numerically with its cluster value.
    pub fn with_exact(mut self, tags: &[ExactValue]) -> Result<Self> {
        if tags.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: tags.len(),
            });
        }
        let mut per_cluster = Vec::with_capacity(self.len());
        for (members, &x) in self.members.iter().zip(&self.eigenvalues) {
            let tag = &tags[members[0]];
            if members.iter().any(|&i| tags[i] != *tag) {
                return Err(Error::InvalidInput(format!(
                    "degenerate eigenvalue {x} carries inconsistent exact tags"
                )));
            }
            let value = tag.to_f64();
            if (value - x).abs() > 1e-9 * x.abs().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "exact tag {tag} evaluates to {value} but eigenvalue is {x}"
                )));
            }
            per_cluster.push(tag.clone());
        }
        self.exact = Some(per_cluster);
        Ok(self)
    }

    /// Raw indices (input order) grouped into the `k`-th cluster.
    pub fn cluster_members(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn is_non_degenerate(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    pub fn exact_values(&self) -> Option<&[ExactValue]> {
        self.exact.as_deref()
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    /// Orthonormal basis (columns) of the `k`-th eigenspace.
    pub fn eigenspace(&self, k: usize) -> Result<&DMatrix<Complex64>> {
        self.eigenvectors.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.len(),
        })
    }

    /// All eigenvectors as columns of one unitary, ordered by eigenvalue.
    pub fn eigenbasis(&self) -> DMatrix<Complex64> {
        let cols: Vec<_> = self.eigenvectors.iter().flat_map(|m| m.column_iter()).collect();
        DMatrix::from_columns(&cols)
    }

    /// Unit eigenvector of a non-degenerate eigenvalue.
    pub fn eigenvector(&self, k: usize) -> Result<DVector<Complex64>> {
        let space = self.eigenspace(k)?;
        Ok(space.column(0).into_owned())
    }

    /// `F_k`.
    pub fn eigenprojection(&self, k: usize) -> Result<&ComplexMatrix> {
        self.projections.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.len(),
        })
    }

    /// `sum_k x_k F_k`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.function(|x| Complex64::new(x, 0.0))
    }

    /// `sum_k f(x_k) F_k`.
    pub fn function(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (x, p) in self.eigenvalues.iter().zip(&self.projections) {
            acc = &acc + &p.scale(f(*x));
        }
        acc
    }

    /// `exp(i t H_0)` assembled from the spectral projections.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.function(|x| Complex64::from_polar(1.0, t * x))
    }

    /// `max_k ||F_k^2 - F_k||`, `max_{k != j} ||F_k F_j||` and `||sum F_k - 1||`
    /// (max-entry norms).
    pub fn projection_defects(&self) -> (f64, f64, f64) {
        let mut idem: f64 = 0.0;
        let mut ortho: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros(self.dim);
        for (k, p) in self.projections.iter().enumerate() {
            idem = idem.max((p * p).max_abs_diff(p));
            for q in &self.projections[k + 1..] {
                ortho = ortho.max((p * q).max_abs());
            }
            sum = &sum + p;
        }
        (idem, ortho, sum.max_abs_diff(&ComplexMatrix::identity(self.dim)))
    }
}

pub fn default_gap_tol(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    DEFAULT_RELATIVE_GAP * if scale > 0.0 { scale } else { 1.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distinct_values_make_singleton_clusters() {
        let s = DriftSpectrum::group_degenerate(&[1.0, 2.0, 3.0], 1e-9).unwrap();
        assert_eq!(s.multiplicities(), &[1, 1, 1]);
        assert_eq!(s.eigenvalues(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn close_values_merge() {
        let s = DriftSpectrum::group_degenerate(&[1.0, 1.0 + 1e-12, 2.0], 1e-9).unwrap();
        assert_eq!(s.multiplicities(), &[2, 1]);
        assert!((s.eigenvalues()[0] - (1.0 + 0.5e-12)).abs() < 1e-15);
        let f0 = s.eigenprojection(0).unwrap();
        assert!((f0.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unsorted_raw_values_keep_their_basis_vectors() {
        let s = DriftSpectrum::group_degenerate(&[3.0, 1.0, 2.0], 1e-9).unwrap();
        let f0 = s.eigenprojection(0).unwrap();
        assert_eq!(f0.get(1, 1).re, 1.0);
        assert!(s.reconstruct().max_abs_diff(&ComplexMatrix::diagonal(&[3.0, 1.0, 2.0])) < 1e-15);
    }

    #[test]
    fn diagonal_projections_are_matrix_units() {
        let s = DriftSpectrum::from_diagonal(&[0.5, 1.5, 2.5]).unwrap();
        for k in 0..3 {
            assert_eq!(s.eigenprojection(k).unwrap(), &ComplexMatrix::unit(3, k, k));
        }
        assert!(matches!(s.eigenprojection(3), Err(Error::IndexOutOfRange { .. })));
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        g.qr().q()
    }

    #[test]
    fn detects_double_eigenvalue_in_rotated_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unitary(5, &mut rng);
        let spectrum = [-1.0, 0.3, 0.3, 2.0, 4.5];
        let d = ComplexMatrix::diagonal(&spectrum);
        let h = d.expand(&u);
        let s = DriftSpectrum::from_hermitian(&h, None).unwrap();
        assert_eq!(s.multiplicities(), &[1, 2, 1, 1]);
        assert!(s.reconstruct().max_abs_diff(&h) < 1e-9);
        let (idem, ortho, resolution) = s.projection_defects();
        assert!(idem < 1e-9 && ortho < 1e-9 && resolution < 1e-9);
        let f1 = s.eigenprojection(1).unwrap();
        assert!((f1.trace().re - 2.0).abs() < 1e-9);
        assert!(f1.is_hermitian(1e-9));
    }

    #[test]
    fn rotated_projection_matches_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(3, &mut rng);
        let h = ComplexMatrix::diagonal(&[1.0, 2.0, 3.0]).expand(&u);
        let s = DriftSpectrum::from_hermitian(&h, None).unwrap();
        for k in 0..3 {
            let expected = ComplexMatrix::unit(3, k, k).expand(&u);
            assert!(s.eigenprojection(k).unwrap().max_abs_diff(&expected) < 1e-9);
        }
    }

    #[test]
    fn exact_tags_must_match_values() {
        let tags = [ExactValue::sqrt(2), ExactValue::sqrt(3)];
        let s = DriftSpectrum::from_exact(&tags).unwrap();
        assert_eq!(s.exact_values().unwrap()[1], ExactValue::sqrt(3));
        let s = DriftSpectrum::from_diagonal(&[1.0, 2.0]).unwrap();
        assert!(s.with_exact(&tags).is_err());
    }
}
