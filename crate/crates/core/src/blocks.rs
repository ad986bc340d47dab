//! Commutants, centers and the block decomposition of the *-algebra generated
//! by a set of matrices, with Lie closures restricted to each block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{lie_closure_labeled, ClosureOptions};
use crate::linop::{ComplexMatrix, ControlSystem};

/// Singular values below `KERNEL_TOL * max(1, sigma_max)` span the kernel.
pub const KERNEL_TOL: f64 = 1e-9;
/// Draws of the random central element before giving up.
pub const MAX_CENTRAL_ATTEMPTS: usize = 8;
/// Relative eigenvalue gap separating central blocks.
const CENTRAL_GAP: f64 = 1e-6;

fn vec_of(m: &ComplexMatrix) -> DVector<Complex64> {
    DVector::from_iterator(m.dim() * m.dim(), m.as_dmatrix().iter().copied())
}

fn unvec(v: &DVector<Complex64>, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| v[i + j * n])
}

fn check_dims(generators: &[ComplexMatrix]) -> Result<usize> {
    let n = generators.first().ok_or(Error::EmptyInput)?.dim();
    for g in generators {
        if g.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
    }
    Ok(n)
}

/// HS-orthonormal basis of `{X : XG = GX, XG* = G*X for every generator G}`.
pub fn commutant_basis(generators: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let n = check_dims(generators)?;
    let nn = n * n;
    let mut all: Vec<ComplexMatrix> = Vec::with_capacity(2 * generators.len());
    for g in generators {
        all.push(g.clone());
        if !g.is_hermitian(0.0) {
            all.push(g.adjoint());
        }
    }
    // vec(XG - GX) = (G^T ⊗ 1 - 1 ⊗ G) vec(X), column-major
    let mut stacked = DMatrix::<Complex64>::zeros(all.len() * nn, nn);
    let id = DMatrix::<Complex64>::identity(n, n);
    for (k, g) in all.iter().enumerate() {
        let gm = g.as_dmatrix();
        let block = gm.transpose().kronecker(&id) - id.kronecker(gm);
        stacked.view_mut((k * nn, 0), (nn, nn)).copy_from(&block);
    }
    Ok(kernel(stacked)?.iter().map(|v| unvec(v, n)).collect())
}

/// Orthonormal kernel vectors of a matrix with at least as many rows as columns.
fn kernel(a: DMatrix<Complex64>) -> Result<Vec<DVector<Complex64>>> {
    let cols = a.ncols();
    let a = if a.nrows() < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(&a);
        padded
    } else {
        a
    };
    let svd = a.try_svd(false, true, 1e-15, 10_000).ok_or(Error::EigenDecomposition)?;
    let v_t = svd.v_t.ok_or(Error::EigenDecomposition)?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = KERNEL_TOL * smax.max(1.0);
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= thr)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect())
}

/// Dimension of the complex span of a set of matrices.
pub fn span_dim(elements: &[ComplexMatrix]) -> usize {
    if elements.is_empty() {
        return 0;
    }
    let cols: Vec<_> = elements.iter().map(vec_of).collect();
    let m = DMatrix::from_columns(&cols);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values.iter().filter(|s| **s > KERNEL_TOL * smax.max(1.0)).count()
}

/// Basis of the center: the commutant of the generators together with their commutant.
pub fn center_basis(generators: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let mut all = generators.to_vec();
    all.extend(commutant_basis(generators)?);
    commutant_basis(&all)
}

#[derive(Clone, Debug, Serialize)]
pub struct Block {
    /// Smallest working-basis index on which the central projection is nonzero.
    pub least_index: usize,
    /// `h_k * m_k`.
    pub dim: usize,
    pub block_dim: usize,
    pub multiplicity: usize,
    #[serde(skip)]
    pub basis: DMatrix<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    #[serde(skip)]
    pub central_projections: Vec<ComplexMatrix>,
    pub commutant_dim: usize,
    pub center_dim: usize,
    pub seed: u64,
    pub attempts: usize,
}

impl BlockDecomposition {
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    /// Block bases side by side; unitary when the decomposition is complete.
    pub fn assembled_basis(&self) -> DMatrix<Complex64> {
        let cols: Vec<_> = self.blocks.iter().flat_map(|b| b.basis.column_iter()).collect();
        DMatrix::from_columns(&cols)
    }

    /// Largest entry of `U* G U` outside the diagonal blocks.
    pub fn off_block_residual(&self, g: &ComplexMatrix) -> f64 {
        let u = self.assembled_basis();
        let c = u.adjoint() * g.as_dmatrix() * &u;
        let mut owner = Vec::with_capacity(c.nrows());
        for (k, b) in self.blocks.iter().enumerate() {
            owner.extend(std::iter::repeat_n(k, b.dim));
        }
        let mut worst: f64 = 0.0;
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                if owner[i] != owner[j] {
                    worst = worst.max(c[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Minimal central projections from a random Hermitian element of the center,
/// then block multiplicities from the commutant restricted to each block.
pub fn block_decompose(generators: &[ComplexMatrix], seed: u64) -> Result<BlockDecomposition> {
    let n = check_dims(generators)?;
    let commutant = commutant_basis(generators)?;
    let mut all = generators.to_vec();
    all.extend(commutant.iter().cloned());
    let center = commutant_basis(&all)?;
    let hermitian: Vec<ComplexMatrix> = center
        .iter()
        .flat_map(|c| {
            let h1 = c.hermitian_part();
            let h2 = (c - &c.adjoint()).scale(Complex64::new(0.0, 0.5));
            [h1, h2]
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_CENTRAL_ATTEMPTS {
        let mut z = ComplexMatrix::zeros(n);
        for h in &hermitian {
            let c: f64 = StandardNormal.sample(&mut rng);
            z = &z + &h.scale_real(c);
        }
        let eig = z.hermitian_eigen(1e-15)?;
        let scale = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..eig.values.len() {
            match groups.last_mut() {
                Some(g) if eig.values[i] - eig.values[*g.last().unwrap()] <= CENTRAL_GAP * scale => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        if groups.len() != center.len() {
            continue;
        }
        let mut blocks: Vec<(Block, ComplexMatrix)> = groups
            .iter()
            .map(|g| {
                let cols: Vec<_> = g.iter().map(|&i| eig.vectors.column(i).into_owned()).collect();
                let basis = DMatrix::from_columns(&cols);
                let p = ComplexMatrix::from_dmatrix(&basis * basis.adjoint()).expect("finite");
                let least_index = (0..n).find(|&i| p.get(i, i).re > 1e-6).unwrap_or(n);
                let restricted: Vec<ComplexMatrix> = commutant.iter().map(|x| x.compress(&basis)).collect();
                let rdim = span_dim(&restricted);
                let multiplicity = ((rdim as f64).sqrt().round() as usize).max(1);
                let dim = g.len();
                let block = Block {
                    least_index,
                    dim,
                    block_dim: dim / multiplicity,
                    multiplicity,
                    basis,
                };
                (block, p)
            })
            .collect();
        blocks.sort_by_key(|(b, _)| b.least_index);
        let (blocks, central_projections) = blocks.into_iter().unzip();
        return Ok(BlockDecomposition {
            blocks,
            central_projections,
            commutant_dim: commutant.len(),
            center_dim: center.len(),
            seed,
            attempts: attempt,
        });
    }
    Err(Error::RandomElementDegenerate {
        attempts: MAX_CENTRAL_ATTEMPTS,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockClosure {
    pub least_index: usize,
    pub dim: usize,
    pub multiplicity: usize,
    /// Closure of the restricted generators.
    pub closure_dim: usize,
    /// Closure of their traceless parts.
    pub traceless_dim: usize,
    /// `h^2 - 1`.
    pub su_dim: usize,
    /// `h^2`.
    pub u_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    /// 0 is the drift, `l` is control `H_l`.
    pub algebra_generators: Vec<usize>,
    pub decomposition: BlockDecomposition,
    pub blocks: Vec<BlockClosure>,
    /// Closure of the block algebras embedded in the full space together with
    /// the remaining controls.
    pub combined_dim: usize,
    /// Closure of `i H_l` for the chosen and the remaining Hamiltonians.
    pub direct_dim: usize,
    pub ambient_dim: usize,
    pub max_off_block_residual: f64,
}

fn hamiltonian(system: &ControlSystem, index: usize) -> Result<&ComplexMatrix> {
    if index == 0 {
        Ok(system.drift_matrix())
    } else {
        system.controls().get(index - 1).ok_or(Error::IndexOutOfRange {
            index,
            len: system.num_controls() + 1,
        })
    }
}

fn label(index: usize) -> String {
    format!("H{index}")
}

/// Block decomposition of the algebra generated by the chosen Hamiltonians
/// (`0` = drift) and Lie closures of their restrictions to each block.
pub fn block_lie_closure(
    system: &ControlSystem,
    algebra_generators: &[usize],
    opts: ClosureOptions,
    seed: u64,
) -> Result<BlockReport> {
    let n = system.dim();
    let chosen: Vec<ComplexMatrix> = algebra_generators
        .iter()
        .map(|&i| hamiltonian(system, i).cloned())
        .collect::<Result<_>>()?;
    let decomposition = block_decompose(&chosen, seed)?;
    let max_off_block_residual = chosen
        .iter()
        .map(|g| decomposition.off_block_residual(g))
        .fold(0.0, f64::max);

    let per_block: Vec<(BlockClosure, Vec<ComplexMatrix>)> = decomposition
        .blocks
        .par_iter()
        .map(|b| {
            let restricted: Vec<ComplexMatrix> = chosen.iter().map(|g| g.compress(&b.basis).times_i()).collect();
            let labels: Vec<String> = algebra_generators.iter().map(|&i| label(i)).collect();
            let basis = lie_closure_labeled(&restricted, labels.clone(), opts)?;
            let traceless: Vec<ComplexMatrix> = restricted
                .iter()
                .map(|x| {
                    let shift = x.trace() / b.dim as f64;
                    x - &ComplexMatrix::identity(b.dim).scale(shift)
                })
                .collect();
            let su = lie_closure_labeled(&traceless, labels, opts)?;
            let h = b.block_dim;
            let embedded = basis.elements.iter().map(|e| e.expand(&b.basis)).collect();
            Ok((
                BlockClosure {
                    least_index: b.least_index,
                    dim: b.dim,
                    multiplicity: b.multiplicity,
                    closure_dim: basis.dim(),
                    traceless_dim: su.dim(),
                    su_dim: h * h - 1,
                    u_dim: h * h,
                },
                embedded,
            ))
        })
        .collect::<Result<_>>()?;

    let remaining: Vec<usize> = (0..=system.num_controls())
        .filter(|i| !algebra_generators.contains(i))
        .collect();
    let mut combined = Vec::new();
    let mut combined_labels = Vec::new();
    for (k, (_, embedded)) in per_block.iter().enumerate() {
        for (j, e) in embedded.iter().enumerate() {
            combined.push(e.clone());
            combined_labels.push(format!("B{}.{}", k + 1, j + 1));
        }
    }
    let mut direct = Vec::new();
    let mut direct_labels = Vec::new();
    for &i in algebra_generators.iter().chain(&remaining) {
        direct.push(hamiltonian(system, i)?.times_i());
        direct_labels.push(label(i));
    }
    for &i in &remaining {
        combined.push(hamiltonian(system, i)?.times_i());
        combined_labels.push(label(i));
    }
    let combined_dim = lie_closure_labeled(&combined, combined_labels, opts)?.dim();
    let direct_dim = lie_closure_labeled(&direct, direct_labels, opts)?.dim();

    Ok(BlockReport {
        algebra_generators: algebra_generators.to_vec(),
        decomposition,
        blocks: per_block.into_iter().map(|(b, _)| b).collect(),
        combined_dim,
        direct_dim,
        ambient_dim: n * n,
        max_off_block_residual,
    })
}
