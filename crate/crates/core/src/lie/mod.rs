//! Lie closures of sets of matrices at finite truncation, the rank condition
//! and constructive bracket certificates.
//!
//! Anti-Hermitian matrices are mapped to real coordinates in which the
//! Hilbert-Schmidt inner product is the Euclidean one, so the real span of a
//! set of generators is tracked by ordinary Gram-Schmidt.

mod certificate;
mod larc;

pub use certificate::{
    certificates_to_text, check_thm2_hypotheses, double_bracket, thm2_certificate, BracketCertificate, DoubleBracket, Expr, GeneratorRef,
    Thm2Hypotheses, Thm2Options, CERTIFICATE_TOL,
};
pub use larc::{larc_check, truncate_generators, LarcReport, LarcVerdict, TruncationResult};

use nalgebra::{ComplexField, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linop::{commutator_unchecked, ComplexMatrix, DEFAULT_TOL};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_PASSES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosureOptions {
    pub rank_tol: f64,
    pub max_passes: usize,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

/// Where a basis element came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Generator with this index.
    Generator(usize),
    /// Bracket of two earlier basis elements, minus its projection on the span.
    Bracket(usize, usize),
}

/// HS-orthonormal basis of a Lie algebra of anti-Hermitian matrices.
#[derive(Clone, Debug)]
pub struct LieBasis {
    pub dim_ambient: usize,
    pub elements: Vec<ComplexMatrix>,
    pub provenance: Vec<Provenance>,
    pub labels: Vec<String>,
    pub rank_tol: f64,
    pub passes: usize,
    /// False when `max_passes` was hit before the span stopped growing.
    pub converged: bool,
    /// Basis size after the generators and after each pass.
    pub pass_dims: Vec<usize>,
}

impl LieBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// `n^2`, the real dimension of `u(n)`.
    pub fn full_dim(&self) -> usize {
        self.dim_ambient * self.dim_ambient
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.full_dim()
    }

    /// Bracket word over the generator labels, e.g. `[g1,[g1,g2]]`.
    pub fn word(&self, k: usize) -> String {
        match self.provenance[k] {
            Provenance::Generator(g) => self.labels[g].clone(),
            Provenance::Bracket(a, b) => format!("[{},{}]", self.word(a), self.word(b)),
        }
    }

    /// Largest HS norm of the part of `[b_i, b_j]` orthogonal to the span.
    pub fn closure_defect(&self) -> f64 {
        let span = Span {
            vectors: self.elements.iter().map(real_coords).collect(),
        };
        let m = self.dim();
        (0..m)
            .into_par_iter()
            .map(|i| {
                (0..i)
                    .map(|j| {
                        let c = commutator_unchecked(&self.elements[i], &self.elements[j]);
                        span.residual(real_coords(&c)).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Whether `x` lies in the real span within `rank_tol` (relative to its norm).
    pub fn contains(&self, x: &ComplexMatrix) -> bool {
        let span = Span {
            vectors: self.elements.iter().map(real_coords).collect(),
        };
        let v = real_coords(x);
        let norm = v.norm();
        span.residual(v).norm() <= self.rank_tol * norm.max(1.0)
    }
}

/// Real coordinates of an anti-Hermitian matrix: `Im a_kk` on the diagonal,
/// then `sqrt(2) Re a_ij`, `sqrt(2) Im a_ij` for `i < j`.
pub fn real_coords(a: &ComplexMatrix) -> DVector<f64> {
    let n = a.dim();
    let mut v = Vec::with_capacity(n * n);
    for k in 0..n {
        v.push(a.get(k, k).im);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            let z = a.get(i, j);
            v.push(s * z.re);
            v.push(s * z.im);
        }
    }
    DVector::from_vec(v)
}

/// Inverse of [`real_coords`].
pub fn from_real_coords(v: &DVector<f64>, n: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(n);
    for k in 0..n {
        a.set(k, k, Complex64::new(0.0, v[k]));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(s * v[idx], s * v[idx + 1]);
            a.set(i, j, z);
            a.set(j, i, -z.conj());
            idx += 2;
        }
    }
    a
}

fn complex_coords(a: &ComplexMatrix) -> DVector<Complex64> {
    DVector::from_iterator(a.dim() * a.dim(), a.as_dmatrix().iter().copied())
}

fn from_complex_coords(v: &DVector<Complex64>, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| v[i + j * n])
}

struct Span<T: ComplexField<RealField = f64>> {
    vectors: Vec<DVector<T>>,
}

impl<T: ComplexField<RealField = f64> + Copy> Span<T> {
    /// Two rounds of modified Gram-Schmidt against the stored orthonormal vectors.
    fn residual(&self, mut v: DVector<T>) -> DVector<T> {
        for _ in 0..2 {
            for b in &self.vectors {
                let c = b.dotc(&v);
                v.axpy(-c, b, T::one());
            }
        }
        v
    }
}

struct Engine<T: ComplexField<RealField = f64>> {
    n: usize,
    span: Span<T>,
    elements: Vec<ComplexMatrix>,
    provenance: Vec<Provenance>,
    embed: fn(&ComplexMatrix) -> DVector<T>,
    unembed: fn(&DVector<T>, usize) -> ComplexMatrix,
}

impl<T: ComplexField<RealField = f64> + Copy> Engine<T> {
    fn full(&self) -> bool {
        self.elements.len() >= self.n * self.n
    }

    /// Adjoins the normalized residual of `v` if its norm exceeds `floor`.
    fn adjoin(&mut self, v: DVector<T>, floor: f64, from: Provenance) -> bool {
        if self.full() {
            return false;
        }
        let r = self.span.residual(v);
        let norm = r.norm();
        if !(norm > floor) {
            return false;
        }
        let u = r.unscale(norm);
        self.elements.push((self.unembed)(&u, self.n));
        self.span.vectors.push(u);
        self.provenance.push(from);
        true
    }

    fn run(&mut self, generators: &[ComplexMatrix], opts: ClosureOptions) -> (usize, bool, Vec<usize>) {
        for (g, x) in generators.iter().enumerate() {
            let v = (self.embed)(x);
            let floor = opts.rank_tol * v.norm();
            self.adjoin(v, floor, Provenance::Generator(g));
        }
        let mut pass_dims = vec![self.elements.len()];
        let mut frontier = 0;
        let mut passes = 0;
        loop {
            if self.full() {
                return (passes, true, pass_dims);
            }
            if passes == opts.max_passes {
                return (passes, false, pass_dims);
            }
            passes += 1;
            let start = self.elements.len();
            let pairs: Vec<(usize, usize)> = (frontier..start).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
            let brackets: Vec<DVector<T>> = pairs
                .par_iter()
                .map(|&(i, j)| (self.embed)(&commutator_unchecked(&self.elements[i], &self.elements[j])))
                .collect();
            for ((i, j), v) in pairs.into_iter().zip(brackets) {
                // basis elements have unit norm, so the floor is absolute
                self.adjoin(v, opts.rank_tol, Provenance::Bracket(i, j));
                if self.full() {
                    break;
                }
            }
            pass_dims.push(self.elements.len());
            if self.elements.len() == start {
                return (passes, true, pass_dims);
            }
            frontier = start;
        }
    }
}

fn check_generators(generators: &[ComplexMatrix], anti_hermitian: bool) -> Result<usize> {
    let first = generators.first().ok_or(Error::EmptyInput)?;
    let n = first.dim();
    for (index, g) in generators.iter().enumerate() {
        if g.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
        if anti_hermitian && !g.is_anti_hermitian(DEFAULT_TOL * g.max_abs().max(1.0)) {
            return Err(Error::NotAntiHermitian { index });
        }
    }
    Ok(n)
}

/// Real Lie closure of anti-Hermitian generators labelled `g1, g2, ...`.
pub fn lie_closure(generators: &[ComplexMatrix], rank_tol: f64, max_passes: usize) -> Result<LieBasis> {
    let labels = (1..=generators.len()).map(|k| format!("g{k}")).collect();
    lie_closure_labeled(generators, labels, ClosureOptions { rank_tol, max_passes })
}

pub fn lie_closure_labeled(generators: &[ComplexMatrix], labels: Vec<String>, opts: ClosureOptions) -> Result<LieBasis> {
    let n = check_generators(generators, true)?;
    if labels.len() != generators.len() {
        return Err(Error::DimensionMismatch {
            expected: generators.len(),
            found: labels.len(),
        });
    }
    let mut engine = Engine::<f64> {
        n,
        span: Span { vectors: Vec::new() },
        elements: Vec::new(),
        provenance: Vec::new(),
        embed: real_coords,
        unembed: from_real_coords,
    };
    let (passes, converged, pass_dims) = engine.run(generators, opts);
    Ok(LieBasis {
        dim_ambient: n,
        elements: engine.elements,
        provenance: engine.provenance,
        labels,
        rank_tol: opts.rank_tol,
        passes,
        converged,
        pass_dims,
    })
}

/// Complex dimension of the complex Lie algebra generated by arbitrary square
/// matrices, and whether the closure converged.
pub fn complex_closure_dim(generators: &[ComplexMatrix], opts: ClosureOptions) -> Result<(usize, bool)> {
    let n = check_generators(generators, false)?;
    let mut engine = Engine::<Complex64> {
        n,
        span: Span { vectors: Vec::new() },
        elements: Vec::new(),
        provenance: Vec::new(),
        embed: complex_coords,
        unembed: from_complex_coords,
    };
    let (_, converged, _) = engine.run(generators, opts);
    Ok((engine.elements.len(), converged))
}
