use thiserror::Error;

use crate::torus::KroneckerCertificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("generator {index} is not anti-Hermitian")]
    NotAntiHermitian { index: usize },

    #[error("Hermitian eigendecomposition did not converge")]
    EigenDecomposition,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("search horizon exhausted; best max residual {:e}", .best.max_residual)]
    HorizonExhausted { best: Box<KroneckerCertificate> },

    #[error("direct verification failed: achieved {achieved:e}, bound {bound:e}")]
    VerificationFailed { achieved: f64, bound: f64 },

    #[error("eigenvalues are rationally dependent (witness {witness:?})")]
    IndependenceViolated { witness: Vec<i64> },

    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),

    #[error("no path between vertices {from} and {to}")]
    PathNotFound { from: usize, to: usize },

    #[error("projections must be orthogonal rank-1 projections")]
    InvalidProjections,

    #[error("central element degenerate after {attempts} attempts")]
    RandomElementDegenerate { attempts: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
