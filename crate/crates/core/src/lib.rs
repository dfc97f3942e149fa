//! Sparse signal recovery toolkit built around a tree-pruned matching pursuit.
//!
//! The crate is organised in four layers:
//!
//! - [`linalg`]: dense matrix/vector primitives and the least-squares,
//!   projection and correlation kernels shared by every algorithm.
//! - [`signals`]: seeded generation of Gaussian sensing matrices, sparse
//!   ground truths and noise at an exact target SNR, plus the evaluation
//!   metrics (exact recovery ratio, MSE).
//! - [`recovery`]: the recovery algorithms — orthogonal matching pursuit and
//!   its multi-index variant, CoSaMP, the oracle estimator, an exhaustive
//!   minimum-residual search for tiny instances, and the tree search with
//!   pruning that is the point of this crate.
//! - [`analysis`]: brute-forced restricted isometry constants on small
//!   matrices and numerical verification of the correlation bounds and
//!   recovery conditions that govern when the tree search succeeds.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; all column indices are 0-based.

pub mod analysis;
pub mod basis;
pub(crate) mod combin;
pub mod linalg;
pub mod recovery;
pub mod signals;

pub use linalg::{DenseMatrix, SupportSet};

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank-deficient submatrix: condition estimate {cond:.3e} exceeds {limit:.0e}")]
    RankDeficient { cond: f64, limit: f64 },
    #[error("requested top {requested} of {available} candidates")]
    InsufficientCandidates { requested: usize, available: usize },
    #[error("measurement of the signal is zero; SNR target undefined")]
    ZeroSignal,
    #[error("empty trial batch")]
    EmptyBatch,
    #[error("pre-selection produced {got} indices but sparsity {need} requires at least {need}")]
    EmptyPreselection { got: usize, need: usize },
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("RIC table has no order-{0} constant")]
    MissingRicOrder(usize),
    #[error("causal set is not a subset of the true support")]
    CausalNotTrue,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
