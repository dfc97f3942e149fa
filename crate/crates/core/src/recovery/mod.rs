//! Sparse recovery algorithms: orthogonal matching pursuit and its
//! multi-index variant, CoSaMP, the oracle estimator, an exhaustive
//! minimum-residual search for tiny instances, and the pruned tree search.

mod exhaustive;
mod greedy;
mod tree;

pub use exhaustive::exhaustive_l0;
pub use greedy::{cosamp, cosamp_with, gomp, omp, oracle_estimator, preselect};
pub use tree::{noncausal_completion, tmp, tmp_with_theta};

use crate::linalg::SupportSet;
use crate::{Error, Result};

/// Default CoSaMP iteration cap.
pub const COSAMP_MAX_ITERATIONS: usize = 40;

/// How the branching set is chosen before the tree search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preselection {
    /// Multi-index matching pursuit picking `l` columns per iteration.
    Gomp { l: usize },
    /// Plain matching pursuit run for `preselection_size` iterations.
    OmpExtended,
    /// No pre-selection: branch over every column. Only sensible for tiny
    /// instances; used by the exhaustive-agreement checks.
    FullUniverse,
}

/// Outcome of the pre-selection stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreselectionResult {
    /// The branching set Theta (sorted).
    pub theta: SupportSet,
    /// Selection width per iteration (1 for plain matching pursuit, 0 when
    /// the full universe is used).
    pub l: usize,
    pub method: Preselection,
}

/// Configuration of the tree search.
#[derive(Debug, Clone, PartialEq)]
pub struct TmpConfig {
    /// Target sparsity K; the tree depth.
    pub k: usize,
    /// Initial pruning threshold. Infinite by default, which guarantees the
    /// first fully evaluated candidate survives.
    pub epsilon_init: f64,
    /// Cap on surviving paths per layer; `None` means unlimited.
    pub n_max: Option<usize>,
    pub preselection: Preselection,
    /// Target size of the branching set (default `2k`).
    pub preselection_size: usize,
    /// Complete paths one index at a time (refitting the residual after each
    /// pick) instead of a single top-(K-i) selection. Off by default.
    pub iterative_completion: bool,
}

impl TmpConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            epsilon_init: f64::INFINITY,
            n_max: None,
            preselection: Preselection::Gomp { l: 2 },
            preselection_size: 2 * k,
            iterative_completion: false,
        }
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = Some(n_max);
        self
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.k > m {
            return Err(Error::DimensionMismatch(format!(
                "sparsity {} exceeds {} measurements",
                self.k, m
            )));
        }
        if self.preselection_size < self.k {
            return Err(Error::InvalidArgument(format!(
                "preselection size {} is below the sparsity {}",
                self.preselection_size, self.k
            )));
        }
        if self.preselection_size > n {
            return Err(Error::InvalidArgument(format!(
                "preselection size {} exceeds {} columns",
                self.preselection_size, n
            )));
        }
        if self.n_max == Some(0) {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        if let Preselection::Gomp { l } = self.preselection {
            if l == 0 {
                return Err(Error::InvalidArgument("selection width l must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// An ordered path through the search tree (the causal set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPath {
    causal: Vec<usize>,
}

impl SearchPath {
    pub fn empty() -> Self {
        Self { causal: Vec::new() }
    }

    /// Builds a path from indices in selection order; duplicates are an error.
    pub fn from_indices(causal: Vec<usize>) -> Result<Self> {
        let mut sorted = causal.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("path contains a duplicate index".into()));
        }
        Ok(Self { causal })
    }

    pub fn indices(&self) -> &[usize] {
        &self.causal
    }

    pub fn len(&self) -> usize {
        self.causal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.causal.is_empty()
    }

    /// Order-insensitive identity of the path.
    pub fn canonical_key(&self) -> SupportSet {
        SupportSet::from_unsorted(self.causal.clone()).expect("path indices are unique")
    }
}

/// A path completed to full depth for the pruning decision.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEvaluation {
    pub path: SearchPath,
    /// Indices appended to reach depth K (disjoint from the causal set).
    pub noncausal: SupportSet,
    /// `causal ∪ noncausal`, the full-size support hypothesis.
    pub candidate: SupportSet,
    /// `||y - Phi_candidate (least-squares fit)||_2`.
    pub candidate_residual_norm: f64,
}

/// Counters and traces collected during one tree search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    /// Fully evaluated candidates (duplicates excluded).
    pub expanded: usize,
    /// Evaluated candidates rejected by the pruning threshold.
    pub pruned: usize,
    /// Child paths skipped because their canonical key was already seen in
    /// the layer.
    pub duplicates_skipped: usize,
    /// Smallest candidate residual norm observed over the whole search.
    pub min_candidate_norm: f64,
    /// Pruning threshold after each layer.
    pub epsilon_trace: Vec<f64>,
    /// Surviving paths after each layer (post-cap).
    pub survivors_per_layer: Vec<usize>,
}

/// Result of a recovery algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub support: SupportSet,
    /// Dense length-`n` estimate; zero off the support.
    pub x_hat: Vec<f64>,
    /// `||y - Phi x_hat||_2`.
    pub residual_norm: f64,
    /// Search counters; present only for the tree search.
    pub stats: Option<SearchStats>,
}
