//! Tree search with pruning.
//!
//! The search explores supports of size K layer by layer. A path at layer i
//! holds the i indices chosen so far (the causal set, drawn from the
//! pre-selected branching set Theta). Because the residual norm of a partial
//! support only decreases as indices are added, a partial cost cannot be
//! pruned against a full-depth incumbent directly; each path is therefore
//! temporarily completed to depth K with the K-i columns of the full column
//! universe most correlated with the path residual (the noncausal set), and
//! the completed candidate's residual norm is compared against the pruning
//! threshold. The threshold starts large and is tightened at each layer to
//! the smallest candidate residual norm seen so far, so the final incumbent
//! is the minimum-residual candidate ever evaluated.
//!
//! Within a layer the threshold is fixed: every evaluation in layer i is
//! pruned against the threshold produced by layer i-1, while the tightened
//! value only takes effect in layer i+1. Survivors are processed in
//! insertion order and branch indices in ascending order, which makes
//! duplicate skipping and tie-breaking deterministic.

use std::collections::HashSet;

use crate::linalg::{dot, norm2, residual, top_k_by_magnitude, DenseMatrix, SupportSet};
use crate::recovery::greedy::{dense_estimate, preselect};
use crate::recovery::{PathEvaluation, RecoveryResult, SearchPath, SearchStats, TmpConfig};
use crate::{Error, Result};

/// Relative norm threshold below which a projected column is treated as
/// linearly dependent on the current basis and skipped. Skipping keeps the
/// projection semantics exact: a dependent column adds nothing to the span.
const DEPENDENT_TOL: f64 = 1e-10;

const REORTH_THRESHOLD: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Completes a path to depth `k`: projects `y` away from the causal columns,
/// picks the `k - i` columns of the full universe (excluding the causal set)
/// with the largest residual correlation, and evaluates the resulting
/// candidate's residual norm from scratch.
pub fn noncausal_completion(
    phi: &DenseMatrix,
    y: &[f64],
    causal: &SearchPath,
    k: usize,
) -> Result<PathEvaluation> {
    if causal.len() > k {
        return Err(Error::InvalidArgument(format!(
            "causal set of size {} exceeds the target depth {k}",
            causal.len()
        )));
    }
    let causal_set = causal.canonical_key();
    let r = residual(phi, y, &causal_set)?;
    let complement = SupportSet::full(phi.cols()).difference(&causal_set);
    let pairs = crate::linalg::correlations(phi, &r, &complement)?;
    let noncausal = top_k_by_magnitude(&pairs, k - causal.len())?;
    let candidate = causal_set.union(&noncausal);
    let cand_r = residual(phi, y, &candidate)?;
    Ok(PathEvaluation {
        path: causal.clone(),
        noncausal,
        candidate,
        candidate_residual_norm: norm2(&cand_r),
    })
}

/// Tree-pruned matching pursuit: pre-selection followed by the pruned tree
/// search, returning the least-squares reconstruction on the best candidate.
pub fn tmp(phi: &DenseMatrix, y: &[f64], cfg: &TmpConfig) -> Result<RecoveryResult> {
    let pre = preselect(phi, y, cfg)?;
    tmp_with_theta(phi, y, cfg, &pre.theta)
}

/// Tree search over an externally supplied branching set. `tmp` is this with
/// the configured pre-selection; callers that already ran pre-selection (or
/// want `theta` to be the full universe) use this entry point directly.
pub fn tmp_with_theta(
    phi: &DenseMatrix,
    y: &[f64],
    cfg: &TmpConfig,
    theta: &SupportSet,
) -> Result<RecoveryResult> {
    cfg.validate(phi.rows(), phi.cols())?;
    if cfg.epsilon_init.is_nan() || cfg.epsilon_init < 0.0 {
        return Err(Error::InvalidArgument(
            "initial pruning threshold must be nonnegative".into(),
        ));
    }
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(
            "measurement length does not match matrix rows".into(),
        ));
    }
    if let Some(max) = theta.max_index() {
        if max >= phi.cols() {
            return Err(Error::DimensionMismatch(format!(
                "branching index {max} out of range for {} columns",
                phi.cols()
            )));
        }
    }
    if cfg.k == 0 {
        return Ok(RecoveryResult {
            support: SupportSet::empty(),
            x_hat: vec![0.0; phi.cols()],
            residual_norm: norm2(y),
            stats: Some(SearchStats {
                min_candidate_norm: norm2(y),
                ..SearchStats::default()
            }),
        });
    }
    if theta.len() < cfg.k {
        return Err(Error::EmptyPreselection {
            got: theta.len(),
            need: cfg.k,
        });
    }

    let mut search = TreeSearch::new(phi, y, cfg, theta);
    search.run();

    let (support, min_norm) = search
        .incumbent
        .take()
        .expect("at least one candidate is evaluated when |Theta| >= k >= 1");
    let (x_hat, residual_norm) = dense_estimate(phi, y, &support)?;
    search.stats.min_candidate_norm = min_norm;
    Ok(RecoveryResult {
        support,
        x_hat,
        residual_norm,
        stats: Some(search.stats),
    })
}

/// One surviving path.
struct Survivor {
    /// Causal indices in selection order.
    causal: Vec<u32>,
    /// Sorted causal indices; the canonical key.
    key: Vec<u32>,
    /// Residual norm of this path's completed candidate.
    candidate_norm: f64,
    /// Insertion counter within its layer, so processing order survives the
    /// branch cap.
    order: u32,
}

/// Mutable state of one search; holds the scratch buffers so the inner loop
/// allocates only for genuinely new keys and survivors.
struct TreeSearch<'a> {
    y: &'a [f64],
    cfg: &'a TmpConfig,
    theta: Vec<u32>,
    m: usize,
    n: usize,
    /// Column-major copy of the matrix for contiguous column access.
    cols: Vec<f64>,
    /// Orthonormal basis scratch: parent prefix, child column, completion.
    basis: Vec<f64>,
    basis_len: usize,
    /// Residual of the parent path currently being expanded.
    r_parent: Vec<f64>,
    /// Working residual for the child being evaluated.
    r_work: Vec<f64>,
    corr: Vec<f64>,
    gather: Vec<f64>,
    /// Selection buffer for the top-(K-i) pick, ordered by descending
    /// correlation then ascending index.
    picks: Vec<(f64, u32)>,
    seen: HashSet<Vec<u32>>,
    key_buf: Vec<u32>,
    incumbent: Option<(SupportSet, f64)>,
    epsilon: f64,
    stats: SearchStats,
}

impl<'a> TreeSearch<'a> {
    fn new(phi: &'a DenseMatrix, y: &'a [f64], cfg: &'a TmpConfig, theta: &SupportSet) -> Self {
        let (m, n) = (phi.rows(), phi.cols());
        Self {
            y,
            cfg,
            theta: theta.iter().map(|j| j as u32).collect(),
            m,
            n,
            cols: phi.to_column_major(),
            basis: vec![0.0; m * (cfg.k + 1)],
            basis_len: 0,
            r_parent: vec![0.0; m],
            r_work: vec![0.0; m],
            corr: vec![0.0; n],
            gather: vec![0.0; m],
            picks: Vec::with_capacity(cfg.k),
            seen: HashSet::new(),
            key_buf: Vec::with_capacity(cfg.k),
            incumbent: None,
            epsilon: cfg.epsilon_init,
            stats: SearchStats {
                min_candidate_norm: f64::INFINITY,
                ..SearchStats::default()
            },
        }
    }

    fn run(&mut self) {
        let k = self.cfg.k;
        let mut survivors = vec![Survivor {
            causal: Vec::new(),
            key: Vec::new(),
            candidate_norm: f64::INFINITY,
            order: 0,
        }];
        for layer in 1..=k {
            let mut next: Vec<Survivor> = Vec::new();
            let mut eps_next = self.epsilon;
            self.seen.clear();
            for parent in &survivors {
                self.rebuild_parent(&parent.causal);
                for ti in 0..self.theta.len() {
                    let j = self.theta[ti];
                    if parent.key.binary_search(&j).is_ok() {
                        continue;
                    }
                    // Canonical key of the child path.
                    self.key_buf.clear();
                    self.key_buf.extend_from_slice(&parent.key);
                    let pos = self.key_buf.partition_point(|&x| x < j);
                    self.key_buf.insert(pos, j);
                    if self.seen.contains(self.key_buf.as_slice()) {
                        self.stats.duplicates_skipped += 1;
                        continue;
                    }
                    self.seen.insert(self.key_buf.clone());

                    let (cand_norm, partial_norm) = self.evaluate_child(j, k - layer);
                    self.stats.expanded += 1;
                    if cand_norm < self.stats.min_candidate_norm {
                        self.stats.min_candidate_norm = cand_norm;
                        self.incumbent = Some((self.materialize_candidate(), cand_norm));
                    }
                    if cand_norm <= self.epsilon {
                        let mut causal = Vec::with_capacity(layer);
                        causal.extend_from_slice(&parent.causal);
                        causal.push(j);
                        next.push(Survivor {
                            causal,
                            key: self.key_buf.clone(),
                            candidate_norm: cand_norm,
                            order: next.len() as u32,
                        });
                        let cost = if variant_partial() { partial_norm } else { cand_norm };
                        if cost <= eps_next {
                            eps_next = cost;
                        }
                    } else {
                        self.stats.pruned += 1;
                    }
                }
            }
            if let Some(cap) = self.cfg.n_max {
                if next.len() > cap {
                    next.sort_by(|a, b| {
                        a.candidate_norm
                            .total_cmp(&b.candidate_norm)
                            .then_with(|| a.key.cmp(&b.key))
                    });
                    next.truncate(cap);
                    // Restore insertion order for the next layer.
                    next.sort_by_key(|s| s.order);
                }
            }
            self.epsilon = eps_next;
            self.stats.epsilon_trace.push(eps_next);
            self.stats.survivors_per_layer.push(next.len());
            if std::env::var_os("TMP_TRACE").is_some() {
                eprintln!(
                    "layer {layer}: survivors {} eps {:.4e} best {:.4e}",
                    next.len(),
                    eps_next,
                    self.stats.min_candidate_norm,
                );
            }
            if next.is_empty() {
                break; // incumbent from the last successful evaluation stands
            }
            survivors = next;
        }
    }

    /// Rebuilds the orthonormal basis and residual of a parent path.
    fn rebuild_parent(&mut self, causal: &[u32]) {
        self.basis_len = 0;
        self.r_parent.copy_from_slice(self.y);
        for &j in causal {
            self.push_column(j, SegSource::Parent);
        }
    }

    /// Evaluates the child `parent + j` completed with the `depth_remaining`
    /// strongest correlation indices; returns the candidate residual norm.
    /// The basis is rolled back to the parent prefix afterwards; `picks`
    /// holds the noncausal selection of this evaluation.
    fn evaluate_child(&mut self, j: u32, depth_remaining: usize) -> (f64, f64) {
        let checkpoint = self.basis_len;
        self.r_work.copy_from_slice(&self.r_parent);
        self.push_column(j, SegSource::Work);
        let partial_norm = norm2(&self.r_work);
        self.picks.clear();
        if depth_remaining > 0 {
            if self.cfg.iterative_completion {
                for _ in 0..depth_remaining {
                    self.correlate_work();
                    self.mask_causal();
                    for &(_, p) in &self.picks {
                        self.corr[p as usize] = f64::NEG_INFINITY;
                    }
                    let best = self.top_indices(1);
                    let (v, p) = best[0];
                    self.picks.push((v, p));
                    self.push_column(p, SegSource::Work);
                }
            } else {
                self.correlate_work();
                self.mask_causal();
                let chosen = self.top_indices(depth_remaining);
                self.picks = chosen;
                for idx in 0..self.picks.len() {
                    let p = self.picks[idx].1;
                    self.push_column(p, SegSource::Work);
                }
            }
        }
        let cand_norm = norm2(&self.r_work);
        self.basis_len = checkpoint;
        (cand_norm, partial_norm)
    }

    /// `corr[j] = <phi_j, r_work>` for every column.
    fn correlate_work(&mut self) {
        for j in 0..self.n {
            let col = &self.cols[j * self.m..(j + 1) * self.m];
            self.corr[j] = dot(col, &self.r_work);
        }
    }

    /// Excludes the child causal set (current key buffer holds it) from the
    /// correlation ranking.
    fn mask_causal(&mut self) {
        for &c in &self.key_buf {
            self.corr[c as usize] = f64::NEG_INFINITY;
        }
    }

    /// The `take` indices with the largest `|corr|`, descending value with
    /// ascending index on ties. A strict comparison during the ascending
    /// scan realizes the smallest-index tie-break.
    fn top_indices(&self, take: usize) -> Vec<(f64, u32)> {
        let mut buf: Vec<(f64, u32)> = Vec::with_capacity(take + 1);
        for j in 0..self.n {
            let v = self.corr[j].abs();
            if self.corr[j] == f64::NEG_INFINITY {
                continue;
            }
            if buf.len() < take {
                let pos = buf.partition_point(|&(bv, _)| bv >= v);
                // partition_point puts equal values after existing ones,
                // preserving ascending index among ties.
                buf.insert(pos, (v, j as u32));
            } else if v > buf[take - 1].0 {
                buf.pop();
                let pos = buf.partition_point(|&(bv, _)| bv >= v);
                buf.insert(pos, (v, j as u32));
            }
        }
        buf
    }

    /// Support set of the candidate currently in the buffers: child key plus
    /// the picked completion.
    fn materialize_candidate(&self) -> SupportSet {
        let mut v: Vec<usize> = self.key_buf.iter().map(|&x| x as usize).collect();
        v.extend(self.picks.iter().map(|&(_, p)| p as usize));
        SupportSet::from_unsorted(v).expect("candidate indices are unique")
    }

    /// Orthonormalizes cached column `j` against the basis prefix and, if
    /// independent, appends it and removes its component from the selected
    /// residual.
    fn push_column(&mut self, j: u32, target: SegSource) {
        let m = self.m;
        let col = &self.cols[j as usize * m..(j as usize + 1) * m];
        self.gather.copy_from_slice(col);
        let orig = norm2(&self.gather);
        if orig == 0.0 {
            return;
        }
        let mut nrm = project_pass(&self.basis[..self.basis_len * m], m, &mut self.gather);
        if nrm < REORTH_THRESHOLD * orig {
            nrm = project_pass(&self.basis[..self.basis_len * m], m, &mut self.gather);
        }
        if nrm <= DEPENDENT_TOL * orig {
            return;
        }
        let inv = 1.0 / nrm;
        for g in &mut self.gather {
            *g *= inv;
        }
        let off = self.basis_len * m;
        self.basis[off..off + m].copy_from_slice(&self.gather);
        self.basis_len += 1;
        let u = &self.basis[off..off + m];
        let r = match target {
            SegSource::Parent => &mut self.r_parent,
            SegSource::Work => &mut self.r_work,
        };
        let c = dot(u, r);
        for (ri, ui) in r.iter_mut().zip(u) {
            *ri -= c * ui;
        }
    }
}

#[derive(Clone, Copy)]
enum SegSource {
    Parent,
    Work,
}

// Temporary experiment toggle while calibrating the threshold semantics.
fn variant_partial() -> bool {
    std::env::var_os("TMP_VARIANT_PARTIAL").is_some()
}

/// One Gram-Schmidt pass of `work` against the columns packed in `basis`;
/// returns the remaining norm.
fn project_pass(basis: &[f64], m: usize, work: &mut [f64]) -> f64 {
    for u in basis.chunks_exact(m) {
        let c = dot(u, work);
        for (w, ui) in work.iter_mut().zip(u) {
            *w -= c * ui;
        }
    }
    norm2(work)
}
