//! Greedy baselines: matching pursuit (single and multi-index selection),
//! CoSaMP, the oracle estimator, and the pre-selection stage they provide
//! for the tree search.

use crate::basis::OrthoBasis;
use crate::linalg::{
    least_squares_on_support, norm2, residual, top_k_by_magnitude, DenseMatrix, SupportSet,
};
use crate::recovery::{Preselection, PreselectionResult, RecoveryResult, TmpConfig};
use crate::{Error, Result};

/// Residuals below `RESIDUAL_STOP * ||y||` terminate greedy iterations; the
/// measurement is already explained and further picks would be tie-break
/// noise.
const RESIDUAL_STOP: f64 = 1e-10;

/// Scatters least-squares coefficients on `support` into a dense vector.
pub(crate) fn dense_estimate(
    phi: &DenseMatrix,
    y: &[f64],
    support: &SupportSet,
) -> Result<(Vec<f64>, f64)> {
    let coeffs = least_squares_on_support(phi, y, support)?;
    let mut x_hat = vec![0.0; phi.cols()];
    for (j, c) in support.iter().zip(&coeffs) {
        x_hat[j] = *c;
    }
    let r = residual(phi, y, support)?;
    Ok((x_hat, norm2(&r)))
}

/// Index of the largest `|<phi_j, r>|` among unselected columns, smallest
/// index first on ties.
fn argmax_correlation(phi: &DenseMatrix, r: &[f64], selected: &[bool]) -> usize {
    let mut acc = vec![0.0; phi.cols()];
    for (i, &ri) in r.iter().enumerate() {
        crate::linalg::axpy(ri, phi.row(i), &mut acc);
    }
    let mut best = usize::MAX;
    let mut best_val = f64::NEG_INFINITY;
    for (j, a) in acc.iter().enumerate() {
        if !selected[j] && a.abs() > best_val {
            best_val = a.abs();
            best = j;
        }
    }
    best
}

/// Matching pursuit selection order: one column per iteration, least-squares
/// refit via an incrementally extended orthonormal basis. Stops early when
/// the residual is negligible relative to `||y||`.
pub(crate) fn omp_ordered(
    phi: &DenseMatrix,
    y: &[f64],
    iterations: usize,
) -> Result<Vec<usize>> {
    if iterations > phi.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{iterations} iterations exceed {} measurements",
            phi.rows()
        )));
    }
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(
            "measurement length does not match matrix rows".into(),
        ));
    }
    let stop = RESIDUAL_STOP * norm2(y);
    let mut basis = OrthoBasis::new(y);
    let mut selected = vec![false; phi.cols()];
    let mut order = Vec::with_capacity(iterations);
    let mut col = vec![0.0; phi.rows()];
    for _ in 0..iterations.min(phi.cols()) {
        if basis.residual_norm() <= stop {
            break;
        }
        let j = argmax_correlation(phi, basis.residual(), &selected);
        selected[j] = true;
        order.push(j);
        phi.copy_column_into(j, &mut col);
        basis.push(&col);
    }
    Ok(order)
}

/// Orthogonal matching pursuit: returns the set of indices accumulated over
/// `iterations` greedy picks (argmax correlation, refit, repeat).
pub fn omp(phi: &DenseMatrix, y: &[f64], iterations: usize) -> Result<SupportSet> {
    SupportSet::from_unsorted(omp_ordered(phi, y, iterations)?)
}

/// Multi-index selection order: `l` columns per iteration for up to `k`
/// iterations, stopping early on a negligible residual or once
/// `max_selected` indices are accumulated.
pub(crate) fn gomp_ordered(
    phi: &DenseMatrix,
    y: &[f64],
    k: usize,
    l: usize,
    max_selected: usize,
) -> Result<Vec<usize>> {
    let stop = RESIDUAL_STOP * norm2(y);
    let mut basis = OrthoBasis::new(y);
    let mut selected = vec![false; phi.cols()];
    let mut order: Vec<usize> = Vec::new();
    let mut col = vec![0.0; phi.rows()];
    for _ in 0..k {
        if basis.residual_norm() <= stop || order.len() >= max_selected {
            break;
        }
        let unselected = SupportSet::from_sorted(
            (0..phi.cols()).filter(|&j| !selected[j]).collect(),
        )
        .expect("filtered range is sorted");
        let take = l.min(unselected.len()).min(max_selected - order.len());
        if take == 0 {
            break;
        }
        let pairs = crate::linalg::correlations(phi, basis.residual(), &unselected)?;
        let picks = top_k_by_magnitude(&pairs, take)?;
        for j in picks.iter() {
            selected[j] = true;
            order.push(j);
            phi.copy_column_into(j, &mut col);
            basis.push(&col);
        }
    }
    Ok(order)
}

/// Generalized matching pursuit: `l` largest-correlation indices per
/// iteration for `k` iterations. The accumulated set is the pre-selection
/// set Theta.
pub fn gomp(phi: &DenseMatrix, y: &[f64], k: usize, l: usize) -> Result<PreselectionResult> {
    if l == 0 {
        return Err(Error::InvalidArgument("selection width l must be >= 1".into()));
    }
    if l.saturating_mul(k) > phi.rows() {
        return Err(Error::DimensionMismatch(format!(
            "l*k = {} selected indices would exceed {} measurements",
            l * k,
            phi.rows()
        )));
    }
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(
            "measurement length does not match matrix rows".into(),
        ));
    }
    let order = gomp_ordered(phi, y, k, l, l * k)?;
    Ok(PreselectionResult {
        theta: SupportSet::from_unsorted(order)?,
        l,
        method: Preselection::Gomp { l },
    })
}

/// Pre-selection stage of the tree search, per the configured method.
/// Selection order is kept when truncating to `preselection_size`.
pub fn preselect(phi: &DenseMatrix, y: &[f64], cfg: &TmpConfig) -> Result<PreselectionResult> {
    cfg.validate(phi.rows(), phi.cols())?;
    let (order, l, method) = match cfg.preselection {
        Preselection::FullUniverse => {
            return Ok(PreselectionResult {
                theta: SupportSet::full(phi.cols()),
                l: 0,
                method: Preselection::FullUniverse,
            });
        }
        Preselection::Gomp { l } => {
            if l.saturating_mul(cfg.k) > phi.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "l*k = {} selected indices would exceed {} measurements",
                    l * cfg.k,
                    phi.rows()
                )));
            }
            (
                gomp_ordered(phi, y, cfg.k, l, cfg.preselection_size)?,
                l,
                Preselection::Gomp { l },
            )
        }
        Preselection::OmpExtended => (
            omp_ordered(phi, y, cfg.preselection_size)?,
            1,
            Preselection::OmpExtended,
        ),
    };
    Ok(PreselectionResult {
        theta: SupportSet::from_unsorted(order)?,
        l,
        method,
    })
}

/// CoSaMP with the default iteration cap.
pub fn cosamp(phi: &DenseMatrix, y: &[f64], k: usize) -> Result<SupportSet> {
    cosamp_with(phi, y, k, super::COSAMP_MAX_ITERATIONS)
}

/// CoSaMP: per iteration, merge the current support with the `2k` largest
/// correlation indices, least-squares on the merged set, keep the `k`
/// largest coefficients, refit and update the residual. Stops at the
/// iteration cap, on residual stagnation (relative change below 1e-7), or
/// when the residual is negligible.
///
/// A zero measurement deterministically returns `{0, .., k-1}`: all
/// correlations tie at zero, so the smallest-index tie-break fills both the
/// identification and pruning steps.
pub fn cosamp_with(
    phi: &DenseMatrix,
    y: &[f64],
    k: usize,
    max_iterations: usize,
) -> Result<SupportSet> {
    if 3 * k > phi.rows() {
        return Err(Error::DimensionMismatch(format!(
            "CoSaMP needs 3k <= m, got k = {k}, m = {}",
            phi.rows()
        )));
    }
    if k == 0 {
        return Ok(SupportSet::empty());
    }
    let stop = RESIDUAL_STOP * norm2(y);
    let all = SupportSet::full(phi.cols());
    let mut support = SupportSet::empty();
    let mut r = y.to_vec();
    let mut prev_norm = norm2(&r);
    for _ in 0..max_iterations {
        let pairs = crate::linalg::correlations(phi, &r, &all)?;
        let proxy = top_k_by_magnitude(&pairs, (2 * k).min(phi.cols()))?;
        let merged = support.union(&proxy);
        let coeffs = least_squares_on_support(phi, y, &merged)?;
        let scored: Vec<(usize, f64)> = merged
            .iter()
            .zip(&coeffs)
            .map(|(j, c)| (j, c.abs()))
            .collect();
        support = top_k_by_magnitude(&scored, k.min(scored.len()))?;
        r = residual(phi, y, &support)?;
        let nrm = norm2(&r);
        if nrm <= stop || (prev_norm - nrm).abs() < 1e-7 * prev_norm {
            break;
        }
        prev_norm = nrm;
    }
    Ok(support)
}

/// Least-squares fit on a known support; the best linear reconstruction
/// given perfect support knowledge.
pub fn oracle_estimator(
    phi: &DenseMatrix,
    y: &[f64],
    support: &SupportSet,
) -> Result<RecoveryResult> {
    let (x_hat, residual_norm) = dense_estimate(phi, y, support)?;
    Ok(RecoveryResult {
        support: support.clone(),
        x_hat,
        residual_norm,
        stats: None,
    })
}
