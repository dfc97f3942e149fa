//! Exhaustive minimum-residual search over all size-k supports. This is the
//! combinatorial reference the other algorithms are checked against; a guard
//! keeps it to instance sizes where full enumeration is sane.

use crate::basis::OrthoBasis;
use crate::combin::{binomial, for_each_combination};
use crate::linalg::{DenseMatrix, SupportSet};
use crate::{Error, Result};

/// Enumeration ceiling for [`exhaustive_l0`].
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// The size-`k` support minimizing the least-squares residual norm, found by
/// enumerating every combination in lexicographic order. Exact ties keep the
/// lexicographically first support.
pub fn exhaustive_l0(phi: &DenseMatrix, y: &[f64], k: usize) -> Result<SupportSet> {
    let n = phi.cols();
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(
            "measurement length does not match matrix rows".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "support size {k} exceeds {n} columns"
        )));
    }
    let count = binomial(n, k);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{count} supports of size {k} exceed the enumeration limit {EXHAUSTIVE_LIMIT}"
        )));
    }
    let mut basis = OrthoBasis::new(y);
    let mut col = vec![0.0; phi.rows()];
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_combination(n, k, |support| {
        basis.reset(y);
        for &j in support {
            phi.copy_column_into(j, &mut col);
            basis.push(&col);
        }
        let norm = basis.residual_norm();
        if best.as_ref().is_none_or(|(_, b)| norm < *b) {
            best = Some((support.to_vec(), norm));
        }
    });
    let (support, _) = best.expect("at least one combination exists");
    SupportSet::from_sorted(support)
}
