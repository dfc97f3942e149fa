//! Brute-forced restricted isometry constants.
//!
//! For each order k up to `k_max`, the constant is the worst energy
//! distortion over every k-column submatrix: the maximum of
//! `|lambda_max - 1|` and `|1 - lambda_min|` of the k x k Gram matrix,
//! maximized over all supports. Eigenvalues come from a cyclic Jacobi
//! sweep, which is plenty accurate (well below 1e-10) at these sizes.
//! This is ground truth at tiny scale, not an estimate.

use crate::combin::{binomial, for_each_combination};
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Per-order enumeration ceiling for [`ric_bruteforce`].
pub const RIC_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Exact restricted isometry constants of one matrix, orders `1..=exact_up_to`.
#[derive(Debug, Clone, PartialEq)]
pub struct RicTable {
    /// Label for reports; defaults to `"{m}x{n}"`.
    pub matrix_id: String,
    /// `delta[i]` is the order-`i+1` constant.
    delta: Vec<f64>,
}

impl RicTable {
    /// Largest order with an exactly computed constant.
    pub fn exact_up_to(&self) -> usize {
        self.delta.len()
    }

    /// The order-`k` constant, if computed.
    pub fn delta(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        self.delta.get(k - 1).copied()
    }

    /// `(order, delta)` pairs in increasing order.
    pub fn orders(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.delta.iter().enumerate().map(|(i, &d)| (i + 1, d))
    }
}

/// Computes the isometry constants of `phi` for every order up to `k_max`
/// by enumerating all supports. Errors with [`Error::TooLarge`] when any
/// order would need more than [`RIC_ENUMERATION_LIMIT`] supports.
pub fn ric_bruteforce(phi: &DenseMatrix, k_max: usize) -> Result<RicTable> {
    let n = phi.cols();
    if k_max == 0 || k_max > n {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} must satisfy 1 <= k_max <= n = {n}"
        )));
    }
    for k in 1..=k_max {
        let c = binomial(n, k);
        if c > RIC_ENUMERATION_LIMIT {
            return Err(Error::TooLarge(format!(
                "{c} supports of size {k} exceed the enumeration limit {RIC_ENUMERATION_LIMIT}"
            )));
        }
    }
    // Full column Gram once; submatrix Grams are lookups.
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let d = column_pair_dot(phi, i, j);
            gram[i * n + j] = d;
            gram[j * n + i] = d;
        }
    }
    let mut delta = Vec::with_capacity(k_max);
    let mut sub = vec![0.0; k_max * k_max];
    for k in 1..=k_max {
        let mut worst = 0.0f64;
        for_each_combination(n, k, |support| {
            for (a, &ia) in support.iter().enumerate() {
                for (b, &ib) in support.iter().enumerate() {
                    sub[a * k + b] = gram[ia * n + ib];
                }
            }
            let (lo, hi) = symmetric_eigen_extremes(&mut sub[..k * k], k);
            worst = worst.max((hi - 1.0).abs().max((1.0 - lo).abs()));
        });
        delta.push(worst);
    }
    Ok(RicTable {
        matrix_id: format!("{}x{}", phi.rows(), n),
        delta,
    })
}

fn column_pair_dot(phi: &DenseMatrix, i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for r in 0..phi.rows() {
        s += phi.get(r, i) * phi.get(r, j);
    }
    s
}

/// Smallest and largest eigenvalue of a symmetric `k x k` matrix (row-major,
/// destroyed in place) via cyclic Jacobi rotations.
fn symmetric_eigen_extremes(a: &mut [f64], k: usize) -> (f64, f64) {
    debug_assert_eq!(a.len(), k * k);
    if k == 1 {
        return (a[0], a[0]);
    }
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..k {
            for q in (p + 1)..k {
                off += a[p * k + q] * a[p * k + q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * k + p];
                let aqq = a[q * k + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..k {
                    let aip = a[i * k + p];
                    let aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for i in 0..k {
                    let api = a[p * k + i];
                    let aqi = a[q * k + i];
                    a[p * k + i] = c * api - s * aqi;
                    a[q * k + i] = s * api + c * aqi;
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        lo = lo.min(a[i * k + i]);
        hi = hi.max(a[i * k + i]);
    }
    (lo, hi)
}
