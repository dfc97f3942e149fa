//! Dense vector/matrix primitives and the least-squares / projection /
//! correlation kernels shared by every recovery algorithm.
//!
//! Matrices are stored row-major. Least squares is solved through a
//! Householder QR factorization; rank deficiency is detected from the ratio
//! of the largest to smallest diagonal entry of `R`, which is a cheap
//! estimate of the condition number of the submatrix.

use crate::{Error, Result};

/// Condition-estimate limit above which a submatrix is treated as rank
/// deficient. Gaussian submatrices with at most M columns are almost surely
/// far below this, so hitting it signals misuse.
pub const CONDITION_LIMIT: f64 = 1e12;

// ---------------------------------------------------------------------------
// Vector kernels
// ---------------------------------------------------------------------------

/// Dot product with eight partial accumulators so the loop vectorizes.
/// Summation order is fixed, so results are reproducible run to run.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// Euclidean norm.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries. Every entry must be finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be at least 1x1".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copies column `j` into `out` (length `rows`).
    pub fn copy_column_into(&self, j: usize, out: &mut [f64]) {
        debug_assert!(j < self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.data[i * self.cols + j];
        }
    }

    /// `<column j, v>`.
    pub fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.rows);
        let mut s = 0.0;
        for (i, vi) in v.iter().enumerate() {
            s += self.data[i * self.cols + j] * vi;
        }
        s
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Column-major copy of the entries; used by hot paths that walk columns.
    pub fn to_column_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Gathers the columns listed in `indices` into a column-major buffer.
    pub(crate) fn gather_columns(&self, indices: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * indices.len()];
        for (c, &j) in indices.iter().enumerate() {
            for i in 0..self.rows {
                out[c * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// SupportSet
// ---------------------------------------------------------------------------

/// A set of column indices, kept strictly increasing. The sorted list is the
/// canonical form used for equality, hashing and lexicographic ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    /// All indices `0..n`.
    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect() }
    }

    /// Wraps an already strictly increasing index list.
    pub fn from_sorted(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "support indices must be strictly increasing".into(),
            ));
        }
        Ok(Self { indices })
    }

    /// Sorts the indices; duplicates are an error.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        Self::from_sorted(indices)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (0, 0);
        while a < self.len() || b < other.len() {
            match (self.indices.get(a), other.indices.get(b)) {
                (Some(&x), Some(&y)) if x == y => {
                    merged.push(x);
                    a += 1;
                    b += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    merged.push(x);
                    a += 1;
                }
                (Some(_), Some(&y)) => {
                    merged.push(y);
                    b += 1;
                }
                (Some(&x), None) => {
                    merged.push(x);
                    a += 1;
                }
                (None, Some(&y)) => {
                    merged.push(y);
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SupportSet { indices: merged }
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet {
            indices: self.iter().filter(|&i| !other.contains(i)).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a SupportSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;
    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter().copied()
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

fn check_support(phi: &DenseMatrix, support: &SupportSet) -> Result<()> {
    if let Some(max) = support.max_index() {
        if max >= phi.cols() {
            return Err(Error::DimensionMismatch(format!(
                "support index {max} out of range for {} columns",
                phi.cols()
            )));
        }
    }
    if support.len() > phi.rows() {
        return Err(Error::DimensionMismatch(format!(
            "support of size {} exceeds {} measurements",
            support.len(),
            phi.rows()
        )));
    }
    Ok(())
}

fn check_rhs(phi: &DenseMatrix, y: &[f64]) -> Result<()> {
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {} but the matrix has {} rows",
            y.len(),
            phi.rows()
        )));
    }
    Ok(())
}

/// Least-squares coefficients `c` minimizing `||y - Phi_s c||_2`, one entry
/// per support index in increasing index order.
///
/// Solved by Householder QR; fails with [`Error::RankDeficient`] when the
/// diagonal-ratio condition estimate of the submatrix exceeds
/// [`CONDITION_LIMIT`].
pub fn least_squares_on_support(
    phi: &DenseMatrix,
    y: &[f64],
    support: &SupportSet,
) -> Result<Vec<f64>> {
    check_support(phi, support)?;
    check_rhs(phi, y)?;
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let mut sub = phi.gather_columns(support.as_slice());
    let mut rhs = y.to_vec();
    qr_least_squares(&mut sub, phi.rows(), support.len(), &mut rhs)
}

/// Residual `y - Phi_s c` of the least-squares fit on `support`; the
/// projection of `y` onto the orthogonal complement of the chosen columns.
/// An empty support returns `y` unchanged.
pub fn residual(phi: &DenseMatrix, y: &[f64], support: &SupportSet) -> Result<Vec<f64>> {
    let coeffs = least_squares_on_support(phi, y, support)?;
    let mut r = y.to_vec();
    let mut col = vec![0.0; phi.rows()];
    for (c, j) in coeffs.iter().zip(support.iter()) {
        phi.copy_column_into(j, &mut col);
        axpy(-c, &col, &mut r);
    }
    Ok(r)
}

/// Absolute correlations `|<phi_j, r>|` for each candidate index.
pub fn correlations(
    phi: &DenseMatrix,
    r: &[f64],
    candidates: &SupportSet,
) -> Result<Vec<(usize, f64)>> {
    check_rhs(phi, r)?;
    if let Some(max) = candidates.max_index() {
        if max >= phi.cols() {
            return Err(Error::DimensionMismatch(format!(
                "candidate index {max} out of range for {} columns",
                phi.cols()
            )));
        }
    }
    let mut acc = vec![0.0; phi.cols()];
    for (i, &ri) in r.iter().enumerate() {
        axpy(ri, phi.row(i), &mut acc);
    }
    Ok(candidates.iter().map(|j| (j, acc[j].abs())).collect())
}

/// The `k` indices with the largest values; ties broken by smaller index so
/// the selection is deterministic. Input indices must be unique.
pub fn top_k_by_magnitude(pairs: &[(usize, f64)], k: usize) -> Result<SupportSet> {
    if k > pairs.len() {
        return Err(Error::InsufficientCandidates {
            requested: k,
            available: pairs.len(),
        });
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        pairs[b]
            .1
            .total_cmp(&pairs[a].1)
            .then(pairs[a].0.cmp(&pairs[b].0))
    });
    SupportSet::from_unsorted(order[..k].iter().map(|&i| pairs[i].0).collect())
}

// ---------------------------------------------------------------------------
// Householder QR
// ---------------------------------------------------------------------------

/// In-place Householder QR least squares on a column-major `m x k` buffer
/// (`k <= m`). `rhs` is overwritten with `Q' y`.
pub(crate) fn qr_least_squares(
    a: &mut [f64],
    m: usize,
    k: usize,
    rhs: &mut [f64],
) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(rhs.len(), m);
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let off = j * m;
        let xnorm = norm2(&a[off + j..off + m]);
        if xnorm == 0.0 {
            diag[j] = 0.0;
            continue;
        }
        let x0 = a[off + j];
        let alpha = if x0 >= 0.0 { -xnorm } else { xnorm };
        a[off + j] = x0 - alpha;
        // v'v = 2 * xnorm * (xnorm + |x0|)
        let w = 1.0 / (xnorm * (xnorm + x0.abs()));
        for jj in (j + 1)..k {
            let (v, col) = split_cols(a, m, j, jj);
            let s = dot(&v[j..], &col[j..]);
            axpy(-w * s, &v[j..], &mut col[j..]);
        }
        {
            let v = &a[off..off + m];
            let s = dot(&v[j..], &rhs[j..]);
            let scaled = -w * s;
            for (ri, vi) in rhs[j..].iter_mut().zip(&v[j..]) {
                *ri += scaled * vi;
            }
        }
        diag[j] = alpha;
    }

    let dmax = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let dmin = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    let cond = if dmin == 0.0 { f64::INFINITY } else { dmax / dmin };
    if cond > CONDITION_LIMIT {
        return Err(Error::RankDeficient { cond, limit: CONDITION_LIMIT });
    }

    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = rhs[i];
        for jj in (i + 1)..k {
            s -= a[jj * m + i] * c[jj];
        }
        c[i] = s / diag[i];
    }
    Ok(c)
}

/// Disjoint mutable views of columns `j` (immutable) and `jj` (mutable).
fn split_cols(a: &mut [f64], m: usize, j: usize, jj: usize) -> (&[f64], &mut [f64]) {
    debug_assert!(j < jj);
    let (head, tail) = a.split_at_mut(jj * m);
    (&head[j * m..j * m + m], &mut tail[..m])
}
