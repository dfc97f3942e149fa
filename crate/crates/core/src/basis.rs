//! Incrementally extended orthonormal basis with a tracked residual.
//!
//! Greedy pursuits and the tree search all repeat the same linear-algebra
//! step: add one column to an active set and re-project the measurement onto
//! the orthogonal complement. Refactorizing from scratch costs `O(M k^2)`
//! per step; extending an orthonormal basis by modified Gram-Schmidt costs
//! `O(M k)` and yields the same residual. Results agree with the
//! from-scratch QR solve to well below 1e-10 on the well-conditioned
//! submatrices this crate works with (see tests).

use crate::linalg::{dot, norm2, DenseMatrix};

/// A pushed column whose norm shrinks below this fraction of its original
/// norm after projection is treated as linearly dependent and skipped; the
/// residual is unchanged, which is the correct projection semantics.
pub const DEPENDENT_TOL: f64 = 1e-10;

/// Re-orthogonalize when a single Gram-Schmidt pass removes more than this
/// fraction of the column norm (the classic 1/sqrt(2) criterion).
const REORTH_THRESHOLD: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone)]
pub struct OrthoBasis {
    m: usize,
    cols: Vec<f64>,
    count: usize,
    residual: Vec<f64>,
    work: Vec<f64>,
}

impl OrthoBasis {
    /// Starts an empty basis; the residual is `y` itself.
    pub fn new(y: &[f64]) -> Self {
        Self {
            m: y.len(),
            cols: Vec::new(),
            count: 0,
            residual: y.to_vec(),
            work: vec![0.0; y.len()],
        }
    }

    /// Clears the basis and resets the residual to `y`, reusing allocations.
    pub fn reset(&mut self, y: &[f64]) {
        debug_assert_eq!(y.len(), self.m);
        self.cols.clear();
        self.count = 0;
        self.residual.clear();
        self.residual.extend_from_slice(y);
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residual)
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.cols[i * self.m..(i + 1) * self.m]
    }

    /// Orthonormalizes `col` against the basis and appends it, updating the
    /// residual. Returns `false` (leaving basis and residual untouched) when
    /// the column is linearly dependent on the current basis.
    pub fn push(&mut self, col: &[f64]) -> bool {
        debug_assert_eq!(col.len(), self.m);
        let orig = norm2(col);
        if orig == 0.0 {
            return false;
        }
        self.work.copy_from_slice(col);
        let mut nrm = self.project_pass();
        if nrm < REORTH_THRESHOLD * orig {
            nrm = self.project_pass();
        }
        if nrm <= DEPENDENT_TOL * orig {
            return false;
        }
        let inv = 1.0 / nrm;
        for w in &mut self.work {
            *w *= inv;
        }
        self.cols.extend_from_slice(&self.work);
        self.count += 1;
        let u = &self.cols[(self.count - 1) * self.m..];
        let c = dot(u, &self.residual);
        for (r, ui) in self.residual.iter_mut().zip(u) {
            *r -= c * ui;
        }
        true
    }

    /// Convenience: pushes the listed columns of `phi` in order.
    pub fn push_columns(&mut self, phi: &DenseMatrix, indices: &[usize]) {
        let mut col = vec![0.0; self.m];
        for &j in indices {
            phi.copy_column_into(j, &mut col);
            self.push(&col);
        }
    }

    /// One Gram-Schmidt pass of `work` against all basis columns; returns
    /// the remaining norm.
    fn project_pass(&mut self) -> f64 {
        for i in 0..self.count {
            let u = &self.cols[i * self.m..(i + 1) * self.m];
            let c = dot(u, &self.work);
            // axpy with split borrow: work and cols are disjoint fields
            let work = &mut self.work;
            for (w, ui) in work.iter_mut().zip(u) {
                *w -= c * ui;
            }
        }
        norm2(&self.work)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{residual, SupportSet};
    use crate::signals::gen_sensing_matrix;

    #[test]
    fn incremental_residual_matches_from_scratch_solve() {
        let phi = gen_sensing_matrix(12, 24, 77);
        let y: Vec<f64> = (0..12).map(|i| (i as f64 * 0.9).sin()).collect();
        let indices = [3usize, 15, 7, 20, 1];
        let mut basis = OrthoBasis::new(&y);
        basis.push_columns(&phi, &indices);
        let support = SupportSet::from_unsorted(indices.to_vec()).unwrap();
        let reference = residual(&phi, &y, &support).unwrap();
        for (a, b) in basis.residual().iter().zip(&reference) {
            assert!((a - b).abs() < 1e-10, "incremental {a} vs from-scratch {b}");
        }
    }

    #[test]
    fn dependent_column_is_rejected_and_residual_unchanged() {
        let phi = gen_sensing_matrix(6, 8, 5);
        let y: Vec<f64> = (0..6).map(|i| i as f64 + 1.0).collect();
        let mut basis = OrthoBasis::new(&y);
        let mut col = vec![0.0; 6];
        phi.copy_column_into(2, &mut col);
        assert!(basis.push(&col));
        let before = basis.residual().to_vec();
        // Same column again: dependent.
        assert!(!basis.push(&col));
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.residual(), &before[..]);
    }

    #[test]
    fn residual_norm_is_monotone_in_pushes() {
        let phi = gen_sensing_matrix(10, 16, 8);
        let y: Vec<f64> = (0..10).map(|i| ((i * 3) as f64 * 0.2).cos()).collect();
        let mut basis = OrthoBasis::new(&y);
        let mut prev = basis.residual_norm();
        let mut col = vec![0.0; 10];
        for j in [4usize, 9, 0, 13, 2] {
            phi.copy_column_into(j, &mut col);
            basis.push(&col);
            let cur = basis.residual_norm();
            assert!(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}
