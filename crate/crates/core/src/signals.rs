//! Seeded generation of sensing matrices, sparse ground truths and noise at
//! an exact target SNR, plus the evaluation metrics used by the benchmark
//! harness.
//!
//! Everything here is a pure function of its explicit seed (ChaCha8 stream),
//! so an entire instance stream is reproducible from
//! `(m, n, k, snr_db, seed)`. Parallel callers should derive per-trial seeds
//! as `seed + trial_index`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm2, DenseMatrix, SupportSet};
use crate::{Error, Result};

/// Nonzero coefficients are resampled until they clear this magnitude floor,
/// so "nonzero" is unambiguous at double precision.
pub const COEFFICIENT_FLOOR: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// A k-sparse ground-truth signal of dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    pub n: usize,
    pub k: usize,
    /// Support set T (sorted).
    pub support: SupportSet,
    /// Nonzero values, one per support index in increasing index order.
    pub values: Vec<f64>,
}

impl SparseSignal {
    /// Dense length-`n` representation.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (j, v) in self.support.iter().zip(&self.values) {
            x[j] = *v;
        }
        x
    }

    /// Norm of the nonzero part, `||x_T||_2`.
    pub fn norm(&self) -> f64 {
        norm2(&self.values)
    }

    /// Smallest nonzero magnitude, `min_j |x_j|`.
    pub fn min_abs_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()))
    }
}

/// One measurement `y = Phi x + v` together with everything that produced it.
#[derive(Debug, Clone)]
pub struct MeasurementInstance {
    pub phi: DenseMatrix,
    pub x: SparseSignal,
    /// Noise vector; all zeros for noiseless instances.
    pub v: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl MeasurementInstance {
    pub fn is_noiseless(&self) -> bool {
        self.v.iter().all(|&z| z == 0.0)
    }

    pub fn noise_norm(&self) -> f64 {
        norm2(&self.v)
    }
}

/// Batch metrics over recovery trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Exact recovery ratio: fraction of trials whose estimated support
    /// equals the true support exactly (support-based, never value-based).
    pub err: f64,
    /// `(1/n) * sum ||x - x_hat||^2 / N` over the batch.
    pub mse: f64,
    /// The SNR the batch was generated at; infinite for noiseless batches.
    pub snr_db: f64,
}

/// Outcome of a single recovery trial, as consumed by [`compute_metrics`].
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub x_true: SparseSignal,
    /// Dense length-`n` estimate.
    pub x_hat: Vec<f64>,
    pub support_hat: SupportSet,
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub(crate) fn gen_sensing_matrix_from_rng(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let scale = (1.0 / m as f64).sqrt();
    let data: Vec<f64> = (0..m * n).map(|_| scale * gaussian(rng)).collect();
    DenseMatrix::from_vec(m, n, data).expect("generated entries are finite")
}

/// `m x n` matrix with i.i.d. Gaussian entries of mean 0 and variance `1/m`,
/// drawn row-major from a ChaCha8 stream seeded with `seed`.
pub fn gen_sensing_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_sensing_matrix_from_rng(m, n, &mut rng)
}

pub(crate) fn gen_sparse_signal_from_rng(
    n: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let support = SupportSet::from_unsorted(rand::seq::index::sample(rng, n, k).into_vec())
        .expect("sampled without replacement");
    let values: Vec<f64> = (0..k)
        .map(|_| loop {
            let v = gaussian(rng);
            if v.abs() >= COEFFICIENT_FLOOR {
                break v;
            }
        })
        .collect();
    Ok(SparseSignal { n, k, support, values })
}

/// K-sparse signal with support drawn uniformly without replacement and
/// standard Gaussian nonzero coefficients (resampled below the magnitude
/// floor).
pub fn gen_sparse_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_sparse_signal_from_rng(n, k, &mut rng)
}

pub(crate) fn add_noise_for_snr_from_rng(
    phi: DenseMatrix,
    x: SparseSignal,
    snr_db: Option<f64>,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<MeasurementInstance> {
    if x.n != phi.cols() {
        return Err(Error::DimensionMismatch(format!(
            "signal dimension {} does not match {} matrix columns",
            x.n,
            phi.cols()
        )));
    }
    let clean = phi.mul_vec(&x.to_dense());
    let signal_norm = norm2(&clean);
    let m = phi.rows();
    let v = match snr_db {
        None => vec![0.0; m],
        Some(snr) => {
            if !snr.is_finite() {
                return Err(Error::InvalidArgument("SNR target must be finite".into()));
            }
            if signal_norm == 0.0 {
                return Err(Error::ZeroSignal);
            }
            // Draw a Gaussian direction, then scale it so the realized SNR
            // hits the target exactly rather than in expectation.
            let mut g: Vec<f64>;
            loop {
                g = (0..m).map(|_| gaussian(rng)).collect();
                if norm2(&g) > 0.0 {
                    break;
                }
            }
            let target_norm = signal_norm / 10f64.powf(snr / 20.0);
            let scale = target_norm / norm2(&g);
            g.iter().map(|z| z * scale).collect()
        }
    };
    let y: Vec<f64> = clean.iter().zip(&v).map(|(a, b)| a + b).collect();
    Ok(MeasurementInstance { phi, x, v, y, seed })
}

/// Attaches noise to `(phi, x)` so that `10 log10(||Phi x||^2 / ||v||^2)`
/// equals `snr_db` exactly; `None` produces a noiseless instance (`v = 0`).
pub fn add_noise_for_snr(
    phi: DenseMatrix,
    x: SparseSignal,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<MeasurementInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise_for_snr_from_rng(phi, x, snr_db, seed, &mut rng)
}

/// Generates a full measurement instance (matrix, signal, noise) from a
/// single seeded stream. This is the per-trial entry point of the harness.
pub fn measurement_instance(
    m: usize,
    n: usize,
    k: usize,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<MeasurementInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = gen_sensing_matrix_from_rng(m, n, &mut rng);
    let x = gen_sparse_signal_from_rng(n, k, &mut rng)?;
    add_noise_for_snr_from_rng(phi, x, snr_db, seed, &mut rng)
}

/// Realized SNR in dB of a stored instance; infinite when `v = 0`.
pub fn realized_snr_db(inst: &MeasurementInstance) -> f64 {
    let clean = inst.phi.mul_vec(&inst.x.to_dense());
    let vs = norm2(&inst.v);
    if vs == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (norm2(&clean) / vs).log10()
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// ERR and MSE over a batch of trials. `snr_db` is carried through for
/// reporting; pass `f64::INFINITY` for noiseless batches.
pub fn compute_metrics(trials: &[TrialResult], snr_db: f64) -> Result<Metrics> {
    if trials.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n_dim = trials[0].x_true.n;
    let mut exact = 0usize;
    let mut sq = 0.0;
    for t in trials {
        if t.x_true.n != n_dim || t.x_hat.len() != n_dim {
            return Err(Error::DimensionMismatch(
                "trials in a batch must share the signal dimension".into(),
            ));
        }
        if t.support_hat == t.x_true.support {
            exact += 1;
        }
        let dense = t.x_true.to_dense();
        sq += dense
            .iter()
            .zip(&t.x_hat)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n_dim as f64;
    }
    Ok(Metrics {
        err: exact as f64 / trials.len() as f64,
        mse: sq / trials.len() as f64,
        snr_db,
    })
}

// ---------------------------------------------------------------------------
// Instance dump
// ---------------------------------------------------------------------------

/// Writes an instance as CSV for cross-implementation comparison: a header
/// row `m,n,k,seed,snr_db`, then the matrix one row per line, then `x`, `v`
/// and `y` each on one line.
pub fn write_instance_csv<W: Write>(inst: &MeasurementInstance, w: &mut W) -> std::io::Result<()> {
    let snr = realized_snr_db(inst);
    writeln!(w, "m,n,k,seed,snr_db")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        inst.phi.rows(),
        inst.phi.cols(),
        inst.x.k,
        inst.seed,
        if snr.is_finite() { format!("{snr:.9e}") } else { "inf".into() }
    )?;
    for i in 0..inst.phi.rows() {
        let row: Vec<String> = inst.phi.row(i).iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    for vec in [&inst.x.to_dense(), &inst.v, &inst.y] {
        let line: Vec<String> = vec.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensing_matrix_shape_and_determinism() {
        let a = gen_sensing_matrix(100, 256, 42);
        assert_eq!((a.rows(), a.cols()), (100, 256));
        let b = gen_sensing_matrix(100, 256, 42);
        assert_eq!(a, b);
        assert_ne!(a, gen_sensing_matrix(100, 256, 43));
    }

    #[test]
    fn sensing_matrix_moments() {
        let a = gen_sensing_matrix(100, 256, 7);
        let n = (a.rows() * a.cols()) as f64;
        let mean = a.data().iter().sum::<f64>() / n;
        let var = a.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sigma = (1.0f64 / 100.0).sqrt();
        assert!(mean.abs() < 4.0 * sigma / n.sqrt(), "mean {mean}");
        assert!((var - 0.01).abs() < 0.001, "variance {var}");
    }

    #[test]
    fn sparse_signal_full_support_when_k_equals_n() {
        let x = gen_sparse_signal(6, 6, 1).unwrap();
        assert_eq!(x.support.as_slice(), &[0, 1, 2, 3, 4, 5]);
        assert!(x.values.iter().all(|v| v.abs() >= COEFFICIENT_FLOOR));
    }

    #[test]
    fn sparse_signal_determinism() {
        let a = gen_sparse_signal(64, 8, 9).unwrap();
        let b = gen_sparse_signal(64, 8, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn support_frequencies_are_uniform() {
        let (n, k, draws) = (256usize, 20usize, 10_000usize);
        let mut counts = vec![0usize; n];
        for t in 0..draws {
            let x = gen_sparse_signal(n, k, 1000 + t as u64).unwrap();
            for j in x.support.iter() {
                counts[j] += 1;
            }
        }
        let expect = k as f64 / n as f64;
        for (j, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - expect).abs() < 0.01,
                "index {j}: frequency {freq} vs expected {expect}"
            );
        }
    }

    #[test]
    fn noise_norm_inverts_snr_formula() {
        // ||Phi x||^2 = 100 and a 20 dB target force ||v||^2 = 1.
        let phi = DenseMatrix::identity(2);
        let x = SparseSignal {
            n: 2,
            k: 1,
            support: SupportSet::from_sorted(vec![0]).unwrap(),
            values: vec![10.0],
        };
        let inst = add_noise_for_snr(phi, x, Some(20.0), 3).unwrap();
        let v2 = inst.v.iter().map(|v| v * v).sum::<f64>();
        assert!((v2 - 1.0).abs() < 1e-12, "||v||^2 = {v2}");
    }

    #[test]
    fn noiseless_flag_yields_zero_noise() {
        let inst = measurement_instance(10, 20, 3, None, 5).unwrap();
        assert!(inst.is_noiseless());
        assert_eq!(inst.v, vec![0.0; 10]);
    }

    #[test]
    fn realized_snr_matches_target() {
        for snr in [0.0, 10.0, 27.5, 40.0] {
            let inst = measurement_instance(20, 50, 5, Some(snr), 11).unwrap();
            assert!(
                (realized_snr_db(&inst) - snr).abs() < 1e-9,
                "target {snr}, got {}",
                realized_snr_db(&inst)
            );
        }
    }

    #[test]
    fn zero_signal_is_rejected() {
        // A zero column makes Phi x = 0.
        let phi = DenseMatrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let x = SparseSignal {
            n: 2,
            k: 1,
            support: SupportSet::from_sorted(vec![1]).unwrap(),
            values: vec![2.0],
        };
        assert!(matches!(
            add_noise_for_snr(phi, x, Some(10.0), 0),
            Err(Error::ZeroSignal)
        ));
    }

    #[test]
    fn instance_reconstructs_y() {
        let inst = measurement_instance(15, 40, 4, Some(15.0), 21).unwrap();
        let clean = inst.phi.mul_vec(&inst.x.to_dense());
        for i in 0..15 {
            assert!((clean[i] + inst.v[i] - inst.y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_perfect_batch() {
        let x = gen_sparse_signal(8, 2, 1).unwrap();
        let t = TrialResult {
            x_hat: x.to_dense(),
            support_hat: x.support.clone(),
            x_true: x,
        };
        let m = compute_metrics(&[t.clone(), t], f64::INFINITY).unwrap();
        assert_eq!(m.err, 1.0);
        assert_eq!(m.mse, 0.0);
    }

    #[test]
    fn metrics_single_trial_formula() {
        // N = 4, ||x - x_hat||^2 = 2 => mse = 0.5.
        let x = SparseSignal {
            n: 4,
            k: 1,
            support: SupportSet::from_sorted(vec![0]).unwrap(),
            values: vec![1.0],
        };
        let t = TrialResult {
            x_true: x.clone(),
            x_hat: vec![0.0, 1.0, 0.0, 0.0],
            support_hat: SupportSet::from_sorted(vec![1]).unwrap(),
        };
        let m = compute_metrics(&[t], 10.0).unwrap();
        assert_eq!(m.err, 0.0);
        assert!((m.mse - 0.5).abs() < 1e-15);
    }

    #[test]
    fn metrics_mixed_batch_matches_hand_computation() {
        // Five N=2 trials, squared errors 0, 1, 4, 0.25, 0; two exact supports.
        let mk = |values: Vec<f64>, sup: Vec<usize>, x_hat: Vec<f64>, sup_hat: Vec<usize>| {
            TrialResult {
                x_true: SparseSignal {
                    n: 2,
                    k: sup.len(),
                    support: SupportSet::from_sorted(sup).unwrap(),
                    values,
                },
                x_hat,
                support_hat: SupportSet::from_sorted(sup_hat).unwrap(),
            }
        };
        let trials = vec![
            mk(vec![1.0], vec![0], vec![1.0, 0.0], vec![0]),
            mk(vec![1.0], vec![0], vec![0.0, 0.0], vec![1]),
            mk(vec![2.0], vec![1], vec![2.0, 2.0], vec![0]),
            mk(vec![1.5], vec![1], vec![0.0, 1.0], vec![1]),
            mk(vec![-1.0], vec![0], vec![-1.0, 0.0], vec![0]),
        ];
        let m = compute_metrics(&trials, 0.0).unwrap();
        assert!((m.err - 3.0 / 5.0).abs() < 1e-15);
        // mse = (1/5) * (0 + 1 + 4 + 0.25 + 0) / 2 = 0.525
        assert!((m.mse - 0.525).abs() < 1e-15, "mse {}", m.mse);
    }

    #[test]
    fn metrics_empty_batch_is_error() {
        assert_eq!(compute_metrics(&[], 0.0), Err(Error::EmptyBatch));
    }

    #[test]
    fn instance_csv_has_expected_shape() {
        let inst = measurement_instance(3, 5, 2, None, 8).unwrap();
        let mut buf = Vec::new();
        write_instance_csv(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // header + params + 3 matrix rows + x + v + y
        assert_eq!(lines.len(), 2 + 3 + 3);
        assert_eq!(lines[0], "m,n,k,seed,snr_db");
        assert!(lines[1].starts_with("3,5,2,8,"));
    }
}
