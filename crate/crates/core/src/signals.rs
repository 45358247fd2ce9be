//! Sparse hypothesis signals and Gaussian noise.
//!
//! Hypothesis sets are built with pairwise-disjoint random supports and
//! i.i.d. Gaussian nonzero values rescaled to a common norm, so
//! orthogonality holds exactly rather than to a tolerance.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::frames::MeasurementMatrix;

/// A length-N vector with at most `sparsity_k` nonzeros, all on `support`.
#[derive(Debug, Clone)]
pub struct SparseSignal {
    values: DVector<f64>,
    sparsity_k: usize,
    support: Vec<usize>,
}

impl SparseSignal {
    pub fn new(values: DVector<f64>, sparsity_k: usize) -> Result<Self> {
        let support: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        if support.len() > sparsity_k {
            return Err(Error::DimensionMismatch(format!(
                "{} nonzeros exceed declared sparsity {}",
                support.len(),
                sparsity_k
            )));
        }
        Ok(Self {
            values,
            sparsity_k,
            support,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn sparsity_k(&self) -> usize {
        self.sparsity_k
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }
}

/// m pairwise-orthogonal, equal-norm sparse signals.
#[derive(Debug, Clone)]
pub struct HypothesisSet {
    signals: Vec<SparseSignal>,
    common_norm: f64,
}

impl HypothesisSet {
    /// Validates orthogonality and equal norms on arbitrary signals.
    pub fn new(signals: Vec<SparseSignal>) -> Result<Self> {
        if signals.len() < 2 {
            return Err(Error::DimensionMismatch(
                "hypothesis set needs m >= 2 signals".into(),
            ));
        }
        let dim = signals[0].len();
        let common_norm = signals[0].values().norm();
        for (i, s) in signals.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "signal {i} has length {} != {dim}",
                    s.len()
                )));
            }
            if (s.values().norm() - common_norm).abs() > 1e-12 * common_norm {
                return Err(Error::DimensionMismatch(format!(
                    "signal {i} norm differs from common norm {common_norm}"
                )));
            }
            for other in signals.iter().take(i) {
                let ip = s.values().dot(other.values());
                if ip.abs() > 1e-12 * common_norm * common_norm {
                    return Err(Error::DimensionMismatch(format!(
                        "signals not orthogonal: inner product {ip}"
                    )));
                }
            }
        }
        Ok(Self {
            signals,
            common_norm,
        })
    }

    /// m exactly-k-sparse signals on disjoint supports, each rescaled to
    /// `norm`. Deterministic per seed.
    pub fn generate(
        dim: usize,
        k: usize,
        m: usize,
        norm: f64,
        seed: u64,
    ) -> Result<Self> {
        if k == 0 || m < 2 {
            return Err(Error::DimensionMismatch(format!(
                "need k >= 1 and m >= 2, got k = {k}, m = {m}"
            )));
        }
        if m * k > dim {
            return Err(Error::Infeasible { mk: m * k, cols: dim });
        }
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidConstant(norm));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices: Vec<usize> = (0..dim).collect();
        indices.shuffle(&mut rng);
        let mut signals = Vec::with_capacity(m);
        for chunk in indices.chunks_exact(k).take(m) {
            let mut values = DVector::zeros(dim);
            loop {
                for &idx in chunk {
                    values[idx] = StandardNormal.sample(&mut rng);
                }
                let current: f64 = values.norm();
                if current > 0.0 {
                    values *= norm / current;
                    break;
                }
            }
            signals.push(SparseSignal::new(values, k)?);
        }
        Self::new(signals)
    }

    pub fn signals(&self) -> &[SparseSignal] {
        &self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.signals[0].len()
    }

    pub fn common_norm(&self) -> f64 {
        self.common_norm
    }
}

/// Per-coordinate Gaussian noise N(0, sigma^2) in signal space.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub sigma: f64,
    pub dimension: usize,
}

impl NoiseModel {
    pub fn new(sigma: f64, dimension: usize) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidConstant(sigma));
        }
        Ok(Self { sigma, dimension })
    }
}

/// sigma such that ||s||^2 / sigma^2 = 10^(snr_db/10).
pub fn snr_to_sigma(snr_db: f64, signal_norm: f64) -> f64 {
    signal_norm / 10f64.powf(snr_db / 20.0)
}

/// Recovers the SNR in dB from a norm and noise level.
pub fn sigma_to_snr_db(sigma: f64, signal_norm: f64) -> f64 {
    20.0 * (signal_norm / sigma).log10()
}

/// y = Phi * (s + w) with w ~ N(0, sigma^2 I) drawn from `seed`.
/// Noise is added in signal space before measurement.
pub fn sample_noisy_measurement(
    matrix: &MeasurementMatrix,
    signal: &SparseSignal,
    noise: &NoiseModel,
    seed: u64,
) -> Result<DVector<f64>> {
    if signal.len() != matrix.cols() || noise.dimension != matrix.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, signal length {}, noise dimension {}",
            matrix.rows(),
            matrix.cols(),
            signal.len(),
            noise.dimension
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = signal.values().clone();
    for v in x.iter_mut() {
        let w: f64 = StandardNormal.sample(&mut rng);
        *v += noise.sigma * w;
    }
    Ok(matrix.entries() * x)
}
