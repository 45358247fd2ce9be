//! Deterministic Monte-Carlo estimation of classification error rates.
//!
//! Every trial draws its noise from a counter-derived seed, so error
//! counts are bit-identical across thread counts and execution orders.
//! A sweep draws one matrix per grid point (per master seed), classifies
//! under both the raw matrix and its tightened version, and attaches the
//! theoretical probability (m = 2) or union bound (m > 2) to each row.

use rayon::prelude::*;

use crate::analysis::{union_bound_mary, ErrorKind, TheoreticalError};
use crate::classifier::{classify, ClassifierKind};
use crate::error::{Error, Result};
use crate::frames::MeasurementMatrix;
use crate::seeding::derive_seed;
use crate::signals::{sample_noisy_measurement, HypothesisSet, NoiseModel};

const WILSON_Z: f64 = 1.959963984540054; // 95%

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameMode {
    NonTight,
    Tightened,
}

impl FrameMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameMode::NonTight => "non-tight",
            FrameMode::Tightened => "tightened",
        }
    }
}

impl std::str::FromStr for FrameMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-tight" | "nontight" => Ok(FrameMode::NonTight),
            "tightened" | "tight" => Ok(FrameMode::Tightened),
            other => Err(Error::Parse(format!("unknown frame mode {other:?}"))),
        }
    }
}

/// Sweep grid: the cartesian product of `n_values` and `snr_db_values`
/// for fixed (N, k, m), run once per frame mode.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Ambient signal dimension N.
    pub cols: usize,
    pub sparsity_k: usize,
    pub num_hypotheses: usize,
    pub n_values: Vec<usize>,
    pub snr_db_values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub classifier_kind: ClassifierKind,
    pub frame_modes: Vec<FrameMode>,
    /// Draw a fresh matrix for every trial instead of one per grid point.
    pub redraw_matrix_per_trial: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults mirroring the 2-ary k=1 sweep.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            cols: 100,
            sparsity_k: 1,
            num_hypotheses: 2,
            n_values: vec![20, 40, 60, 80],
            snr_db_values: vec![5.0, 10.0, 15.0, 20.0],
            trials: 5000,
            seed,
            classifier_kind: ClassifierKind::Correlation,
            frame_modes: vec![FrameMode::NonTight, FrameMode::Tightened],
            redraw_matrix_per_trial: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_hypotheses * self.sparsity_k > self.cols {
            return Err(Error::Infeasible {
                mk: self.num_hypotheses * self.sparsity_k,
                cols: self.cols,
            });
        }
        if self.num_hypotheses < 2 || self.sparsity_k == 0 {
            return Err(Error::Parse(format!(
                "need k >= 1 and m >= 2, got k = {}, m = {}",
                self.sparsity_k, self.num_hypotheses
            )));
        }
        if self.trials == 0 {
            return Err(Error::Parse("trials must be >= 1".into()));
        }
        if self.n_values.iter().any(|&n| n == 0 || n >= self.cols) {
            return Err(Error::BadDimensions {
                n: *self
                    .n_values
                    .iter()
                    .find(|&&n| n == 0 || n >= self.cols)
                    .unwrap(),
                cols: self.cols,
            });
        }
        if self.n_values.is_empty() || self.snr_db_values.is_empty() {
            return Err(Error::Parse("empty sweep grid".into()));
        }
        if self.frame_modes.is_empty() {
            return Err(Error::Parse("no frame modes selected".into()));
        }
        Ok(())
    }
}

/// Empirical error rate with a 95% Wilson confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        assert!(trials >= 1 && errors <= trials);
        let n = trials as f64;
        let p = errors as f64 / n;
        let z2 = WILSON_Z * WILSON_Z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half =
            WILSON_Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            errors,
            trials,
            rate: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub snr_db: f64,
    pub sparsity_k: usize,
    pub num_hypotheses: usize,
    pub frame_mode: FrameMode,
    pub estimate: ErrorEstimate,
    pub theoretical: Option<TheoreticalError>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Classifies one noisy draw; true if the decision is wrong.
pub fn run_trial(
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    sigma: f64,
    true_index: usize,
    trial_seed: u64,
) -> Result<bool> {
    run_trial_kind(
        matrix,
        hypotheses,
        sigma,
        true_index,
        trial_seed,
        ClassifierKind::Correlation,
    )
}

pub fn run_trial_kind(
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    sigma: f64,
    true_index: usize,
    trial_seed: u64,
    kind: ClassifierKind,
) -> Result<bool> {
    let noise = NoiseModel::new(sigma, matrix.cols())?;
    let y = sample_noisy_measurement(
        matrix,
        &hypotheses.signals()[true_index],
        &noise,
        trial_seed,
    )?;
    Ok(classify(&y, matrix, hypotheses, kind)? != true_index)
}

/// Error rate over `trials` draws with the true hypothesis cycled
/// `trial % m` (equal priors, lower variance than sampling).
///
/// Trial seeds are derived from `(master_seed, grid_id, trial)`, so the
/// count is independent of parallel scheduling.
pub fn estimate_error_rate(
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    sigma: f64,
    kind: ClassifierKind,
    trials: u64,
    master_seed: u64,
    grid_id: u64,
) -> Result<ErrorEstimate> {
    let m = hypotheses.len() as u64;
    let errors = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let true_index = (trial % m) as usize;
            let seed = derive_seed(master_seed, 3, grid_id, trial);
            run_trial_kind(matrix, hypotheses, sigma, true_index, seed, kind)
                .map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(ErrorEstimate::from_counts(errors, trials))
}

fn grid_matrix(
    config: &ExperimentConfig,
    n: usize,
    grid_id: u64,
    mode: FrameMode,
) -> Result<MeasurementMatrix> {
    let seed = derive_seed(config.seed, 1, grid_id, 0);
    let raw = MeasurementMatrix::generate_gaussian(n, config.cols, seed)?;
    match mode {
        FrameMode::NonTight => Ok(raw),
        FrameMode::Tightened => raw.tighten(1.0),
    }
}

/// Theoretical error for the cycled-truth mixture of
/// [`estimate_error_rate`]: the exact Q formula for m = 2 (identical for
/// either truth), and for m > 2 the worst case over the true hypothesis
/// of the per-hypothesis union bound, which bounds the equal-priors
/// mixture from above.
fn theoretical_for(
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    sigma: f64,
) -> Result<TheoreticalError> {
    let m = hypotheses.len();
    if m == 2 {
        return union_bound_mary(matrix, hypotheses, sigma, 0);
    }
    let mut worst: f64 = 0.0;
    for t in 0..m {
        worst = worst.max(union_bound_mary(matrix, hypotheses, sigma, t)?.unclamped);
    }
    Ok(TheoreticalError {
        probability: worst.min(1.0),
        argument: None,
        unclamped: worst,
        kind: ErrorKind::UnionBoundMary,
    })
}

fn run_grid_point(
    config: &ExperimentConfig,
    n: usize,
    snr_db: f64,
    grid_id: u64,
    mode: FrameMode,
) -> Result<SweepRow> {
    let hypotheses = HypothesisSet::generate(
        config.cols,
        config.sparsity_k,
        config.num_hypotheses,
        1.0,
        derive_seed(config.seed, 2, grid_id, 0),
    )?;
    let sigma = crate::signals::snr_to_sigma(snr_db, hypotheses.common_norm());

    let estimate = if config.redraw_matrix_per_trial {
        let m = hypotheses.len() as u64;
        let errors = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let mseed = derive_seed(config.seed, 1, grid_id, trial + 1);
                let raw = MeasurementMatrix::generate_gaussian(n, config.cols, mseed)?;
                let matrix = match mode {
                    FrameMode::NonTight => raw,
                    FrameMode::Tightened => raw.tighten(1.0)?,
                };
                let true_index = (trial % m) as usize;
                let seed = derive_seed(config.seed, 3, grid_id, trial);
                run_trial_kind(
                    &matrix,
                    &hypotheses,
                    sigma,
                    true_index,
                    seed,
                    config.classifier_kind,
                )
                .map(u64::from)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        ErrorEstimate::from_counts(errors, config.trials)
    } else {
        let matrix = grid_matrix(config, n, grid_id, mode)?;
        estimate_error_rate(
            &matrix,
            &hypotheses,
            sigma,
            config.classifier_kind,
            config.trials,
            config.seed,
            grid_id,
        )?
    };

    // The theoretical column always refers to the per-grid-point matrix.
    let matrix = grid_matrix(config, n, grid_id, mode)?;
    let theoretical = theoretical_for(&matrix, &hypotheses, sigma)?;

    Ok(SweepRow {
        n,
        snr_db,
        sparsity_k: config.sparsity_k,
        num_hypotheses: config.num_hypotheses,
        frame_mode: mode,
        estimate,
        theoretical: Some(theoretical),
    })
}

/// Runs the whole grid for every selected frame mode. Row order is fixed
/// by (frame mode, n, snr) regardless of execution schedule.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut rows = Vec::new();
    for &mode in &config.frame_modes {
        for (ni, &n) in config.n_values.iter().enumerate() {
            for (si, &snr_db) in config.snr_db_values.iter().enumerate() {
                let grid_id = (ni * config.snr_db_values.len() + si) as u64;
                rows.push(run_grid_point(config, n, snr_db, grid_id, mode)?);
            }
        }
    }
    Ok(SweepResult { rows })
}

impl SweepResult {
    /// CSV with header `n,snr_db,k,m,frame_mode,trials,errors,error_rate,
    /// ci_low,ci_high,theoretical`; floats carry 10 significant digits and
    /// `theoretical` is empty when not applicable.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_sig10;
        let mut out = String::from(
            "n,snr_db,k,m,frame_mode,trials,errors,error_rate,ci_low,ci_high,theoretical\n",
        );
        for r in &self.rows {
            let theo = r
                .theoretical
                .map(|t| fmt_sig10(t.probability))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                fmt_sig10(r.snr_db),
                r.sparsity_k,
                r.num_hypotheses,
                r.frame_mode.as_str(),
                r.estimate.trials,
                r.estimate.errors,
                fmt_sig10(r.estimate.rate),
                fmt_sig10(r.estimate.ci_low),
                fmt_sig10(r.estimate.ci_high),
                theo,
            ));
        }
        out
    }
}
