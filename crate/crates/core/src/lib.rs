//! Compressive classification with tight-frame measurement matrices.
//!
//! Sparse signals contaminated by Gaussian noise are compressed by an
//! under-determined matrix and classified by a correlation statistic.
//! Row-orthogonalizing ("tightening") the matrix never increases the
//! probability of false classification; this crate provides the
//! classifiers, the closed-form error probabilities, the tightening
//! transform with frame certificates, and a deterministic Monte-Carlo
//! harness that reproduces the tight-vs-non-tight error-rate sweeps.

pub mod analysis;
pub mod classifier;
pub mod error;
pub mod frames;
pub mod io;
pub mod montecarlo;
pub mod seeding;
pub mod signals;

pub use analysis::{
    error_probability_2ary, q_function, separation_ratio, theorem2_gap, union_bound_mary,
    TheoreticalError, Theorem2Gap,
};
pub use classifier::{
    classify, correlation_statistics, matched_filter_statistics, ClassifierKind,
    ClassifierStatistics,
};
pub use error::{Error, Result};
pub use frames::{FrameCertificate, MeasurementMatrix, SvdFactors};
pub use montecarlo::{run_sweep, ErrorEstimate, ExperimentConfig, FrameMode, SweepResult};
pub use signals::{snr_to_sigma, HypothesisSet, NoiseModel, SparseSignal};
