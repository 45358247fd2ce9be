//! Correlation and general matched-filter classifiers with the argmax
//! decision rule.
//!
//! The correlation statistic is `t_i = <y, Phi s_i> - 1/2 ||Phi s_i||^2`.
//! The matched-filter statistic replaces the correlation by
//! `<y, (Phi Phi^T)^-1 Phi s_i>` and the normalization by the projection
//! of `s_i` onto the row space. When `Phi Phi^T = I` the two coincide.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frames::MeasurementMatrix;
use crate::signals::HypothesisSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Correlation,
    MatchedFilter,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifierKind::Correlation => write!(f, "correlation"),
            ClassifierKind::MatchedFilter => write!(f, "matched-filter"),
        }
    }
}

/// The statistics vector (t_1..t_m) plus the decided index (0-based).
/// Ties break toward the lowest index.
#[derive(Debug, Clone)]
pub struct ClassifierStatistics {
    pub values: Vec<f64>,
    pub decided_index: usize,
    pub kind: ClassifierKind,
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn check_dims(
    y: &DVector<f64>,
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
) -> Result<()> {
    if y.len() != matrix.rows() || hypotheses.dim() != matrix.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, y length {}, signals length {}",
            matrix.rows(),
            matrix.cols(),
            y.len(),
            hypotheses.dim()
        )));
    }
    Ok(())
}

/// t_i = <y, Phi s_i> - 1/2 ||Phi s_i||^2 for every hypothesis.
pub fn correlation_statistics(
    y: &DVector<f64>,
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
) -> Result<ClassifierStatistics> {
    check_dims(y, matrix, hypotheses)?;
    let values: Vec<f64> = hypotheses
        .signals()
        .iter()
        .map(|s| {
            let phi_s = matrix.entries() * s.values();
            y.dot(&phi_s) - 0.5 * phi_s.norm_squared()
        })
        .collect();
    let decided_index = argmax_lowest(&values);
    Ok(ClassifierStatistics {
        values,
        decided_index,
        kind: ClassifierKind::Correlation,
    })
}

/// Immutable per-matrix factorization shared by matched-filter evaluations.
#[derive(Debug, Clone)]
pub struct GramFactor {
    chol: Cholesky<f64, nalgebra::Dyn>,
}

impl GramFactor {
    pub fn new(matrix: &MeasurementMatrix) -> Result<Self> {
        // A failed Cholesky of Phi*Phi^T means Phi is (numerically) rank
        // deficient; report it as such with the SVD-based diagnostic.
        let gram: DMatrix<f64> = matrix.entries() * matrix.entries().transpose();
        match Cholesky::new(gram) {
            Some(chol) => Ok(Self { chol }),
            None => {
                matrix.decompose()?;
                Err(Error::RankDeficient {
                    ratio: 0.0,
                    tol: crate::frames::RANK_TOL,
                })
            }
        }
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }
}

/// t_i = <y, (Phi Phi^T)^-1 Phi s_i> - 1/2 ||P_rowspace s_i||^2.
pub fn matched_filter_statistics(
    y: &DVector<f64>,
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
) -> Result<ClassifierStatistics> {
    check_dims(y, matrix, hypotheses)?;
    let factor = GramFactor::new(matrix)?;
    matched_filter_statistics_with(y, matrix, hypotheses, &factor)
}

/// Same as [`matched_filter_statistics`] with a precomputed Gram factor.
pub fn matched_filter_statistics_with(
    y: &DVector<f64>,
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    factor: &GramFactor,
) -> Result<ClassifierStatistics> {
    check_dims(y, matrix, hypotheses)?;
    let values: Vec<f64> = hypotheses
        .signals()
        .iter()
        .map(|s| {
            let phi_s = matrix.entries() * s.values();
            let z = factor.solve(&phi_s);
            // ||P s||^2 = s^T Phi^T (Phi Phi^T)^-1 Phi s = <Phi s, z>
            y.dot(&z) - 0.5 * phi_s.dot(&z)
        })
        .collect();
    let decided_index = argmax_lowest(&values);
    Ok(ClassifierStatistics {
        values,
        decided_index,
        kind: ClassifierKind::MatchedFilter,
    })
}

/// Argmax decision: returns the decided 0-based index.
pub fn classify(
    y: &DVector<f64>,
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    kind: ClassifierKind,
) -> Result<usize> {
    let stats = match kind {
        ClassifierKind::Correlation => correlation_statistics(y, matrix, hypotheses)?,
        ClassifierKind::MatchedFilter => matched_filter_statistics(y, matrix, hypotheses)?,
    };
    Ok(stats.decided_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::SparseSignal;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn orthonormal_rows(n: usize, cols: usize) -> MeasurementMatrix {
        MeasurementMatrix::generate_gaussian(n, cols, 17)
            .unwrap()
            .tighten(1.0)
            .unwrap()
    }

    #[test]
    fn noiseless_correct_decision() {
        let m = orthonormal_rows(4, 10);
        let h = HypothesisSet::generate(10, 2, 2, 1.0, 3).unwrap();
        let y = m.entries() * h.signals()[0].values();
        let stats = correlation_statistics(&y, &m, &h).unwrap();
        assert_eq!(stats.decided_index, 0);
        let phi_s1 = m.entries() * h.signals()[0].values();
        assert_relative_eq!(
            stats.values[0],
            0.5 * phi_s1.norm_squared(),
            max_relative = 1e-12
        );
        assert!(stats.values[0] > stats.values[1]);
    }

    #[test]
    fn zero_measurement_ties_to_lowest_index() {
        // Phi = [I_4 | 0] and unit coordinate signals: every ||Phi s_i||
        // is exactly 1, so y = 0 produces an exact three-way tie.
        let m = MeasurementMatrix::new(DMatrix::from_fn(4, 10, |i, j| {
            if i == j {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        let signals = (0..3)
            .map(|i| {
                let mut v = nalgebra::DVector::zeros(10);
                v[i] = 1.0;
                SparseSignal::new(v, 1).unwrap()
            })
            .collect();
        let h = HypothesisSet::new(signals).unwrap();
        let y = nalgebra::DVector::zeros(4);
        let stats = correlation_statistics(&y, &m, &h).unwrap();
        assert_eq!(stats.values, vec![-0.5, -0.5, -0.5]);
        assert_eq!(stats.decided_index, 0);
    }

    #[test]
    fn correlation_matches_direct_evaluation() {
        let m = MeasurementMatrix::generate_gaussian(5, 12, 2).unwrap();
        let h = HypothesisSet::generate(12, 3, 4, 1.3, 6).unwrap();
        let noise = crate::signals::NoiseModel::new(0.4, 12).unwrap();
        let y =
            crate::signals::sample_noisy_measurement(&m, &h.signals()[1], &noise, 9).unwrap();
        let stats = correlation_statistics(&y, &m, &h).unwrap();
        for (i, s) in h.signals().iter().enumerate() {
            let mut expected = 0.0;
            let mut norm2 = 0.0;
            for r in 0..5 {
                let mut phi_s_r = 0.0;
                for c in 0..12 {
                    phi_s_r += m.entries()[(r, c)] * s.values()[c];
                }
                expected += y[r] * phi_s_r;
                norm2 += phi_s_r * phi_s_r;
            }
            expected -= 0.5 * norm2;
            assert_relative_eq!(stats.values[i], expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn matched_filter_equals_correlation_for_row_orthonormal() {
        let m = orthonormal_rows(6, 15);
        let h = HypothesisSet::generate(15, 2, 3, 1.0, 5).unwrap();
        let noise = crate::signals::NoiseModel::new(0.3, 15).unwrap();
        let y =
            crate::signals::sample_noisy_measurement(&m, &h.signals()[2], &noise, 77).unwrap();
        let corr = correlation_statistics(&y, &m, &h).unwrap();
        let mf = matched_filter_statistics(&y, &m, &h).unwrap();
        for (a, b) in corr.values.iter().zip(&mf.values) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
        }
        assert_eq!(corr.decided_index, mf.decided_index);
    }

    #[test]
    fn matched_filter_matches_explicit_inverse() {
        let m = MeasurementMatrix::generate_gaussian(5, 12, 4).unwrap();
        let h = HypothesisSet::generate(12, 3, 3, 1.0, 2).unwrap();
        let noise = crate::signals::NoiseModel::new(0.5, 12).unwrap();
        let y =
            crate::signals::sample_noisy_measurement(&m, &h.signals()[0], &noise, 13).unwrap();
        let stats = matched_filter_statistics(&y, &m, &h).unwrap();

        // Oracle: explicitly formed inverse and projector.
        let gram = m.entries() * m.entries().transpose();
        let inv = gram.try_inverse().unwrap();
        let proj = m.entries().transpose() * &inv * m.entries();
        for (i, s) in h.signals().iter().enumerate() {
            let filt = &inv * (m.entries() * s.values());
            let ps = &proj * s.values();
            let expected = y.dot(&filt) - 0.5 * ps.norm_squared();
            assert_relative_eq!(stats.values[i], expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn matched_filter_noiseless_recovers_truth() {
        let m = MeasurementMatrix::generate_gaussian(8, 20, 6).unwrap();
        let h = HypothesisSet::generate(20, 2, 10, 1.0, 10).unwrap();
        for (t, s) in h.signals().iter().enumerate() {
            let y = m.entries() * s.values();
            assert_eq!(
                classify(&y, &m, &h, ClassifierKind::MatchedFilter).unwrap(),
                t
            );
        }
    }

    #[test]
    fn noiseless_mary_correlation_with_tight_frame() {
        let m = orthonormal_rows(10, 30);
        let h = HypothesisSet::generate(30, 1, 10, 1.0, 1).unwrap();
        for (t, s) in h.signals().iter().enumerate() {
            let y = m.entries() * s.values();
            assert_eq!(classify(&y, &m, &h, ClassifierKind::Correlation).unwrap(), t);
        }
    }

    #[test]
    fn dimension_mismatch_detected() {
        let m = MeasurementMatrix::generate_gaussian(4, 10, 1).unwrap();
        let h = HypothesisSet::generate(12, 2, 2, 1.0, 1).unwrap();
        let y = nalgebra::DVector::zeros(4);
        assert!(matches!(
            correlation_statistics(&y, &m, &h),
            Err(Error::DimensionMismatch(_))
        ));
        let h2 = HypothesisSet::generate(10, 2, 2, 1.0, 1).unwrap();
        let y_bad = nalgebra::DVector::zeros(5);
        assert!(matches!(
            matched_filter_statistics(&y_bad, &m, &h2),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
