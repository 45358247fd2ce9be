//! Closed-form error probabilities for compressive classification.
//!
//! The 2-ary error probability of the correlation classifier is
//! `Q(r / (2 sigma))` where `r = ||Phi d||^2 / ||Phi^T Phi d||` is the
//! separation ratio for the signal difference `d = s1 - s2`. Tightening
//! the matrix never decreases the ratio, with equality exactly for tight
//! frames. For m hypotheses the union bound sums the pairwise terms.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::frames::MeasurementMatrix;
use crate::signals::{HypothesisSet, SparseSignal};

/// Gaussian upper-tail probability Q(x) = P(Z > x) for Z ~ N(0,1),
/// via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Exact2ary,
    UnionBoundMary,
}

/// A theoretical error probability (exact for 2-ary, a bound for m-ary).
#[derive(Debug, Clone, Copy)]
pub struct TheoreticalError {
    /// Clamped to [0, 1].
    pub probability: f64,
    /// The Q-function argument for the 2-ary case; not meaningful for the
    /// union bound.
    pub argument: Option<f64>,
    /// Raw value before clamping; the union bound can exceed 1 at low SNR.
    pub unclamped: f64,
    pub kind: ErrorKind,
}

fn difference(s1: &SparseSignal, s2: &SparseSignal) -> Result<DVector<f64>> {
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "signal lengths {} and {}",
            s1.len(),
            s2.len()
        )));
    }
    Ok(s1.values() - s2.values())
}

fn ratio_of_difference(matrix: &MeasurementMatrix, d: &DVector<f64>) -> Result<f64> {
    if d.len() != matrix.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} columns, difference length {}",
            matrix.cols(),
            d.len()
        )));
    }
    let phi_d = matrix.entries() * d;
    let num = phi_d.norm_squared();
    let den = (matrix.entries().transpose() * &phi_d).norm();
    if num <= f64::MIN_POSITIVE || den <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateDifference);
    }
    Ok(num / den)
}

/// ||Phi (s1 - s2)||^2 / ||Phi^T Phi (s1 - s2)||.
///
/// For a row-orthogonal matrix this reduces to ||Phi (s1 - s2)||.
pub fn separation_ratio(
    matrix: &MeasurementMatrix,
    s1: &SparseSignal,
    s2: &SparseSignal,
) -> Result<f64> {
    ratio_of_difference(matrix, &difference(s1, s2)?)
}

/// Exact 2-ary error probability `Q(ratio / (2 sigma))`.
pub fn error_probability_2ary(
    matrix: &MeasurementMatrix,
    s1: &SparseSignal,
    s2: &SparseSignal,
    sigma: f64,
) -> Result<TheoreticalError> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidConstant(sigma));
    }
    let ratio = separation_ratio(matrix, s1, s2)?;
    let argument = ratio / (2.0 * sigma);
    let probability = q_function(argument);
    Ok(TheoreticalError {
        probability,
        argument: Some(argument),
        unclamped: probability,
        kind: ErrorKind::Exact2ary,
    })
}

/// Separation ratios before and after tightening with c = 1.
///
/// The ratio never decreases under tightening, and is unchanged when the
/// input is already tight.
#[derive(Debug, Clone, Copy)]
pub struct Theorem2Gap {
    pub ratio_before: f64,
    pub ratio_after: f64,
}

impl Theorem2Gap {
    /// Whether the inequality holds within a relative slack.
    pub fn holds(&self, relative_slack: f64) -> bool {
        self.ratio_before <= self.ratio_after + relative_slack * self.ratio_after
    }
}

pub fn theorem2_gap(
    matrix: &MeasurementMatrix,
    s1: &SparseSignal,
    s2: &SparseSignal,
) -> Result<Theorem2Gap> {
    let ratio_before = separation_ratio(matrix, s1, s2)?;
    let tightened = matrix.tighten(1.0)?;
    let ratio_after = separation_ratio(&tightened, s1, s2)?;
    Ok(Theorem2Gap {
        ratio_before,
        ratio_after,
    })
}

/// Union bound on the m-ary error probability: the sum of pairwise 2-ary
/// terms against the true hypothesis. Equals the 2-ary formula when m = 2.
pub fn union_bound_mary(
    matrix: &MeasurementMatrix,
    hypotheses: &HypothesisSet,
    sigma: f64,
    true_index: usize,
) -> Result<TheoreticalError> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidConstant(sigma));
    }
    if true_index >= hypotheses.len() {
        return Err(Error::DimensionMismatch(format!(
            "true index {} out of range for m = {}",
            true_index,
            hypotheses.len()
        )));
    }
    let truth = &hypotheses.signals()[true_index];
    let mut sum = 0.0;
    let mut only_argument = None;
    for (i, other) in hypotheses.signals().iter().enumerate() {
        if i == true_index {
            continue;
        }
        let ratio = separation_ratio(matrix, truth, other)?;
        let argument = ratio / (2.0 * sigma);
        sum += q_function(argument);
        only_argument = Some(argument);
    }
    if hypotheses.len() == 2 {
        return Ok(TheoreticalError {
            probability: sum,
            argument: only_argument,
            unclamped: sum,
            kind: ErrorKind::Exact2ary,
        });
    }
    Ok(TheoreticalError {
        probability: sum.min(1.0),
        argument: None,
        unclamped: sum,
        kind: ErrorKind::UnionBoundMary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn signal(dim: usize, entries: &[(usize, f64)]) -> SparseSignal {
        let mut v = DVector::zeros(dim);
        for &(i, x) in entries {
            v[i] = x;
        }
        SparseSignal::new(v, entries.len()).unwrap()
    }

    #[test]
    fn q_function_basics() {
        assert_relative_eq!(q_function(0.0), 0.5);
        assert_relative_eq!(q_function(1.0), 0.158655253931, max_relative = 1e-11);
        for &x in &[-3.0, -0.7, 0.2, 1.5, 4.0] {
            assert_relative_eq!(q_function(x) + q_function(-x), 1.0, epsilon = 1e-14);
        }
        // strictly decreasing on a grid
        let mut prev = q_function(-8.0);
        let mut x = -8.0 + 0.25;
        while x <= 8.0 {
            let q = q_function(x);
            assert!(q < prev);
            prev = q;
            x += 0.25;
        }
    }

    #[test]
    fn q_function_tail_envelope() {
        // phi(x) * (x / (1 + x^2)) <= Q(x) <= phi(x) / x for x > 0
        for &x in &[0.5f64, 1.0, 2.0, 4.0, 8.0] {
            let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let q = q_function(x);
            assert!(q <= phi / x * (1.0 + 1e-14));
            assert!(q >= phi * x / (1.0 + x * x) * (1.0 - 1e-14));
        }
    }

    #[test]
    fn ratio_reduces_for_row_orthogonal() {
        let m = MeasurementMatrix::generate_gaussian(6, 15, 1)
            .unwrap()
            .tighten(1.0)
            .unwrap();
        let s1 = signal(15, &[(0, 1.0), (3, -2.0)]);
        let s2 = signal(15, &[(5, 0.7)]);
        let d = s1.values() - s2.values();
        let expected = (m.entries() * d).norm();
        assert_relative_eq!(
            separation_ratio(&m, &s1, &s2).unwrap(),
            expected,
            max_relative = 1e-10
        );
    }

    #[test]
    fn ratio_identity_padded_matrix() {
        let m = MeasurementMatrix::new(DMatrix::from_fn(3, 8, |i, j| {
            if i == j {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        let s1 = signal(8, &[(0, 2.0)]);
        let s2 = signal(8, &[(2, 1.0)]);
        let expected = (s1.values() - s2.values()).norm();
        assert_relative_eq!(
            separation_ratio(&m, &s1, &s2).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn ratio_matches_singular_value_form() {
        // sum(sigma_j^2 u_j^2) / sqrt(sum(sigma_j^4 u_j^2)), u = V^T d.
        let m = MeasurementMatrix::generate_gaussian(5, 12, 8).unwrap();
        let s1 = signal(12, &[(1, 1.5), (7, -0.3)]);
        let s2 = signal(12, &[(4, 2.0)]);
        let f = m.decompose().unwrap();
        let u = f.v.transpose() * (s1.values() - s2.values());
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..5 {
            let s2j = f.singular_values[j] * f.singular_values[j];
            num += s2j * u[j] * u[j];
            den += s2j * s2j * u[j] * u[j];
        }
        let expected = num / den.sqrt();
        assert_relative_eq!(
            separation_ratio(&m, &s1, &s2).unwrap(),
            expected,
            max_relative = 1e-10
        );
    }

    #[test]
    fn ratio_degenerate_difference() {
        let m = MeasurementMatrix::generate_gaussian(4, 10, 3).unwrap();
        let s = signal(10, &[(2, 1.0)]);
        assert!(matches!(
            separation_ratio(&m, &s, &s),
            Err(Error::DegenerateDifference)
        ));
    }

    #[test]
    fn error_probability_limits() {
        let m = MeasurementMatrix::generate_gaussian(4, 10, 5).unwrap();
        let s1 = signal(10, &[(0, 1.0)]);
        let s2 = signal(10, &[(1, 1.0)]);
        let huge = error_probability_2ary(&m, &s1, &s2, 1e12).unwrap();
        assert_relative_eq!(huge.probability, 0.5, max_relative = 1e-6);
        let tiny = error_probability_2ary(&m, &s1, &s2, 1e-6).unwrap();
        assert!(tiny.probability < 1e-10);
    }

    #[test]
    fn error_probability_q_of_one() {
        // Row-orthogonal matrix, ||Phi d|| = 2, sigma = 1 -> Q(1).
        let m = MeasurementMatrix::new(DMatrix::from_fn(2, 5, |i, j| {
            if i == j {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        let s1 = signal(5, &[(0, 1.0), (1, 1.0)]);
        let s2 = signal(5, &[(0, -1.0), (1, 1.0)]);
        let e = error_probability_2ary(&m, &s1, &s2, 1.0).unwrap();
        assert_relative_eq!(e.argument.unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(e.probability, 0.158655253931, max_relative = 1e-10);
    }

    #[test]
    fn tightened_error_matches_projected_form() {
        // For the unit-constant tightening the probability equals
        // Q(||tightened d|| / (2 sigma)), which is the matched-filter form
        // Q(||P d|| / (2 sigma)) with the row-space projector of the
        // original matrix. The choice of tightening constant does not
        // change the probability (the ratio of the tight frame is
        // c-invariant).
        let m = MeasurementMatrix::generate_gaussian(5, 12, 6).unwrap();
        let t = m.tighten(1.0).unwrap();
        let s1 = signal(12, &[(0, 1.0)]);
        let s2 = signal(12, &[(3, 1.0)]);
        let sigma = 0.4;
        let e = error_probability_2ary(&t, &s1, &s2, sigma).unwrap();
        let d = s1.values() - s2.values();
        let expected = q_function((t.entries() * &d).norm() / (2.0 * sigma));
        assert_relative_eq!(e.probability, expected, max_relative = 1e-10);
        let proj = m.row_space_projector().unwrap();
        let expected_proj = q_function((proj * &d).norm() / (2.0 * sigma));
        assert_relative_eq!(e.probability, expected_proj, max_relative = 1e-9);

        let t2 = m.tighten(2.0).unwrap();
        let e2 = error_probability_2ary(&t2, &s1, &s2, sigma).unwrap();
        assert_relative_eq!(e2.probability, e.probability, max_relative = 1e-10);
    }

    #[test]
    fn theorem2_examples() {
        // Tight input: equality.
        let tight = MeasurementMatrix::generate_gaussian(4, 10, 2)
            .unwrap()
            .tighten(1.0)
            .unwrap();
        let s1 = signal(10, &[(0, 1.0), (5, 1.0)]);
        let s2 = signal(10, &[(2, -1.0)]);
        let gap = theorem2_gap(&tight, &s1, &s2).unwrap();
        assert_relative_eq!(gap.ratio_before, gap.ratio_after, max_relative = 1e-10);
        assert!(gap.holds(1e-10));

        // Difference aligned with one singular direction: equality even
        // though the matrix is not tight. Phi = diag(2,1) padded.
        let m = MeasurementMatrix::new(DMatrix::from_fn(2, 5, |i, j| {
            if i == j {
                (2 - i) as f64
            } else {
                0.0
            }
        }))
        .unwrap();
        let a = signal(5, &[(0, 1.0)]);
        let b = signal(5, &[(0, -1.0)]);
        let gap = theorem2_gap(&m, &a, &b).unwrap();
        assert_relative_eq!(gap.ratio_before, gap.ratio_after, max_relative = 1e-12);

        // Spread over both directions with distinct singular values:
        // strict inequality. By hand with sigma = (2,1), u = (1,1):
        // before = (4+1)/sqrt(16+1) = 5/sqrt(17), after = sqrt(2).
        let c = signal(5, &[(0, 1.0), (1, 1.0)]);
        let dzero = signal(5, &[(4, 0.0)]);
        let gap = theorem2_gap(&m, &c, &dzero).unwrap();
        assert_relative_eq!(
            gap.ratio_before,
            5.0 / 17f64.sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(gap.ratio_after, 2f64.sqrt(), max_relative = 1e-12);
        assert!(gap.ratio_before < gap.ratio_after);
    }

    #[test]
    fn ratio_is_invariant_under_matrix_scale() {
        // Numerator and denominator both scale as alpha^2, so the ratio
        // (and therefore the 2-ary probability) is unchanged by Phi ->
        // alpha * Phi. Noise enters before measurement, so rescaling the
        // matrix cannot change the error probability.
        let m = MeasurementMatrix::generate_gaussian(5, 12, 9).unwrap();
        let alpha = 3.25;
        let scaled = MeasurementMatrix::new(m.entries() * alpha).unwrap();
        let s1 = signal(12, &[(0, 1.0), (6, 2.0)]);
        let s2 = signal(12, &[(3, -1.0)]);
        let r = separation_ratio(&m, &s1, &s2).unwrap();
        let rs = separation_ratio(&scaled, &s1, &s2).unwrap();
        assert_relative_eq!(rs, r, max_relative = 1e-12);
        let sigma = 0.6;
        let p = error_probability_2ary(&m, &s1, &s2, sigma).unwrap();
        let ps = error_probability_2ary(&scaled, &s1, &s2, sigma).unwrap();
        assert_relative_eq!(ps.probability, p.probability, max_relative = 1e-12);
    }

    #[test]
    fn union_bound_m2_equals_exact() {
        let m = MeasurementMatrix::generate_gaussian(4, 10, 7).unwrap();
        let h = HypothesisSet::generate(10, 2, 2, 1.0, 11).unwrap();
        let sigma = 0.5;
        let exact =
            error_probability_2ary(&m, &h.signals()[0], &h.signals()[1], sigma).unwrap();
        let bound = union_bound_mary(&m, &h, sigma, 0).unwrap();
        assert_eq!(bound.kind, ErrorKind::Exact2ary);
        assert_eq!(bound.probability, exact.probability);
    }

    #[test]
    fn union_bound_symmetric_geometry() {
        // Unit coordinate signals through a tight frame built from a
        // harmonic matrix: all pairwise ratios coincide, so the bound is
        // (m-1) * Q(single argument).
        let m = MeasurementMatrix::new(DMatrix::from_fn(4, 10, |i, j| {
            if i == j {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        let signals = (0..4)
            .map(|i| {
                let mut v = DVector::zeros(10);
                v[i] = 1.0;
                SparseSignal::new(v, 1).unwrap()
            })
            .collect();
        let h = HypothesisSet::new(signals).unwrap();
        let sigma = 0.8;
        let bound = union_bound_mary(&m, &h, sigma, 0).unwrap();
        let single = q_function(2f64.sqrt() / (2.0 * sigma));
        assert_relative_eq!(bound.unclamped, 3.0 * single, max_relative = 1e-12);
    }

    #[test]
    fn union_bound_clamps_but_keeps_raw() {
        let m = MeasurementMatrix::generate_gaussian(10, 30, 1).unwrap();
        let h = HypothesisSet::generate(30, 1, 10, 1.0, 2).unwrap();
        let bound = union_bound_mary(&m, &h, 100.0, 0).unwrap();
        assert_eq!(bound.probability, 1.0);
        assert_relative_eq!(bound.unclamped, 4.5, max_relative = 0.05); // 9 * ~0.5
    }
}
