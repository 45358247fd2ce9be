//! Measurement matrices: construction, SVD factorization, frame
//! certification, and tightening (row-orthogonalization).
//!
//! A matrix is a tight frame when its rows are orthogonal with a common
//! scale, `Phi * Phi^T = c * I`. Tightening replaces all singular values
//! of a full-row-rank matrix by a common value while preserving its row
//! space, via `sqrt(c) * U * Sigma^-1 * U^T * Phi`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Relative threshold on sigma_min/sigma_max below which a matrix is
/// treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Relative Frobenius residual below which `Phi*Phi^T = c*I` is certified.
pub const TIGHT_TOL: f64 = 1e-8;
/// Relative spread of column norms below which columns count as equi-norm.
pub const NORM_TOL: f64 = 1e-8;
/// Tolerance on row-space projector agreement.
pub const PROJ_TOL: f64 = 1e-8;

/// An under-determined (n < N) real measurement matrix with a lazily
/// cached SVD.
#[derive(Debug)]
pub struct MeasurementMatrix {
    entries: DMatrix<f64>,
    svd: OnceLock<SvdFactors>,
}

impl Clone for MeasurementMatrix {
    fn clone(&self) -> Self {
        Self {
            entries: self.entries.clone(),
            svd: self.svd.clone(),
        }
    }
}

impl MeasurementMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (n, cols) = entries.shape();
        if n == 0 || n >= cols {
            return Err(Error::BadDimensions { n, cols });
        }
        Ok(Self {
            entries,
            svd: OnceLock::new(),
        })
    }

    /// Harmonic frame from n/2 cosine and n/2 sine rows at integer
    /// frequencies 1..n/2: an exact equi-norm tight frame with
    /// `Phi*Phi^T = I` and every column norm sqrt(n/N). Requires n even
    /// and n < N - 1 so row orthogonality is exact.
    pub fn harmonic(n: usize, cols: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) || n + 1 >= cols {
            return Err(Error::BadDimensions { n, cols });
        }
        let scale = (2.0 / cols as f64).sqrt();
        let entries = DMatrix::from_fn(n, cols, |i, j| {
            let freq = (i / 2 + 1) as f64;
            let angle = 2.0 * std::f64::consts::PI * freq * j as f64 / cols as f64;
            if i % 2 == 0 {
                scale * angle.cos()
            } else {
                scale * angle.sin()
            }
        });
        Self::new(entries)
    }

    /// i.i.d. standard normal entries, deterministic per seed.
    ///
    /// Fails with `RankDeficient` in the (probability-zero) event that the
    /// draw is not full row rank.
    pub fn generate_gaussian(n: usize, cols: usize, seed: u64) -> Result<Self> {
        if n == 0 || n >= cols {
            return Err(Error::BadDimensions { n, cols });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries =
            DMatrix::from_fn(n, cols, |_, _| StandardNormal.sample(&mut rng));
        let m = Self::new(entries)?;
        m.decompose()?;
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// SVD factors, computed on first use and cached.
    pub fn decompose(&self) -> Result<&SvdFactors> {
        if let Some(f) = self.svd.get() {
            return Ok(f);
        }
        let f = SvdFactors::compute(&self.entries)?;
        Ok(self.svd.get_or_init(|| f))
    }

    /// `sqrt(c) * U * Sigma^-1 * U^T * Phi`: all singular values become
    /// sqrt(c), so the result satisfies `out * out^T = c * I` and spans
    /// the same row space.
    pub fn tighten(&self, c: f64) -> Result<Self> {
        if c.is_nan() || c <= 0.0 {
            return Err(Error::InvalidConstant(c));
        }
        let f = self.decompose()?;
        let n = self.rows();
        // U * Sigma^-1 * U^T without forming the inverse explicitly.
        let mut scaled_ut = f.u.transpose();
        for (j, mut row) in scaled_ut.row_iter_mut().enumerate() {
            row *= 1.0 / f.singular_values[j];
        }
        let whitener = &f.u * scaled_ut;
        let entries = (whitener * &self.entries) * c.sqrt();
        debug_assert_eq!(entries.shape(), (n, self.cols()));
        Ok(Self {
            entries,
            svd: OnceLock::new(),
        })
    }

    /// Convenience form of [`tighten`](Self::tighten) that preserves total
    /// column energy: c = (N/n) * psi^2 with psi the mean column norm.
    pub fn tighten_energy_preserving(&self) -> Result<Self> {
        let psi = self.mean_column_norm();
        let c = (self.cols() as f64 / self.rows() as f64) * psi * psi;
        self.tighten(c)
    }

    /// Rescales every column to norm `psi`.
    pub fn normalize_columns(&self, psi: f64) -> Result<Self> {
        if psi.is_nan() || psi <= 0.0 {
            return Err(Error::InvalidConstant(psi));
        }
        let mut entries = self.entries.clone();
        for (j, mut col) in entries.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::ZeroColumn(j));
            }
            col *= psi / norm;
        }
        Ok(Self {
            entries,
            svd: OnceLock::new(),
        })
    }

    /// Tightness and equi-norm certificate, from direct evaluation of the
    /// Gram residual `||Phi*Phi^T - c*I||_F / (c*sqrt(n))` with
    /// c = trace(Phi*Phi^T)/n.
    pub fn certify(&self) -> FrameCertificate {
        let n = self.rows();
        let gram = &self.entries * self.entries.transpose();
        let c = gram.trace() / n as f64;
        let mut residual2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { c } else { 0.0 };
                let d = gram[(i, j)] - target;
                residual2 += d * d;
            }
        }
        let tightness_residual = residual2.sqrt() / (c * (n as f64).sqrt());
        let is_tight = tightness_residual <= TIGHT_TOL;

        let norms: Vec<f64> = self.entries.column_iter().map(|c| c.norm()).collect();
        let max = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        let is_equinorm = max - min <= NORM_TOL * max;

        FrameCertificate {
            is_tight,
            frame_constant_c: is_tight.then_some(c),
            is_equinorm,
            column_norm_psi: is_equinorm.then(|| self.mean_column_norm()),
            tightness_residual,
        }
    }

    fn mean_column_norm(&self) -> f64 {
        let cols = self.cols() as f64;
        self.entries.column_iter().map(|c| c.norm()).sum::<f64>() / cols
    }

    /// Orthogonal projector onto the row space, `V_thin * V_thin^T`.
    pub fn row_space_projector(&self) -> Result<DMatrix<f64>> {
        let f = self.decompose()?;
        let v_thin = f.v.columns(0, self.rows());
        Ok(v_thin * v_thin.transpose())
    }
}

/// Full SVD `Phi = U [Sigma 0] V^T` with U n-by-n, V N-by-N orthogonal and
/// singular values sorted descending.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    fn compute(entries: &DMatrix<f64>) -> Result<Self> {
        let (n, cols) = entries.shape();
        let svd = entries.clone().svd(true, true);
        let u = svd.u.expect("svd requested u");
        let v_t = svd.v_t.expect("svd requested v_t");
        let singular_values = svd.singular_values;

        let sigma_max = singular_values[0];
        let sigma_min = singular_values[n - 1];
        let ratio = sigma_min / sigma_max;
        if ratio.is_nan() || ratio <= RANK_TOL {
            return Err(Error::RankDeficient {
                ratio,
                tol: RANK_TOL,
            });
        }

        let v = complete_orthonormal(v_t.transpose(), cols);
        Ok(Self {
            u,
            singular_values,
            v,
        })
    }

    /// `U [Sigma 0] V^T`, for residual checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.u.nrows();
        let cols = self.v.nrows();
        let mut sigma = DMatrix::zeros(n, cols);
        for j in 0..n {
            sigma[(j, j)] = self.singular_values[j];
        }
        &self.u * sigma * self.v.transpose()
    }
}

/// Extends thin right singular vectors (N-by-n, orthonormal columns) to a
/// full N-by-N orthogonal matrix by Gram-Schmidt over the standard basis,
/// with one reorthogonalization pass.
fn complete_orthonormal(v_thin: DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let k = v_thin.ncols();
    let mut full = DMatrix::zeros(dim, dim);
    full.columns_mut(0, k).copy_from(&v_thin);
    let mut have = k;
    let mut e = 0;
    while have < dim {
        let mut cand = DVector::zeros(dim);
        cand[e] = 1.0;
        e += 1;
        for _pass in 0..2 {
            for j in 0..have {
                let col = full.column(j);
                let proj = col.dot(&cand);
                cand -= proj * DVector::from(col);
            }
        }
        let norm = cand.norm();
        if norm > 1e-8 {
            full.column_mut(have).copy_from(&(cand / norm));
            have += 1;
        }
    }
    full
}

/// Result of [`MeasurementMatrix::certify`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCertificate {
    pub is_tight: bool,
    /// trace(Phi*Phi^T)/n; present only when tight.
    pub frame_constant_c: Option<f64>,
    pub is_equinorm: bool,
    /// Mean column norm; present only when equi-norm.
    pub column_norm_psi: Option<f64>,
    pub tightness_residual: f64,
}

impl FrameCertificate {
    /// Corollary check: a tight equi-norm frame must satisfy
    /// c = (N/n) * psi^2 (a trace identity).
    pub fn frame_constant_matches_column_norms(&self, n: usize, cols: usize) -> Option<bool> {
        match (self.frame_constant_c, self.column_norm_psi) {
            (Some(c), Some(psi)) => {
                let predicted = (cols as f64 / n as f64) * psi * psi;
                Some((c - predicted).abs() <= TIGHT_TOL * c)
            }
            _ => None,
        }
    }
}
