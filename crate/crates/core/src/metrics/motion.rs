//! Fréchet Motion Distance between distributions of normalized relative box motion.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::Serialize;

use super::MetricsError;
use crate::st::VideoSt;
use crate::timeline::expand_track;

/// Diagonal load added to every covariance estimate.
pub const COV_EPSILON: f64 = 1e-10;
/// Negative eigenvalues down to this are treated as rounding noise and clamped to 0.
pub const EIGEN_CLAMP: f64 = 1e-8;

/// Box change relative to the first visible frame, normalized by canvas width/height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionVector {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
}

impl MotionVector {
    pub fn to_array(self) -> [f64; 4] {
        [self.dx, self.dy, self.dw, self.dh]
    }
}

/// Pooled motion vectors of every animated foreground object in `doc`.
pub fn motion_vectors(doc: &VideoSt) -> Vec<MotionVector> {
    let (w, h) = (f64::from(doc.canvas.width), f64::from(doc.canvas.height));
    let mut out = Vec::new();
    for track in &doc.animation.tracks {
        let ft = expand_track(track, doc.animation.duration);
        let Some((start, b0)) = ft.first_visible() else { continue };
        for b in ft.boxes[start + 1..].iter().flatten() {
            out.push(MotionVector {
                dx: b.x1 / w - b0.x1 / w,
                dy: b.y1 / h - b0.y1 / h,
                dw: b.w / w - b0.w / w,
                dh: b.h / h - b0.h / h,
            });
        }
    }
    out
}

pub fn corpus_motion_vectors<'a>(docs: impl IntoIterator<Item = &'a VideoSt>) -> Vec<MotionVector> {
    docs.into_iter().flat_map(motion_vectors).collect()
}

/// Gaussian summary of a motion-vector set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotionStats {
    pub mean: [f64; 4],
    /// Row-major sample covariance (divisor n−1) plus `COV_EPSILON`·I.
    pub cov: [[f64; 4]; 4],
    pub n: usize,
}

impl MotionStats {
    /// Builds stats directly from a mean and covariance (no regularization applied).
    pub fn from_parts(mean: [f64; 4], cov: [[f64; 4]; 4], n: usize) -> Self {
        Self { mean, cov, n }
    }

    pub fn mean_vector(&self) -> Vector4<f64> {
        Vector4::from(self.mean)
    }

    pub fn cov_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.cov[i][j])
    }
}

pub fn gaussian_stats(vectors: &[MotionVector]) -> Result<MotionStats, MetricsError> {
    let n = vectors.len();
    if n < 2 {
        return Err(MetricsError::InsufficientSamples { n });
    }
    let rows: Vec<Vector4<f64>> = vectors.iter().map(|v| Vector4::from(v.to_array())).collect();
    let mean = rows.iter().sum::<Vector4<f64>>() / n as f64;
    let mut cov = Matrix4::<f64>::zeros();
    for r in &rows {
        let d = r - mean;
        cov += d * d.transpose();
    }
    cov /= (n - 1) as f64;
    cov += Matrix4::identity() * COV_EPSILON;
    Ok(MotionStats {
        mean: mean.into(),
        cov: std::array::from_fn(|i| std::array::from_fn(|j| cov[(i, j)])),
        n,
    })
}

/// Square root of a symmetric PSD matrix through its eigendecomposition.
fn psd_sqrt(m: &Matrix4<f64>, which: &'static str) -> Result<Matrix4<f64>, MetricsError> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut roots = Vector4::zeros();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l < -EIGEN_CLAMP || !l.is_finite() {
            return Err(MetricsError::NumericalFailure(format!(
                "{which} covariance has eigenvalue {l:e} below the PSD tolerance"
            )));
        }
        roots[i] = l.max(0.0).sqrt();
    }
    Ok(eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// `Tr((Σ_r Σ_g)^{1/2})` for symmetric PSD inputs.
///
/// Evaluated as the sum of singular values of `Σ_g^{1/2} Σ_r^{1/2}`, whose squares are
/// the eigenvalues of `Σ_r^{1/2} Σ_g Σ_r^{1/2}` (and of `Σ_r Σ_g`). Working with singular
/// values avoids square-rooting eigenvalues that are pure rounding noise.
pub fn trace_sqrt_product(sigma_r: &Matrix4<f64>, sigma_g: &Matrix4<f64>) -> Result<f64, MetricsError> {
    let root_r = psd_sqrt(sigma_r, "first")?;
    let root_g = psd_sqrt(sigma_g, "second")?;
    let svd = (root_g * root_r).svd(false, false);
    let total: f64 = svd.singular_values.iter().sum();
    if !total.is_finite() {
        return Err(MetricsError::NumericalFailure("non-finite trace".into()));
    }
    Ok(total)
}

/// `‖μ_r − μ_g‖² + Tr(Σ_r + Σ_g − 2 (Σ_r Σ_g)^{1/2})`, clamped at 0 within rounding.
pub fn fmd(real: &MotionStats, gen: &MotionStats) -> Result<f64, MetricsError> {
    let (sr, sg) = (real.cov_matrix(), gen.cov_matrix());
    let mean_term = (real.mean_vector() - gen.mean_vector()).norm_squared();
    let cross = trace_sqrt_product(&sr, &sg)?;
    let d = mean_term + sr.trace() + sg.trace() - 2.0 * cross;
    if d < 0.0 {
        if d >= -EIGEN_CLAMP {
            return Ok(0.0);
        }
        return Err(MetricsError::NumericalFailure(format!("negative distance {d:e}")));
    }
    Ok(d)
}
