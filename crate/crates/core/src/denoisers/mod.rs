//! Denoising operators `D(·; σ)` that stand in for the image prior.
//!
//! Native denoisers (median, Gaussian, non-local means, sliding DCT
//! thresholding) satisfy `D(z; 0) = z` and commute with adding a constant.
//! The oracle kinds know the ground truth and exist to exercise the
//! convergence guarantees with controllable constants.

mod dct;
mod external;
mod gaussian;
mod median;
mod nlm;
mod oracle;
mod padding;

use std::sync::Arc;

pub use dct::DctParams;
pub use external::{ExternalDenoiser, DEFAULT_TIMEOUT, EXTERNAL_DENOISER_ENV};
pub use gaussian::GaussianParams;
pub use nlm::NlmParams;

use crate::error::{Error, Result};
use crate::image::{ImageGrid, RngState};
use crate::operators::DegradationOperator;

/// Anything that maps a noisy image and a noise level to a cleaner image.
pub trait Denoiser: Send + Sync {
    fn denoise(&self, z: &ImageGrid, sigma: f64) -> Result<ImageGrid>;

    fn name(&self) -> String;
}

/// The supported denoisers with their parameters.
#[derive(Debug, Clone)]
pub enum DenoiserSpec {
    /// Returns its input unchanged.
    Identity,
    /// Median over a `(2·radius+1)²` window; ignores σ except that σ = 0 is the identity.
    Median { radius: usize },
    Gaussian(GaussianParams),
    Nlm(NlmParams),
    DctThreshold(DctParams),
    External(ExternalDenoiser),
    /// `αx + (1−α)z` for a known ground truth `x`.
    OracleLinear { alpha: f64, truth: Arc<ImageGrid> },
    /// Moves `z` toward the ground truth by `α(x − z)`, clipped to length `σ·bound`.
    OracleBounded {
        alpha: f64,
        bound: f64,
        truth: Arc<ImageGrid>,
    },
    /// `z / (1 + γσ²)`, the proximal map of the quadratic prior `(γ/2)‖x‖²`.
    LinearShrink { gamma: f64 },
}

impl Default for DenoiserSpec {
    fn default() -> Self {
        DenoiserSpec::DctThreshold(DctParams::default())
    }
}

impl DenoiserSpec {
    pub fn median3x3() -> Self {
        DenoiserSpec::Median { radius: 1 }
    }

    pub fn oracle_linear(alpha: f64, truth: ImageGrid) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("oracle alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(DenoiserSpec::OracleLinear {
            alpha,
            truth: Arc::new(truth),
        })
    }

    /// Whether this is one of the signal-independent native denoisers.
    pub fn is_native(&self) -> bool {
        matches!(
            self,
            DenoiserSpec::Median { .. }
                | DenoiserSpec::Gaussian(_)
                | DenoiserSpec::Nlm(_)
                | DenoiserSpec::DctThreshold(_)
        )
    }
}

impl Denoiser for DenoiserSpec {
    fn denoise(&self, z: &ImageGrid, sigma: f64) -> Result<ImageGrid> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!(
                "denoiser noise level must be finite and nonnegative, got {sigma}"
            )));
        }
        z.ensure_finite("denoiser input")?;
        let out = match self {
            DenoiserSpec::Identity => z.clone(),
            DenoiserSpec::Median { radius } => median::denoise(z, sigma, *radius),
            DenoiserSpec::Gaussian(p) => gaussian::denoise(z, sigma, p),
            DenoiserSpec::Nlm(p) => nlm::denoise(z, sigma, p),
            DenoiserSpec::DctThreshold(p) => dct::denoise(z, sigma, p),
            DenoiserSpec::External(ext) => return ext.denoise(z, sigma),
            DenoiserSpec::OracleLinear { alpha, truth } => oracle::linear(z, *alpha, truth)?,
            DenoiserSpec::OracleBounded {
                alpha,
                bound,
                truth,
            } => oracle::bounded(z, sigma, *alpha, *bound, truth)?,
            DenoiserSpec::LinearShrink { gamma } => z.scale(1.0 / (1.0 + gamma * sigma * sigma)),
        };
        out.ensure_finite("denoiser output")?;
        Ok(out)
    }

    fn name(&self) -> String {
        match self {
            DenoiserSpec::Identity => "identity".into(),
            DenoiserSpec::Median { radius } => {
                let w = 2 * radius + 1;
                format!("median{w}x{w}")
            }
            DenoiserSpec::Gaussian(_) => "gaussian".into(),
            DenoiserSpec::Nlm(_) => "nlm".into(),
            DenoiserSpec::DctThreshold(_) => "dct".into(),
            DenoiserSpec::External(ext) => format!("external({})", ext.command()),
            DenoiserSpec::OracleLinear { alpha, .. } => format!("oracle_linear({alpha})"),
            DenoiserSpec::OracleBounded { alpha, bound, .. } => {
                format!("oracle_bounded({alpha},{bound})")
            }
            DenoiserSpec::LinearShrink { gamma } => format!("linear_shrink({gamma})"),
        }
    }
}

/// Applies `spec` at noise level `sigma`.
pub fn denoise(spec: &DenoiserSpec, z: &ImageGrid, sigma: f64) -> Result<ImageGrid> {
    spec.denoise(z, sigma)
}

/// Empirical constants of the boundedness and null-space contraction conditions.
///
/// Both are maxima over finitely many samples and therefore lower bounds on
/// the true constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiserDiagnostics {
    /// max ‖D(z;σ) − z‖₂ / σ over every evaluated input.
    pub bound_estimate_b: f64,
    /// max ‖Q_H D(z₁;σ) − Q_H D(z₂;σ)‖₂ / ‖z₁ − z₂‖₂ over the sampled pairs.
    pub contraction_estimate_k: f64,
    pub pairs_evaluated: usize,
    /// min over pairs of `‖z₁−z₂‖ + 2σB − ‖D(z₁)−D(z₂)‖`; nonnegative when the
    /// triangle-inequality bound holds on every pair.
    pub min_triangle_slack: f64,
}

/// Estimates the bound `B` and the contraction factor `K_σ` of `denoiser`
/// relative to `op` on the given samples.
///
/// Pairs are formed from every sample with a Gaussian perturbation of
/// standard deviation σ, with that perturbation projected onto the null space
/// of `H`, and from every pair of distinct samples.
pub fn estimate_conditions(
    denoiser: &dyn Denoiser,
    op: &dyn DegradationOperator,
    samples: &[ImageGrid],
    sigma: f64,
    rng: &mut RngState,
) -> Result<DenoiserDiagnostics> {
    if samples.is_empty() {
        return Err(Error::invalid("estimate_conditions needs at least one sample"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let (h, w) = op.dims();

    // (input, denoised, null-space projection of denoised)
    let mut points: Vec<(ImageGrid, ImageGrid, ImageGrid)> = Vec::new();
    let mut eval = |z: ImageGrid| -> Result<usize> {
        let d = denoiser.denoise(&z, sigma)?;
        let q = op.project_null(&d)?;
        points.push((z, d, q));
        Ok(points.len() - 1)
    };

    let mut pairs = Vec::new();
    let mut base = Vec::with_capacity(samples.len());
    for z in samples {
        z.ensure_dims((h, w))?;
        let i = eval(z.clone())?;
        base.push(i);
        let e = rng.gaussian_image(h, w, sigma)?;
        let j = eval(z.add(&e)?)?;
        pairs.push((i, j));
        let qe = op.project_null(&e)?;
        if qe.norm() > 0.0 {
            let k = eval(z.add(&qe)?)?;
            pairs.push((i, k));
        }
    }
    for (a, &i) in base.iter().enumerate() {
        for &j in &base[a + 1..] {
            pairs.push((i, j));
        }
    }

    let bound = points
        .iter()
        .map(|(z, d, _)| d.distance(z))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max)
        / sigma;

    let mut k_est: f64 = 0.0;
    let mut slack = f64::INFINITY;
    let mut evaluated = 0;
    for (i, j) in pairs {
        let (z1, d1, q1) = &points[i];
        let (z2, d2, q2) = &points[j];
        let dz = z1.distance(z2)?;
        if dz == 0.0 {
            continue;
        }
        evaluated += 1;
        k_est = k_est.max(q1.distance(q2)? / dz);
        slack = slack.min(dz + 2.0 * sigma * bound - d1.distance(d2)?);
    }

    Ok(DenoiserDiagnostics {
        bound_estimate_b: bound,
        contraction_estimate_k: k_est,
        pairs_evaluated: evaluated,
        min_triangle_slack: slack,
    })
}
