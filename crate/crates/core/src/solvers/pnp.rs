use super::{IterationTrace, Measurements, TraceRecord};
use crate::denoisers::Denoiser;
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::operators::{scenario, DegradationOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnpConfig {
    pub beta: f64,
    pub lambda: f64,
    pub iterations: usize,
    /// Noise level used in the data term when `σₙ = 0`.
    pub sigma_floor: f64,
}

impl Default for PnpConfig {
    fn default() -> Self {
        Self::noiseless_inpainting()
    }
}

impl PnpConfig {
    pub fn noiseless_inpainting() -> Self {
        Self {
            beta: 1.0,
            lambda: 10.0 / 255.0,
            iterations: 150,
            sigma_floor: 0.001,
        }
    }

    pub fn noisy_inpainting() -> Self {
        Self {
            beta: 0.8,
            lambda: 5.0 / 255.0,
            ..Self::noiseless_inpainting()
        }
    }

    pub fn deblurring(scenario_id: u8) -> Result<Self> {
        let s = scenario(scenario_id)?;
        Ok(Self {
            beta: s.pnp_beta,
            lambda: s.pnp_lambda,
            iterations: 50,
            sigma_floor: 0.001,
        })
    }

    /// Noise level `√(β/λ)` handed to the denoiser.
    pub fn denoiser_sigma(&self) -> f64 {
        (self.beta / self.lambda).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("lambda", self.lambda), ("sigma_floor", self.sigma_floor)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be positive"));
        }
        let s = self.denoiser_sigma();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("denoiser level sqrt(beta/lambda) = {s} is unusable")));
        }
        Ok(())
    }
}

/// State handed to an observer after each P&P iteration.
#[derive(Debug, Clone, Copy)]
pub struct PnpStep<'a> {
    pub iteration: usize,
    /// `x̌ₖ`.
    pub x: &'a ImageGrid,
    /// `v̌ₖ`.
    pub v: &'a ImageGrid,
    /// `ǔₖ`.
    pub u: &'a ImageGrid,
}

/// Plug-and-play ADMM with `v̌₀ = init`, `ǔ₀ = 0`. Returns the last `x̌`.
pub fn pnp_run(
    op: &dyn DegradationOperator,
    meas: Measurements<'_>,
    denoiser: &dyn Denoiser,
    cfg: &PnpConfig,
    init: &ImageGrid,
) -> Result<(ImageGrid, IterationTrace)> {
    pnp_run_observed(op, meas, denoiser, cfg, init, &mut |_| {})
}

pub fn pnp_run_observed(
    op: &dyn DegradationOperator,
    meas: Measurements<'_>,
    denoiser: &dyn Denoiser,
    cfg: &PnpConfig,
    init: &ImageGrid,
    observer: &mut dyn FnMut(&PnpStep<'_>),
) -> Result<(ImageGrid, IterationTrace)> {
    cfg.validate()?;
    meas.validate(op.dims())?;
    init.ensure_dims(op.dims())?;
    init.ensure_finite("initial estimate")?;

    let sigma = meas.sigma_n.max(cfg.sigma_floor);
    let rho = cfg.lambda * sigma * sigma;
    let level = cfg.denoiser_sigma();

    let mut trace = IterationTrace::new();
    let mut v = init.clone();
    let mut u = ImageGrid::zeros(init.height(), init.width())?;
    let mut x = init.clone();
    for k in 1..=cfg.iterations {
        let next = op.least_squares(meas.y, &v.sub(&u)?, rho)?;
        if !next.is_finite() {
            return Err(Error::NonFinite("least-squares step"));
        }
        let step_norm = next.distance(&x)?;
        x = next;
        v = denoiser.denoise(&x.add(&u)?, level)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("denoiser output"));
        }
        u = u.add(&x.sub(&v)?)?;
        observer(&PnpStep {
            iteration: k,
            x: &x,
            v: &v,
            u: &u,
        });
        trace.push(TraceRecord {
            iteration: k,
            psnr_db: meas.psnr_of(&x)?,
            condition_ratio: None,
            epsilon: None,
            restarts: 0,
            step_norm,
        });
    }
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoisers::DenoiserSpec;
    use crate::operators::{BlurOperator, InpaintingOperator, Kernel};

    #[test]
    fn presets() {
        let c = PnpConfig::deblurring(1).unwrap();
        assert_eq!((c.beta, c.lambda, c.iterations), (0.85, 2.0 / 255.0, 50));
        assert_eq!(PnpConfig::noisy_inpainting().beta, 0.8);
        assert!(PnpConfig::default().validate().is_ok());
        let bad = PnpConfig {
            lambda: 0.0,
            ..PnpConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn inpainting_pixel_update() {
        // λσ² = 1 with σ = 1
        let op = InpaintingOperator::new(1, 2, vec![true, false]).unwrap();
        let y = ImageGrid::from_vec(1, 2, vec![10.0, 0.0]).unwrap();
        let z = ImageGrid::from_vec(1, 2, vec![4.0, 4.0]).unwrap();
        let x = op.least_squares(&y, &z, 1.0).unwrap();
        assert_eq!(x.data(), &[7.0, 4.0]);
    }

    #[test]
    fn first_iterate_with_identity_denoiser() {
        let op = BlurOperator::new(Kernel::delta(), 3, 3, 0.0, 0.0).unwrap();
        let y = ImageGrid::filled(3, 3, 10.0).unwrap();
        let init = ImageGrid::filled(3, 3, 4.0).unwrap();
        let cfg = PnpConfig {
            beta: 1.0,
            lambda: 1.0,
            iterations: 1,
            sigma_floor: 0.001,
        };
        let (x, trace) = pnp_run(&op, Measurements::new(&y, 1.0), &DenoiserSpec::Identity, &cfg, &init).unwrap();
        assert!(x.data().iter().all(|v| (v - 7.0).abs() < 1e-12));
        assert_eq!(trace.len(), 1);
        assert!(trace.records()[0].condition_ratio.is_none());
    }

    #[test]
    fn noiseless_uses_floor() {
        let op = InpaintingOperator::new(1, 2, vec![true, false]).unwrap();
        let y = ImageGrid::from_vec(1, 2, vec![10.0, 0.0]).unwrap();
        let init = ImageGrid::filled(1, 2, 0.0).unwrap();
        let cfg = PnpConfig {
            iterations: 1,
            ..PnpConfig::default()
        };
        let (x, _) = pnp_run(&op, Measurements::new(&y, 0.0), &DenoiserSpec::Identity, &cfg, &init).unwrap();
        let rho = cfg.lambda * 1e-6;
        assert!((x.data()[0] - 10.0 / (1.0 + rho)).abs() < 1e-12);
        assert_eq!(x.data()[1], 0.0);
    }
}
