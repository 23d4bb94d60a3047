use super::{condition_ratio, IterationTrace, Measurements, TraceRecord};
use crate::denoisers::Denoiser;
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::operators::{scenario, DegradationOperator};

/// Which iterate a run returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    /// The last denoiser output `x̃`.
    #[default]
    LastX,
    /// The last back-projection `ỹ`; useful for noiseless inpainting, where
    /// `ỹ` keeps the observed pixels exactly.
    LastY,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdbpConfig {
    pub delta: f64,
    pub iterations: usize,
    pub output_mode: OutputMode,
    /// Pseudoinverse regularization for blur. Plain runs take it from the operator;
    /// the auto-tuned run starts from this value.
    pub epsilon: f64,
    pub condition_margin_tau: f64,
    pub epsilon_increment: f64,
    pub restart_cap: usize,
}

impl Default for IdbpConfig {
    fn default() -> Self {
        Self {
            delta: 5.0,
            iterations: 30,
            output_mode: OutputMode::LastX,
            epsilon: 1e-3,
            condition_margin_tau: 3.0,
            epsilon_increment: 1e-4,
            restart_cap: 200,
        }
    }
}

impl IdbpConfig {
    pub fn noiseless_inpainting() -> Self {
        Self {
            delta: 5.0,
            iterations: 150,
            output_mode: OutputMode::LastY,
            ..Self::default()
        }
    }

    pub fn noisy_inpainting() -> Self {
        Self {
            delta: 0.0,
            iterations: 75,
            output_mode: OutputMode::LastX,
            ..Self::default()
        }
    }

    /// Deblurring settings for one of the four benchmark scenarios.
    pub fn deblurring(scenario_id: u8) -> Result<Self> {
        Ok(Self {
            delta: 5.0,
            iterations: 30,
            epsilon: scenario(scenario_id)?.idbp_epsilon,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be positive"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.condition_margin_tau > 1.0) || !self.condition_margin_tau.is_finite() {
            return Err(Error::invalid(format!(
                "condition margin tau must exceed 1, got {}",
                self.condition_margin_tau
            )));
        }
        if !(self.epsilon_increment > 0.0) || !self.epsilon_increment.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon increment must be positive, got {}",
                self.epsilon_increment
            )));
        }
        Ok(())
    }
}

/// State handed to an observer after each IDBP iteration.
#[derive(Debug, Clone, Copy)]
pub struct IdbpStep<'a> {
    /// 1-based iteration index within the current attempt.
    pub iteration: usize,
    pub restarts: usize,
    /// `ỹₖ₋₁`, the denoiser input.
    pub y_prev: &'a ImageGrid,
    /// `x̃ₖ`.
    pub x_tilde: &'a ImageGrid,
    /// `ỹₖ`.
    pub y_tilde: &'a ImageGrid,
}

/// Runs IDBP for `cfg.iterations` steps starting from `ỹ₀ = init`.
pub fn idbp_run(
    op: &dyn DegradationOperator,
    meas: Measurements<'_>,
    denoiser: &dyn Denoiser,
    cfg: &IdbpConfig,
    init: &ImageGrid,
) -> Result<(ImageGrid, IterationTrace)> {
    idbp_run_observed(op, meas, denoiser, cfg, init, &mut |_| {})
}

/// [`idbp_run`] with a callback invoked after every iteration.
pub fn idbp_run_observed(
    op: &dyn DegradationOperator,
    meas: Measurements<'_>,
    denoiser: &dyn Denoiser,
    cfg: &IdbpConfig,
    init: &ImageGrid,
    observer: &mut dyn FnMut(&IdbpStep<'_>),
) -> Result<(ImageGrid, IterationTrace)> {
    check_inputs(op, &meas, cfg, init)?;
    let mut trace = IterationTrace::new();
    match attempt(op, &meas, denoiser, cfg, init, None, 0, &mut trace, observer)? {
        Attempt::Completed(estimate) => Ok((estimate, trace)),
        Attempt::Violated => unreachable!("no margin was requested"),
    }
}

pub(super) fn check_inputs(
    op: &dyn DegradationOperator,
    meas: &Measurements<'_>,
    cfg: &IdbpConfig,
    init: &ImageGrid,
) -> Result<()> {
    cfg.validate()?;
    meas.validate(op.dims())?;
    init.ensure_dims(op.dims())?;
    init.ensure_finite("initial estimate")?;
    if !(cfg.delta + meas.sigma_n > 0.0) {
        return Err(Error::invalid(
            "delta + sigma_n must be positive, otherwise the denoiser is never engaged",
        ));
    }
    Ok(())
}

pub(super) enum Attempt {
    Completed(ImageGrid),
    /// The condition ratio dropped below the margin at some `k > 1`.
    Violated,
}

/// One pass of the iteration. With `margin = Some(τ)` the pass stops early as
/// soon as a ratio below `τ` is seen at `k > 1`.
#[allow(clippy::too_many_arguments)]
pub(super) fn attempt(
    op: &dyn DegradationOperator,
    meas: &Measurements<'_>,
    denoiser: &dyn Denoiser,
    cfg: &IdbpConfig,
    init: &ImageGrid,
    margin: Option<f64>,
    restarts: usize,
    trace: &mut IterationTrace,
    observer: &mut dyn FnMut(&IdbpStep<'_>),
) -> Result<Attempt> {
    let level = meas.sigma_n + cfg.delta;
    let epsilon = op.regularization();
    let mut y_tilde = init.clone();
    let mut x_tilde = init.clone();

    for k in 1..=cfg.iterations {
        x_tilde = denoiser.denoise(&y_tilde, level)?;
        if !x_tilde.is_finite() {
            return Err(Error::NonFinite("denoiser output"));
        }
        let next = op.back_project(meas.y, &x_tilde)?;
        if !next.is_finite() {
            return Err(Error::NonFinite("back-projection"));
        }

        let ratio = if meas.sigma_n > 0.0 {
            Some(condition_ratio(op, meas.y, &x_tilde, meas.sigma_n, cfg.delta)?)
        } else {
            None
        };
        let step_norm = next.distance(&y_tilde)?;
        observer(&IdbpStep {
            iteration: k,
            restarts,
            y_prev: &y_tilde,
            x_tilde: &x_tilde,
            y_tilde: &next,
        });
        y_tilde = next;

        let current = match cfg.output_mode {
            OutputMode::LastX => &x_tilde,
            OutputMode::LastY => &y_tilde,
        };
        trace.push(TraceRecord {
            iteration: k,
            psnr_db: meas.psnr_of(current)?,
            condition_ratio: ratio,
            epsilon,
            restarts,
            step_norm,
        });

        if let (Some(tau), Some(r)) = (margin, ratio) {
            if k > 1 && r < tau {
                return Ok(Attempt::Violated);
            }
        }
    }

    Ok(Attempt::Completed(match cfg.output_mode {
        OutputMode::LastX => x_tilde,
        OutputMode::LastY => y_tilde,
    }))
}
