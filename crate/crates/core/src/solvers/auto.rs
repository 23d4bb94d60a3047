use super::idbp::{attempt, check_inputs, Attempt};
use super::{IdbpConfig, IterationTrace, Measurements};
use crate::denoisers::Denoiser;
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::operators::BlurOperator;

/// IDBP for deblurring with automatic tuning of the pseudoinverse weight.
///
/// Starts from `ε = cfg.epsilon`. Whenever the condition ratio falls below
/// `cfg.condition_margin_tau` at some iteration `k > 1`, `ε` grows by
/// `cfg.epsilon_increment` and the run restarts from `init`. The first
/// iteration is never checked. The returned trace holds every attempt.
pub fn idbp_auto_tuned(
    op: &BlurOperator,
    meas: Measurements<'_>,
    denoiser: &dyn Denoiser,
    cfg: &IdbpConfig,
    init: &ImageGrid,
) -> Result<(ImageGrid, IterationTrace)> {
    check_inputs(op, &meas, cfg, init)?;
    if !(meas.sigma_n > 0.0) {
        return Err(Error::invalid("auto-tuning needs sigma_n > 0 to evaluate the condition ratio"));
    }
    let mut trace = IterationTrace::new();
    let mut epsilon = cfg.epsilon;
    let mut restarts = 0;
    loop {
        let current = op.with_epsilon(epsilon)?;
        let outcome = attempt(
            &current,
            &meas,
            denoiser,
            cfg,
            init,
            Some(cfg.condition_margin_tau),
            restarts,
            &mut trace,
            &mut |_| {},
        )?;
        match outcome {
            Attempt::Completed(estimate) => return Ok((estimate, trace)),
            Attempt::Violated if restarts >= cfg.restart_cap => {
                return Err(Error::RestartBudgetExhausted { restarts, epsilon });
            }
            Attempt::Violated => {
                epsilon += cfg.epsilon_increment;
                restarts += 1;
            }
        }
    }
}
