//! IDBP, its auto-tuned deblurring variant, and plug-and-play ADMM.

mod auto;
mod condition;
mod idbp;
mod init;
mod pnp;
mod trace;

pub use auto::idbp_auto_tuned;
pub use condition::condition_ratio;
pub use idbp::{idbp_run, idbp_run_observed, IdbpConfig, IdbpStep, OutputMode};
pub use init::{improved_measurements, median_initialize};
pub use pnp::{pnp_run, pnp_run_observed, PnpConfig, PnpStep};
pub use trace::{IterationTrace, TraceRecord};

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// The observed data of one restoration problem.
#[derive(Debug, Clone, Copy)]
pub struct Measurements<'a> {
    pub y: &'a ImageGrid,
    pub sigma_n: f64,
    /// Ground truth, used only to fill the PSNR column of the trace.
    pub truth: Option<&'a ImageGrid>,
}

impl<'a> Measurements<'a> {
    pub fn new(y: &'a ImageGrid, sigma_n: f64) -> Self {
        Self {
            y,
            sigma_n,
            truth: None,
        }
    }

    pub fn with_truth(mut self, truth: &'a ImageGrid) -> Self {
        self.truth = Some(truth);
        self
    }

    pub(crate) fn validate(&self, dims: (usize, usize)) -> Result<()> {
        if !(self.sigma_n >= 0.0) || !self.sigma_n.is_finite() {
            return Err(Error::invalid(format!(
                "sigma_n must be finite and nonnegative, got {}",
                self.sigma_n
            )));
        }
        self.y.ensure_dims(dims)?;
        self.y.ensure_finite("measurements")?;
        if let Some(t) = self.truth {
            t.ensure_dims(dims)?;
        }
        Ok(())
    }

    pub(crate) fn psnr_of(&self, estimate: &ImageGrid) -> Result<Option<f64>> {
        self.truth
            .map(|t| crate::image::psnr(t, estimate))
            .transpose()
    }
}
