//! Restoration of images from linear, noisy measurements `y = Hx + e` using
//! off-the-shelf denoisers as implicit priors.
//!
//! Two solvers are provided:
//!
//! * **IDBP** (iterative denoising and backward projections) alternates a
//!   denoising step at noise level `σₙ + δ` with a projection of the estimate
//!   onto the affine set `{ỹ : Hỹ = y}`. An auto-tuned variant for deblurring
//!   adjusts the regularization of the approximate pseudoinverse on the fly.
//! * **Plug-and-play ADMM**, where the proximal step of the prior is replaced
//!   by a denoiser at noise level `√(β/λ)`.
//!
//! Degradations are described by [`operators::DegradationOperator`]; the two
//! concrete families are pixel masks (inpainting) and circular blur.
//! Denoisers implement [`denoisers::Denoiser`].

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod denoisers;
pub mod error;
pub mod image;
pub mod operators;
pub mod solvers;

pub use error::{Error, Result};
pub use image::{ImageGrid, MetricReport, RngState};
