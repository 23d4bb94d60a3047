//! Linear degradation operators `H` with their (pseudo)inverses and projectors.
//!
//! Measurements are always stored as full-size grids. For masks, unobserved
//! entries are conventionally zero and are ignored by [`DegradationOperator::measurement_norm`].

mod blur;
pub mod fft;
mod kernel;
mod mask;

pub use blur::{BlurOperator, SpectralInverse, RANK_CUTOFF};
pub use fft::{fft2, ifft2, Fft2};
pub use kernel::{
    generate_scenario_kernel, inverse_quadratic_kernel, scenario, Kernel, NoiseModel, ScenarioSpec,
};
pub use mask::{generate_random_mask, InpaintingOperator};

use crate::error::Result;
use crate::image::{ImageGrid, RngState};

/// A degradation `H` together with the (possibly regularized) pseudoinverse `H†`.
///
/// `P_H = H†H` and `Q_H = I − H†H` are derived from these two maps.
pub trait DegradationOperator: Send + Sync {
    /// Image size the operator acts on.
    fn dims(&self) -> (usize, usize);

    /// `Hx`.
    fn forward(&self, x: &ImageGrid) -> Result<ImageGrid>;

    /// `H†y`.
    fn pseudoinverse(&self, y: &ImageGrid) -> Result<ImageGrid>;

    /// `P_H x = H†Hx`.
    fn project_row(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.pseudoinverse(&self.forward(x)?)
    }

    /// `Q_H x = x − H†Hx`.
    fn project_null(&self, x: &ImageGrid) -> Result<ImageGrid> {
        x.sub(&self.project_row(x)?)
    }

    /// The backward projection `H†y + Q_H x`.
    fn back_project(&self, y: &ImageGrid, x: &ImageGrid) -> Result<ImageGrid> {
        self.pseudoinverse(y)?.add(&self.project_null(x)?)
    }

    /// Euclidean norm of a measurement-space vector.
    fn measurement_norm(&self, r: &ImageGrid) -> f64 {
        r.norm()
    }

    /// Solves `(HᵀH + ρI) x = Hᵀy + ρz`.
    fn least_squares(&self, y: &ImageGrid, z: &ImageGrid, rho: f64) -> Result<ImageGrid>;

    /// Regularization weight of an approximate pseudoinverse, if any.
    fn regularization(&self) -> Option<f64> {
        None
    }

    /// Simulates `Hx + e` with `e ~ N(0, σₙ²)` on every measured entry.
    fn observe(&self, x: &ImageGrid, sigma_n: f64, rng: &mut RngState) -> Result<ImageGrid>;
}
