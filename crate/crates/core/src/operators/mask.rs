use super::DegradationOperator;
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, ImageGrid, RngState};

/// Pixel-selection operator: `H` keeps the observed pixels, `H† = Hᵀ` zero-pads.
///
/// Every map here is a 0/1 diagonal, so all projector identities hold exactly
/// in floating point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InpaintingOperator {
    height: usize,
    width: usize,
    mask: Vec<bool>,
    observed: usize,
}

impl InpaintingOperator {
    /// `mask[i]` is `true` where pixel `i` (row-major) is observed.
    pub fn new(height: usize, width: usize, mask: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 || mask.len() != height * width {
            return Err(Error::invalid(format!(
                "mask of length {} does not describe a {height}x{width} image",
                mask.len()
            )));
        }
        let observed = mask.iter().filter(|&&m| m).count();
        if observed == 0 {
            return Err(Error::invalid("mask must observe at least one pixel"));
        }
        Ok(Self {
            height,
            width,
            mask,
            observed,
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.width + col]
    }

    /// `m`, the number of measurements.
    pub fn observed_count(&self) -> usize {
        self.observed
    }

    pub fn missing_count(&self) -> usize {
        self.mask.len() - self.observed
    }

    /// The `m` observed entries of `y` in raster order.
    pub fn compact(&self, y: &ImageGrid) -> Result<Vec<f64>> {
        y.ensure_dims(self.dims())?;
        Ok(y.data()
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .collect())
    }

    fn select(&self, observed: &ImageGrid, missing: &ImageGrid) -> ImageGrid {
        let data = self
            .mask
            .iter()
            .zip(observed.data().iter().zip(missing.data()))
            .map(|(&m, (&a, &b))| if m { a } else { b })
            .collect();
        ImageGrid::from_raw(self.height, self.width, data)
    }

    fn keep(&self, x: &ImageGrid, observed: bool) -> Result<ImageGrid> {
        x.ensure_dims(self.dims())?;
        let data = self
            .mask
            .iter()
            .zip(x.data())
            .map(|(&m, &v)| if m == observed { v } else { 0.0 })
            .collect();
        Ok(ImageGrid::from_raw(self.height, self.width, data))
    }
}

impl DegradationOperator for InpaintingOperator {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn forward(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.keep(x, true)
    }

    fn pseudoinverse(&self, y: &ImageGrid) -> Result<ImageGrid> {
        self.keep(y, true)
    }

    fn project_row(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.keep(x, true)
    }

    fn project_null(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.keep(x, false)
    }

    /// Observed pixels from `y`, missing pixels from `x`.
    fn back_project(&self, y: &ImageGrid, x: &ImageGrid) -> Result<ImageGrid> {
        y.ensure_dims(self.dims())?;
        x.ensure_dims(self.dims())?;
        Ok(self.select(y, x))
    }

    fn measurement_norm(&self, r: &ImageGrid) -> f64 {
        r.data()
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Per-pixel closed form: `(yᵢ + ρzᵢ)/(1 + ρ)` where observed, `zᵢ` elsewhere.
    fn least_squares(&self, y: &ImageGrid, z: &ImageGrid, rho: f64) -> Result<ImageGrid> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        y.ensure_dims(self.dims())?;
        z.ensure_dims(self.dims())?;
        let data = self
            .mask
            .iter()
            .zip(y.data().iter().zip(z.data()))
            .map(|(&m, (&yi, &zi))| if m { (yi + rho * zi) / (1.0 + rho) } else { zi })
            .collect();
        Ok(ImageGrid::from_raw(self.height, self.width, data))
    }

    fn observe(&self, x: &ImageGrid, sigma_n: f64, rng: &mut RngState) -> Result<ImageGrid> {
        x.ensure_dims(self.dims())?;
        let noisy = add_gaussian_noise(x, sigma_n, rng)?;
        self.forward(&noisy)
    }
}

/// Marks exactly `round(missing_fraction · n)` pixels as missing, chosen by a
/// seeded Fisher–Yates shuffle.
pub fn generate_random_mask(
    height: usize,
    width: usize,
    missing_fraction: f64,
    rng: &mut RngState,
) -> Result<InpaintingOperator> {
    if !(0.0..1.0).contains(&missing_fraction) {
        return Err(Error::invalid(format!(
            "missing fraction must lie in [0, 1), got {missing_fraction}"
        )));
    }
    let n = height * width;
    let missing = (missing_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut mask = vec![true; n];
    for &idx in &order[..missing.min(n)] {
        mask[idx] = false;
    }
    InpaintingOperator::new(height, width, mask)
}
