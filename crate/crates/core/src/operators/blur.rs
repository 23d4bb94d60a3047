use std::sync::Arc;

use num_complex::Complex64;

use super::{DegradationOperator, Fft2, Kernel};
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, ImageGrid, RngState};

/// Relative magnitude below which a kernel frequency is treated as exactly zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Tikhonov-regularized inverse filter `g̃ = conj(F{h}) / (|F{h}|² + ε·σₙ²)`.
///
/// Frequencies where the denominator vanishes map to zero, which is the exact
/// pseudoinverse when `ε·σₙ² = 0`. Spectral magnitudes below
/// [`RANK_CUTOFF`] times the largest one count as zero, so round-off in a
/// theoretically vanishing frequency is not amplified.
#[derive(Debug, Clone)]
pub struct SpectralInverse {
    epsilon: f64,
    sigma_n: f64,
    g_tilde: Vec<Complex64>,
}

impl SpectralInverse {
    pub fn new(kernel_spectrum: &[Complex64], epsilon: f64, sigma_n: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        if !(sigma_n >= 0.0) || !sigma_n.is_finite() {
            return Err(Error::invalid(format!("sigma_n must be nonnegative, got {sigma_n}")));
        }
        let t = epsilon * sigma_n * sigma_n;
        let peak = kernel_spectrum.iter().map(|h| h.norm()).fold(0.0, f64::max);
        let floor = RANK_CUTOFF * peak;
        let g_tilde = kernel_spectrum
            .iter()
            .map(|h| {
                let denom = h.norm_sqr() + t;
                if h.norm() > floor && denom > 0.0 {
                    h.conj() / denom
                } else {
                    Complex64::default()
                }
            })
            .collect();
        Ok(Self {
            epsilon,
            sigma_n,
            g_tilde,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// The filter itself, in the 2-D DFT layout of the image.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.g_tilde
    }
}

/// Circular (periodic-boundary) blur evaluated with the 2-D FFT.
#[derive(Debug, Clone)]
pub struct BlurOperator {
    kernel: Kernel,
    height: usize,
    width: usize,
    fft: Fft2,
    kernel_spectrum: Arc<Vec<Complex64>>,
    inverse: SpectralInverse,
}

impl BlurOperator {
    pub fn new(kernel: Kernel, height: usize, width: usize, epsilon: f64, sigma_n: f64) -> Result<Self> {
        let embedded = kernel.embed(height, width)?;
        let fft = Fft2::new(height, width);
        let kernel_spectrum = Arc::new(fft.forward_real(embedded.data()));
        let inverse = SpectralInverse::new(&kernel_spectrum, epsilon, sigma_n)?;
        Ok(Self {
            kernel,
            height,
            width,
            fft,
            kernel_spectrum,
            inverse,
        })
    }

    /// Same kernel and size with a different regularization weight; reuses the kernel spectrum.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let inverse = SpectralInverse::new(&self.kernel_spectrum, epsilon, self.inverse.sigma_n)?;
        Ok(Self {
            inverse,
            ..self.clone()
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn kernel_spectrum(&self) -> &[Complex64] {
        &self.kernel_spectrum
    }

    pub fn spectral_inverse(&self) -> &SpectralInverse {
        &self.inverse
    }

    pub fn epsilon(&self) -> f64 {
        self.inverse.epsilon
    }

    pub fn sigma_n(&self) -> f64 {
        self.inverse.sigma_n
    }

    fn spectrum(&self, x: &ImageGrid) -> Result<Vec<Complex64>> {
        x.ensure_dims(self.dims())?;
        Ok(self.fft.forward_real(x.data()))
    }

    fn to_image(&self, spectrum: Vec<Complex64>) -> ImageGrid {
        ImageGrid::from_raw(self.height, self.width, self.fft.inverse_real(spectrum))
    }
}

impl DegradationOperator for BlurOperator {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn forward(&self, x: &ImageGrid) -> Result<ImageGrid> {
        let mut s = self.spectrum(x)?;
        s.iter_mut()
            .zip(self.kernel_spectrum.iter())
            .for_each(|(v, h)| *v *= h);
        Ok(self.to_image(s))
    }

    fn pseudoinverse(&self, y: &ImageGrid) -> Result<ImageGrid> {
        let mut s = self.spectrum(y)?;
        s.iter_mut()
            .zip(&self.inverse.g_tilde)
            .for_each(|(v, g)| *v *= g);
        Ok(self.to_image(s))
    }

    fn project_null(&self, x: &ImageGrid) -> Result<ImageGrid> {
        let mut s = self.spectrum(x)?;
        s.iter_mut()
            .zip(self.kernel_spectrum.iter().zip(&self.inverse.g_tilde))
            .for_each(|(v, (h, g))| *v *= g * h);
        x.sub(&self.to_image(s))
    }

    /// `F⁻¹{g̃·F{y}} + x − F⁻¹{g̃·F{h}·F{x}}`, evaluated with one transform pair.
    fn back_project(&self, y: &ImageGrid, x: &ImageGrid) -> Result<ImageGrid> {
        let fy = self.spectrum(y)?;
        let fx = self.spectrum(x)?;
        let correction = fy
            .iter()
            .zip(&fx)
            .zip(self.kernel_spectrum.iter().zip(&self.inverse.g_tilde))
            .map(|((ys, xs), (h, g))| g * (ys - h * xs))
            .collect();
        x.add(&self.to_image(correction))
    }

    /// `F⁻¹{(conj(F{h})·F{y} + ρ·F{z}) / (|F{h}|² + ρ)}`.
    fn least_squares(&self, y: &ImageGrid, z: &ImageGrid, rho: f64) -> Result<ImageGrid> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        let fy = self.spectrum(y)?;
        let fz = self.spectrum(z)?;
        let s = fy
            .iter()
            .zip(&fz)
            .zip(self.kernel_spectrum.iter())
            .map(|((ys, zs), h)| (h.conj() * ys + zs * rho) / (h.norm_sqr() + rho))
            .collect();
        Ok(self.to_image(s))
    }

    fn regularization(&self) -> Option<f64> {
        Some(self.inverse.epsilon)
    }

    fn observe(&self, x: &ImageGrid, sigma_n: f64, rng: &mut RngState) -> Result<ImageGrid> {
        add_gaussian_noise(&self.forward(x)?, sigma_n, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> ImageGrid {
        ImageGrid::from_fn(h, w, |r, c| ((r * 31 + c * 7) % 50) as f64 + 0.25 * r as f64).unwrap()
    }

    #[test]
    fn delta_kernel_is_identity() {
        let x = ramp(9, 12);
        let op = BlurOperator::new(Kernel::delta(), 9, 12, 0.0, 0.0).unwrap();
        let y = op.forward(&x).unwrap();
        assert!(x.distance(&y).unwrap() < 1e-10);
        assert!(op.kernel_spectrum().iter().all(|h| (h - 1.0).norm() < 1e-15));
    }

    #[test]
    fn normalized_kernel_preserves_constants() {
        let k = Kernel::new(3, 3, vec![0.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.0, 0.25, 0.25]).unwrap();
        let op = BlurOperator::new(k, 8, 8, 0.0, 0.0).unwrap();
        let x = ImageGrid::filled(8, 8, 100.0).unwrap();
        let y = op.forward(&x).unwrap();
        assert!(y.data().iter().all(|v| (v - 100.0).abs() < 1e-10));
    }

    #[test]
    fn delta_kernel_tikhonov_shrinks_uniformly() {
        // epsilon·σ² = 0.02
        let op = BlurOperator::new(Kernel::delta(), 5, 7, 0.02, 1.0).unwrap();
        let y = ramp(5, 7);
        let out = op.pseudoinverse(&y).unwrap();
        for (a, b) in out.data().iter().zip(y.data()) {
            assert!((a - b / 1.02).abs() < 1e-12);
        }
        for g in op.spectral_inverse().coefficients() {
            assert!((g - 1.0 / 1.02).norm() < 1e-15);
        }
    }

    #[test]
    fn unregularized_inverse_undoes_invertible_blur() {
        // [0.6 0.2 0.2]-like kernel: spectrum bounded away from zero
        let k = Kernel::new(3, 3, vec![0.0, 0.05, 0.0, 0.05, 0.8, 0.05, 0.0, 0.05, 0.0]).unwrap();
        let op = BlurOperator::new(k, 10, 10, 0.0, 1.0).unwrap();
        let x = ramp(10, 10);
        let back = op.pseudoinverse(&op.forward(&x).unwrap()).unwrap();
        assert!(x.distance(&back).unwrap() < 1e-8);
    }

    #[test]
    fn back_projection_matches_definition() {
        let k = crate::operators::generate_scenario_kernel(4).unwrap();
        let op = BlurOperator::new(k, 12, 16, 2e-3, 7.0).unwrap();
        let x = ramp(12, 16);
        let y = ramp(16, 12).crop(0, 0, 12, 12).unwrap();
        assert!(op.back_project(&y, &x).is_err());
        let y = x.map(|v| v * 0.5 + 3.0);
        let fused = op.back_project(&y, &x).unwrap();
        let split = op
            .pseudoinverse(&y)
            .unwrap()
            .add(&op.project_null(&x).unwrap())
            .unwrap();
        assert!(fused.distance(&split).unwrap() < 1e-10);
    }

    #[test]
    fn delta_kernel_least_squares_is_entrywise() {
        let op = BlurOperator::new(Kernel::delta(), 4, 4, 0.0, 0.0).unwrap();
        let y = ramp(4, 4);
        let z = y.map(|v| 10.0 - v);
        let rho = 0.7;
        let out = op.least_squares(&y, &z, rho).unwrap();
        let expect = y.zip_map(&z, |a, b| (a + rho * b) / (1.0 + rho)).unwrap();
        assert!(out.distance(&expect).unwrap() < 1e-12);
    }
}
