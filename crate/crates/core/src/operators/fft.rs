//! Two-dimensional DFT on row-major grids of arbitrary size.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::image::ImageGrid;

/// Planned forward/inverse 2-D transforms for one grid size.
///
/// The forward transform is unnormalized; the inverse carries the `1/n`
/// factor, so `inverse(forward(x)) = x`.
#[derive(Clone)]
pub struct Fft2 {
    height: usize,
    width: usize,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_forward: planner.plan_fft_forward(width),
            row_inverse: planner.plan_fft_inverse(width),
            col_forward: planner.plan_fft_forward(height),
            col_inverse: planner.plan_fft_inverse(height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.row_forward, &self.col_forward);
    }

    /// Normalized inverse transform, in place.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.row_inverse, &self.col_inverse);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut spectrum);
        spectrum.into_iter().map(|v| v.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!(buf.len(), self.height * self.width, "buffer does not match plan size");
        rows.process(buf);
        let mut transposed = vec![Complex64::default(); buf.len()];
        transpose(buf, &mut transposed, self.height, self.width);
        cols.process(&mut transposed);
        transpose(&transposed, buf, self.width, self.height);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Unnormalized 2-D DFT of an image.
pub fn fft2(img: &ImageGrid) -> Vec<Complex64> {
    Fft2::new(img.height(), img.width()).forward_real(img.data())
}

/// Normalized inverse 2-D DFT of a `height x width` spectrum.
pub fn ifft2(height: usize, width: usize, spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    Fft2::new(height, width).inverse(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_concentrates_in_dc() {
        let img = ImageGrid::filled(6, 10, 3.0).unwrap();
        let spec = fft2(&img);
        assert!((spec[0].re - 180.0).abs() < 1e-12);
        assert!(spec[1..].iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn round_trip_non_square() {
        let img = ImageGrid::from_fn(15, 12, |r, c| ((r * 31 + c * 17) % 29) as f64).unwrap();
        let back = ifft2(15, 12, &fft2(&img));
        for (a, b) in img.data().iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-10 && b.im.abs() < 1e-10);
        }
    }
}
