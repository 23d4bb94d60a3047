//! Image container, quality metrics, seeded randomness and PGM file I/O.

mod metrics;
mod pgm;
mod rng;

pub use metrics::{bsnr, isnr, psnr, sigma_for_bsnr, MetricReport, PEAK};
pub use pgm::{load_pgm, read_pgm, save_pgm, write_pgm};
pub use rng::{add_gaussian_noise, RngState};

use crate::error::{Error, Result};

/// A 2-D real-valued raster stored row-major.
///
/// Intensities nominally live in `0..=255` but are never clamped here; only
/// [`save_pgm`] clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite("ImageGrid::filled"));
        }
        Ok(Self {
            height,
            width,
            data: vec![value; height * width],
        })
    }

    /// Wraps a row-major buffer. Fails on a length mismatch or non-finite data.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::invalid(format!(
                "buffer of {} values cannot form a {height}x{width} image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ImageGrid::from_vec"));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_vec(height, width, data)
    }

    /// Internal constructor for buffers produced by arithmetic on valid grids.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Returns an error naming `context` if any entry is NaN or infinite.
    pub fn ensure_finite(&self, context: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(context))
        }
    }

    pub fn ensure_same_dims(&self, other: &ImageGrid) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            })
        }
    }

    pub fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() == dims {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dims,
                actual: self.dims(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageGrid {
        ImageGrid::from_raw(self.height, self.width, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Entrywise combination of two same-sized grids.
    pub fn zip_map(&self, other: &ImageGrid, f: impl Fn(f64, f64) -> f64) -> Result<ImageGrid> {
        self.ensure_same_dims(other)?;
        Ok(ImageGrid::from_raw(
            self.height,
            self.width,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &ImageGrid) -> Result<ImageGrid> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ImageGrid) -> Result<ImageGrid> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> ImageGrid {
        self.map(|v| v * factor)
    }

    pub fn offset(&self, constant: f64) -> ImageGrid {
        self.map(|v| v + constant)
    }

    pub fn dot(&self, other: &ImageGrid) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Euclidean (ℓ₂) norm of the flattened grid.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ‖self − other‖₂
    pub fn distance(&self, other: &ImageGrid) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population variance: squared deviations from the mean divided by the pixel count.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.data.len() as f64
    }

    /// Copies the `height x width` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<ImageGrid> {
        if row + height > self.height || col + width > self.width || height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "crop {height}x{width} at ({row},{col}) exceeds {}x{} image",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width);
        for r in row..row + height {
            let start = r * self.width + col;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Ok(ImageGrid::from_raw(height, width, data))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}
