use crate::error::{Error, Result};
use crate::image::ImageGrid;

use super::{BlurOperator, DegradationOperator};

/// A point-spread function with odd dimensions, centered on its middle entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Kernel {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height.is_multiple_of(2) || width.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "kernel dimensions must be odd, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::invalid("kernel buffer length does not match its dimensions"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel"));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds a `(2·radius_y+1) x (2·radius_x+1)` kernel from `f(dy, dx)` with
    /// offsets measured from the center.
    pub fn from_fn(radius_y: usize, radius_x: usize, f: impl Fn(i64, i64) -> f64) -> Result<Self> {
        let (ry, rx) = (radius_y as i64, radius_x as i64);
        let data = (-ry..=ry)
            .flat_map(|dy| (-rx..=rx).map(move |dx| (dy, dx)))
            .map(|(dy, dx)| f(dy, dx))
            .collect();
        Self::new(2 * radius_y + 1, 2 * radius_x + 1, data)
    }

    pub fn delta() -> Self {
        Self {
            height: 1,
            width: 1,
            data: vec![1.0],
        }
    }

    pub fn uniform(size: usize) -> Result<Self> {
        let n = (size * size) as f64;
        Self::new(size, size, vec![1.0 / n; size * size])
    }

    /// Separable kernel `columnᵀ · row`.
    pub fn outer(column: &[f64], row: &[f64]) -> Result<Self> {
        let data = column
            .iter()
            .flat_map(|&a| row.iter().map(move |&b| a * b))
            .collect();
        Self::new(column.len(), row.len(), data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry at offset `(dy, dx)` from the center, zero outside the support.
    pub fn at(&self, dy: i64, dx: i64) -> f64 {
        let (cy, cx) = ((self.height / 2) as i64, (self.width / 2) as i64);
        let (r, c) = (dy + cy, dx + cx);
        if r < 0 || c < 0 || r >= self.height as i64 || c >= self.width as i64 {
            0.0
        } else {
            self.data[r as usize * self.width + c as usize]
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let s = self.sum();
        if s == 0.0 {
            return Err(Error::invalid("cannot normalize a kernel with zero sum"));
        }
        Self::new(self.height, self.width, self.data.iter().map(|v| v / s).collect())
    }

    /// Zero-pads to `height x width` with the kernel center wrapped to `(0, 0)`.
    pub fn embed(&self, height: usize, width: usize) -> Result<ImageGrid> {
        if self.height > height || self.width > width {
            return Err(Error::invalid(format!(
                "{}x{} kernel does not fit a {height}x{width} image",
                self.height, self.width
            )));
        }
        let mut out = ImageGrid::zeros(height, width)?;
        let (cy, cx) = (self.height / 2, self.width / 2);
        for r in 0..self.height {
            for c in 0..self.width {
                let rr = (r + height - cy) % height;
                let cc = (c + width - cx) % width;
                out.set(rr, cc, self.data[r * self.width + c]);
            }
        }
        Ok(out)
    }
}

/// How the noise level of a deblurring scenario is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// A fixed noise variance `σₙ²`.
    Variance(f64),
    /// `σₙ` chosen per image so that the blurred signal-to-noise ratio hits this value.
    Bsnr(f64),
}

/// One of the four standard deblurring benchmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: u8,
    pub kernel: Kernel,
    pub noise: NoiseModel,
    /// Manually tuned IDBP regularization weight.
    pub idbp_epsilon: f64,
    pub pnp_beta: f64,
    pub pnp_lambda: f64,
}

impl ScenarioSpec {
    /// Noise standard deviation for a given clean blurred image.
    pub fn noise_sigma(&self, blurred_clean: &ImageGrid) -> Result<f64> {
        match self.noise {
            NoiseModel::Variance(v) => Ok(v.sqrt()),
            NoiseModel::Bsnr(db) => crate::image::sigma_for_bsnr(blurred_clean, db),
        }
    }

    /// Builds the blur operator for this scenario on a given image size.
    pub fn operator(&self, height: usize, width: usize, epsilon: f64, sigma_n: f64) -> Result<BlurOperator> {
        BlurOperator::new(self.kernel.clone(), height, width, epsilon, sigma_n)
    }

    /// Blurs `x`, calibrates the noise level and adds noise. Returns `(y, σₙ, Hx)`.
    pub fn degrade(
        &self,
        x: &ImageGrid,
        rng: &mut crate::image::RngState,
    ) -> Result<(ImageGrid, f64, ImageGrid)> {
        let probe = self.operator(x.height(), x.width(), 0.0, 0.0)?;
        let blurred = probe.forward(x)?;
        let sigma_n = self.noise_sigma(&blurred)?;
        let y = crate::image::add_gaussian_noise(&blurred, sigma_n, rng)?;
        Ok((y, sigma_n, blurred))
    }
}

/// Unnormalized kernel `1/(1 + x₁² + x₂²)` on `x₁, x₂ ∈ −radius..=radius`.
pub fn inverse_quadratic_kernel(radius: usize) -> Result<Kernel> {
    Kernel::from_fn(radius, radius, |a, b| 1.0 / (1.0 + (a * a + b * b) as f64))
}

/// Normalized blur kernel of scenario `id` (1–4).
pub fn generate_scenario_kernel(id: u8) -> Result<Kernel> {
    match id {
        1 | 2 => inverse_quadratic_kernel(7)?.normalized(),
        3 => Kernel::uniform(9),
        4 => {
            let taps = [1.0, 4.0, 6.0, 4.0, 1.0];
            Kernel::outer(&taps, &taps)?.normalized()
        }
        _ => Err(Error::invalid(format!("scenario must be 1-4, got {id}"))),
    }
}

pub fn scenario(id: u8) -> Result<ScenarioSpec> {
    let kernel = generate_scenario_kernel(id)?;
    let (noise, idbp_epsilon, pnp_beta, pnp_lambda) = match id {
        1 => (NoiseModel::Variance(2.0), 7e-3, 0.85, 2.0 / 255.0),
        2 => (NoiseModel::Variance(8.0), 4e-3, 0.85, 1.0 / 255.0),
        3 => (NoiseModel::Bsnr(40.0), 8e-3, 0.9, 3.0 / 255.0),
        _ => (NoiseModel::Variance(49.0), 2e-3, 0.8, 1.0 / 255.0),
    };
    Ok(ScenarioSpec {
        id,
        kernel,
        noise,
        idbp_epsilon,
        pnp_beta,
        pnp_lambda,
    })
}
