use super::padding::reflect;
use crate::image::ImageGrid;

/// Gaussian smoothing whose width follows the noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    /// Kernel standard deviation in pixels per unit of σ.
    pub std_per_sigma: f64,
    /// Truncation radius in kernel standard deviations.
    pub truncate: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            std_per_sigma: 1.0 / 20.0,
            truncate: 3.0,
        }
    }
}

fn taps(std: f64, truncate: f64) -> Vec<f64> {
    let radius = (truncate * std).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * std * std)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

pub(super) fn denoise(z: &ImageGrid, sigma: f64, params: &GaussianParams) -> ImageGrid {
    let std = sigma * params.std_per_sigma;
    if std <= 0.0 {
        return z.clone();
    }
    let taps = taps(std, params.truncate);
    if taps.len() == 1 {
        return z.clone();
    }
    let radius = (taps.len() / 2) as isize;
    let (h, w) = z.dims();
    let mut tmp = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            tmp[r * w + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * z.get(r, reflect(c as isize + k as isize - radius, w)))
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            out[r * w + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[reflect(r as isize + k as isize - radius, h) * w + c])
                .sum();
        }
    }
    ImageGrid::from_raw(h, w, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_are_normalized_and_truncated() {
        let t = taps(1.0, 3.0);
        assert_eq!(t.len(), 7);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(t[0], t[6]);
    }

    #[test]
    fn smooths_noise() {
        let mut rng = crate::image::RngState::new(4);
        let z = rng.gaussian_image(32, 32, 20.0).unwrap();
        let out = denoise(&z, 40.0, &GaussianParams::default());
        assert!(out.norm() < 0.7 * z.norm());
    }
}
