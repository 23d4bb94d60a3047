use rayon::prelude::*;

use super::padding::pad_reflect;
use crate::image::ImageGrid;

/// Non-local means with weights `exp(−max(d² − 2σ², 0) / h²)`, where `d²` is
/// the mean squared difference between patches and `h = bandwidth·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlmParams {
    pub patch_radius: usize,
    pub search_radius: usize,
    pub bandwidth: f64,
}

impl Default for NlmParams {
    fn default() -> Self {
        // 7x7 patches, 21x21 search window, h = 0.6σ
        Self {
            patch_radius: 3,
            search_radius: 10,
            bandwidth: 0.6,
        }
    }
}

pub(super) fn denoise(z: &ImageGrid, sigma: f64, p: &NlmParams) -> ImageGrid {
    let h_band = p.bandwidth * sigma;
    if sigma == 0.0 || h_band <= 0.0 {
        return z.clone();
    }
    let (h, w) = z.dims();
    let pr = p.patch_radius;
    let sr = p.search_radius as isize;
    let pad = p.patch_radius + p.search_radius;
    let (padded, _, pw) = pad_reflect(z, pad);
    let patch_area = ((2 * pr + 1) * (2 * pr + 1)) as f64;
    let inv_h2 = 1.0 / (h_band * h_band);
    let floor = 2.0 * sigma * sigma;

    // Region of patch pixels: padded rows/cols [pad - pr, pad + h + pr).
    let (rh, rw) = (h + 2 * pr, w + 2 * pr);
    let base = pad - pr;

    let mut num = vec![0.0; h * w];
    let mut den = vec![0.0; h * w];
    // Summed-area table with a zero first row/column.
    let mut sat = vec![0.0; (rh + 1) * (rw + 1)];

    for dy in -sr..=sr {
        for dx in -sr..=sr {
            for r in 0..rh {
                let mut run = 0.0;
                let src = (base + r) * pw + base;
                let nbr = ((base + r) as isize + dy) as usize * pw + (base as isize + dx) as usize;
                for c in 0..rw {
                    let d = padded[src + c] - padded[nbr + c];
                    run += d * d;
                    sat[(r + 1) * (rw + 1) + c + 1] = sat[r * (rw + 1) + c + 1] + run;
                }
            }
            let side = 2 * pr + 1;
            let sat = &sat;
            let padded = &padded;
            num.par_chunks_mut(w)
                .zip(den.par_chunks_mut(w))
                .enumerate()
                .for_each(|(r, (num_row, den_row))| {
                    let top = r * (rw + 1);
                    let bottom = (r + side) * (rw + 1);
                    let nrow = ((pad + r) as isize + dy) as usize * pw;
                    for c in 0..w {
                        let ssd = sat[bottom + c + side] - sat[top + c + side] - sat[bottom + c]
                            + sat[top + c];
                        let d2 = ssd / patch_area;
                        let weight = (-(d2 - floor).max(0.0) * inv_h2).exp();
                        let value = padded[nrow + ((pad + c) as isize + dx) as usize];
                        num_row[c] += weight * value;
                        den_row[c] += weight;
                    }
                });
        }
    }
    let data = num.iter().zip(&den).map(|(n, d)| n / d).collect();
    ImageGrid::from_raw(h, w, data)
}
