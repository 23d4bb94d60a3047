use rayon::prelude::*;

use crate::image::ImageGrid;

/// Sliding-window DCT hard thresholding.
///
/// Every fully contained `patch x patch` block (stride 1) is transformed with
/// an orthonormal 2-D DCT-II, AC coefficients with magnitude below
/// `threshold·σ` are zeroed, and the inverse-transformed blocks are averaged
/// with uniform weights. The DC coefficient is always kept, so adding a
/// constant to the input adds it to the output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DctParams {
    pub patch: usize,
    pub threshold: f64,
}

impl Default for DctParams {
    fn default() -> Self {
        Self {
            patch: 8,
            threshold: 3.0,
        }
    }
}

/// Patch rows processed per parallel batch; bounds the scratch memory.
const BAND: usize = 16;

/// Orthonormal DCT-II matrix, `basis[k * p + n] = α(k) cos(π(2n+1)k / 2p)`.
fn dct_basis(p: usize) -> Vec<f64> {
    let mut basis = vec![0.0; p * p];
    for k in 0..p {
        let alpha = if k == 0 {
            (1.0 / p as f64).sqrt()
        } else {
            (2.0 / p as f64).sqrt()
        };
        for n in 0..p {
            basis[k * p + n] =
                alpha * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * p) as f64).cos();
        }
    }
    basis
}

/// `out = basis · block · basisᵀ` (forward) or `basisᵀ · block · basis` (inverse).
fn transform(block: &[f64], basis: &[f64], p: usize, inverse: bool, tmp: &mut [f64], out: &mut [f64]) {
    let m = |k: usize, n: usize| if inverse { basis[n * p + k] } else { basis[k * p + n] };
    // rows: tmp[r][k] = Σ_n m(k, n) block[r][n]
    for r in 0..p {
        for k in 0..p {
            let mut acc = 0.0;
            for n in 0..p {
                acc += m(k, n) * block[r * p + n];
            }
            tmp[r * p + k] = acc;
        }
    }
    // columns: out[k][c] = Σ_r m(k, r) tmp[r][c]
    for k in 0..p {
        for c in 0..p {
            let mut acc = 0.0;
            for r in 0..p {
                acc += m(k, r) * tmp[r * p + c];
            }
            out[k * p + c] = acc;
        }
    }
}

pub(super) fn denoise(z: &ImageGrid, sigma: f64, params: &DctParams) -> ImageGrid {
    if sigma == 0.0 {
        return z.clone();
    }
    let (h, w) = z.dims();
    let p = params.patch.min(h).min(w).max(1);
    let thr = params.threshold * sigma;
    let basis = dct_basis(p);
    let data = z.data();
    let (rows, cols) = (h - p + 1, w - p + 1);
    let pp = p * p;

    let mut acc = vec![0.0; h * w];
    let mut count = vec![0u32; h * w];

    let filter_row = |top: usize| -> Vec<f64> {
        let mut out = vec![0.0; cols * pp];
        let mut block = vec![0.0; pp];
        let mut tmp = vec![0.0; pp];
        let mut coef = vec![0.0; pp];
        for left in 0..cols {
            for r in 0..p {
                let src = (top + r) * w + left;
                block[r * p..(r + 1) * p].copy_from_slice(&data[src..src + p]);
            }
            transform(&block, &basis, p, false, &mut tmp, &mut coef);
            for v in coef.iter_mut().skip(1) {
                if v.abs() < thr {
                    *v = 0.0;
                }
            }
            transform(&coef, &basis, p, true, &mut tmp, &mut out[left * pp..(left + 1) * pp]);
        }
        out
    };

    for band in (0..rows).step_by(BAND) {
        let end = (band + BAND).min(rows);
        let filtered: Vec<Vec<f64>> = (band..end).into_par_iter().map(filter_row).collect();
        // fixed aggregation order keeps the result independent of scheduling
        for (top, blocks) in (band..end).zip(&filtered) {
            for left in 0..cols {
                let blk = &blocks[left * pp..(left + 1) * pp];
                for r in 0..p {
                    let dst = (top + r) * w + left;
                    for c in 0..p {
                        acc[dst + c] += blk[r * p + c];
                        count[dst + c] += 1;
                    }
                }
            }
        }
    }
    let out = acc.iter().zip(&count).map(|(a, &n)| a / n as f64).collect();
    ImageGrid::from_raw(h, w, out)
}
