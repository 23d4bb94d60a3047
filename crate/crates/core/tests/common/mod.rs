#![allow(dead_code)]

use idbp_core::operators::{InpaintingOperator, Kernel};
use idbp_core::{ImageGrid, RngState};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub fn camera() -> ImageGrid {
    idbp_core::image::load_pgm(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/camera256.pgm")).unwrap()
}

/// Smooth background, an edge, and some texture.
pub fn synthetic(h: usize, w: usize, seed: u64) -> ImageGrid {
    let mut rng = RngState::new(seed);
    let tex = rng.gaussian_image(h, w, 6.0).unwrap();
    ImageGrid::from_fn(h, w, |r, c| {
        let (rf, cf) = (r as f64, c as f64);
        let edge = if rf + 0.5 * cf > 0.6 * h as f64 { 170.0 } else { 70.0 };
        edge + 25.0 * (0.35 * rf).sin() * (0.2 * cf).cos() + tex.get(r, c)
    })
    .unwrap()
}

pub fn direct_dft2(img: &ImageGrid) -> Vec<Complex64> {
    let (h, w) = img.dims();
    let mut out = vec![Complex64::default(); h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex64::default();
            for r in 0..h {
                for c in 0..w {
                    let phase = -2.0 * std::f64::consts::PI
                        * ((u * r) as f64 / h as f64 + (v * c) as f64 / w as f64);
                    acc += Complex64::from_polar(img.get(r, c), phase);
                }
            }
            out[u * w + v] = acc;
        }
    }
    out
}

/// `(k ⊛ x)[r, c] = Σ k(dy, dx) · x[(r − dy) mod h, (c − dx) mod w]`.
pub fn direct_circular_conv(x: &ImageGrid, k: &Kernel) -> ImageGrid {
    let (h, w) = x.dims();
    let (ry, rx) = ((k.height() / 2) as i64, (k.width() / 2) as i64);
    ImageGrid::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for dy in -ry..=ry {
            for dx in -rx..=rx {
                let rr = (r as i64 - dy).rem_euclid(h as i64) as usize;
                let cc = (c as i64 - dx).rem_euclid(w as i64) as usize;
                acc += k.at(dy, dx) * x.get(rr, cc);
            }
        }
        acc
    })
    .unwrap()
}

pub fn blur_matrix(k: &Kernel, h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let (ry, rx) = ((k.height() / 2) as i64, (k.width() / 2) as i64);
    let mut m = DMatrix::zeros(n, n);
    for r in 0..h {
        for c in 0..w {
            for dy in -ry..=ry {
                for dx in -rx..=rx {
                    let rr = (r as i64 - dy).rem_euclid(h as i64) as usize;
                    let cc = (c as i64 - dx).rem_euclid(w as i64) as usize;
                    m[(r * w + c, rr * w + cc)] += k.at(dy, dx);
                }
            }
        }
    }
    m
}

/// `m × n` row selection of the observed pixels.
pub fn mask_matrix(op: &InpaintingOperator) -> DMatrix<f64> {
    let observed: Vec<usize> = (0..op.mask().len()).filter(|&i| op.mask()[i]).collect();
    let mut m = DMatrix::zeros(observed.len(), op.mask().len());
    for (row, &i) in observed.iter().enumerate() {
        m[(row, i)] = 1.0;
    }
    m
}

pub fn to_vec(img: &ImageGrid) -> DVector<f64> {
    DVector::from_column_slice(img.data())
}

pub fn to_image(v: &DVector<f64>, h: usize, w: usize) -> ImageGrid {
    ImageGrid::from_vec(h, w, v.as_slice().to_vec()).unwrap()
}

pub fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.lu().solve(b).expect("dense system is nonsingular")
}

/// `(HᵀH + t·I)⁻¹Hᵀ` for a dense `H`.
pub fn tikhonov_pinv(hm: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = hm.ncols();
    let normal = hm.transpose() * hm + DMatrix::identity(n, n) * t;
    normal.lu().solve(&hm.transpose()).expect("nonsingular normal matrix")
}

/// Relative error `‖a − b‖ / max(‖b‖, 1)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1.0)
}

pub fn complex_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(1.0)
}
