mod common;

use common::{complex_rel_err, direct_circular_conv, direct_dft2, rel_err};
use idbp_core::operators::{fft2, ifft2, BlurOperator, DegradationOperator, Fft2, Kernel};
use idbp_core::{ImageGrid, RngState};
use num_complex::Complex64;

const SIZES: [usize; 4] = [15, 64, 100, 256];

fn random(h: usize, w: usize, seed: u64) -> ImageGrid {
    RngState::new(seed).gaussian_image(h, w, 50.0).unwrap().offset(128.0)
}

#[test]
fn matches_direct_dft_on_small_grids() {
    for (i, &(h, w)) in [(1, 1), (2, 3), (5, 7), (8, 8), (12, 9), (16, 32), (32, 32)].iter().enumerate() {
        let x = random(h, w, i as u64);
        let err = complex_rel_err(&fft2(&x), &direct_dft2(&x));
        assert!(err < 1e-12, "{h}x{w}: {err:e}");
    }
}

#[test]
fn round_trip() {
    for &n in &SIZES {
        let x = random(n, n, n as u64);
        let back = ifft2(n, n, &fft2(&x));
        let re: Vec<f64> = back.iter().map(|c| c.re).collect();
        assert!(rel_err(&re, x.data()) < 1e-9, "{n}");
        assert!(back.iter().all(|c| c.im.abs() < 1e-9 * 128.0));
    }
}

#[test]
fn parseval() {
    for &n in &SIZES {
        let x = random(n, n, 100 + n as u64);
        let energy: f64 = fft2(&x).iter().map(Complex64::norm_sqr).sum::<f64>() / (n * n) as f64;
        assert!((energy - x.norm_sqr()).abs() <= 1e-9 * x.norm_sqr(), "{n}");
    }
}

#[test]
fn convolution_theorem() {
    let k = Kernel::from_fn(2, 3, |dy, dx| 1.0 + (dy * 3 + dx) as f64 * 0.1 + (dy * dx) as f64).unwrap();
    for &n in &SIZES {
        let x = random(n, n, 200 + n as u64);
        let op = BlurOperator::new(k.clone(), n, n, 0.0, 0.0).unwrap();
        let direct = direct_circular_conv(&x, &k);
        assert!(rel_err(op.forward(&x).unwrap().data(), direct.data()) < 1e-9, "{n}");
    }
}

#[test]
fn rectangular_and_prime_sizes() {
    for &(h, w) in &[(15, 64), (7, 100), (31, 17)] {
        let x = random(h, w, (h * w) as u64);
        let plan = Fft2::new(h, w);
        let spec = plan.forward_real(x.data());
        let back = plan.inverse_real(spec);
        assert!(rel_err(&back, x.data()) < 1e-9);
    }
}
