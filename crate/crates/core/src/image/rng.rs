use super::ImageGrid;
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// Counter-based SplitMix64 stream.
///
/// The `n`-th output is the SplitMix64 finalizer (xor-shift/multiply rounds
/// with the constants above) applied to `seed + n·0x9E3779B97F4A7C15`, so a
/// `(seed, counter)` pair pins the stream on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngState {
    pub seed: u64,
    pub counter: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        let mut z = self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA));
        z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in `0..bound` (Lemire's multiply-and-reject).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// A pair of independent standard normals via the Box–Muller transform.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        (radius * angle.cos(), radius * angle.sin())
    }

    /// Fills `out` with i.i.d. `N(0, sigma²)` samples.
    pub fn fill_gaussian(&mut self, out: &mut [f64], sigma: f64) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.next_gaussian_pair();
            pair[0] = sigma * a;
            pair[1] = sigma * b;
        }
        if let [last] = chunks.into_remainder() {
            *last = sigma * self.next_gaussian_pair().0;
        }
    }

    pub fn gaussian_image(&mut self, height: usize, width: usize, sigma: f64) -> Result<ImageGrid> {
        let mut img = ImageGrid::zeros(height, width)?;
        self.fill_gaussian(img.data_mut(), sigma);
        Ok(img)
    }
}

/// Returns `x + e` with `e` i.i.d. `N(0, σₙ²)` drawn from `rng`.
pub fn add_gaussian_noise(x: &ImageGrid, sigma_n: f64, rng: &mut RngState) -> Result<ImageGrid> {
    if !(sigma_n >= 0.0) || !sigma_n.is_finite() {
        return Err(Error::invalid(format!(
            "noise level must be finite and nonnegative, got {sigma_n}"
        )));
    }
    if sigma_n == 0.0 {
        return Ok(x.clone());
    }
    let mut noise = vec![0.0; x.len()];
    rng.fill_gaussian(&mut noise, sigma_n);
    let data = x.data().iter().zip(&noise).map(|(a, e)| a + e).collect();
    Ok(ImageGrid::from_raw(x.height(), x.width(), data))
}
