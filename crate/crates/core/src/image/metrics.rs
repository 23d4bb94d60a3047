use super::ImageGrid;
use crate::error::{Error, Result};

/// Peak intensity used by [`psnr`], independent of the actual dynamic range.
pub const PEAK: f64 = 255.0;

/// Quality figures for one restored image, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub isnr_db: Option<f64>,
    pub bsnr_db: Option<f64>,
}

/// Peak signal-to-noise ratio `10·log₁₀(255² / MSE)`; `+∞` for identical inputs.
pub fn psnr(reference: &ImageGrid, estimate: &ImageGrid) -> Result<f64> {
    reference.ensure_same_dims(estimate)?;
    let sq = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    if sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sq / reference.len() as f64;
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

/// Improvement in PSNR of `restored` over `degraded`, both measured against `reference`.
pub fn isnr(reference: &ImageGrid, degraded: &ImageGrid, restored: &ImageGrid) -> Result<f64> {
    Ok(psnr(reference, restored)? - psnr(reference, degraded)?)
}

/// Blurred signal-to-noise ratio of a noiseless blurred image at noise level `sigma_n`.
///
/// Uses the per-pixel (population) variance of `blurred_clean` over `σₙ²`.
pub fn bsnr(blurred_clean: &ImageGrid, sigma_n: f64) -> Result<f64> {
    if !(sigma_n > 0.0) || !sigma_n.is_finite() {
        return Err(Error::invalid(format!("sigma_n must be positive, got {sigma_n}")));
    }
    let variance = blurred_clean.variance();
    if variance == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (variance / (sigma_n * sigma_n)).log10())
}

/// Noise standard deviation at which [`bsnr`] of `blurred_clean` equals `target_db`.
pub fn sigma_for_bsnr(blurred_clean: &ImageGrid, target_db: f64) -> Result<f64> {
    if !target_db.is_finite() {
        return Err(Error::invalid("target BSNR must be finite"));
    }
    let variance = blurred_clean.variance();
    if variance == 0.0 {
        return Err(Error::invalid("cannot calibrate BSNR on a constant image"));
    }
    Ok((variance / 10f64.powf(target_db / 10.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(h: usize, w: usize, v: Vec<f64>) -> ImageGrid {
        ImageGrid::from_vec(h, w, v).unwrap()
    }

    #[test]
    fn psnr_reference_values() {
        let x = grid(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);

        let zeros = ImageGrid::zeros(4, 4).unwrap();
        let full = ImageGrid::filled(4, 4, 255.0).unwrap();
        assert!(psnr(&zeros, &full).unwrap().abs() < 1e-12);

        let shifted = x.offset(1.0);
        let expected = 20.0 * 255f64.log10();
        assert!((psnr(&x, &shifted).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.1308).abs() < 1e-4);

        assert!(psnr(&x, &zeros).is_err());
    }

    #[test]
    fn bsnr_reference_values() {
        let flat = ImageGrid::filled(3, 3, 7.0).unwrap();
        assert_eq!(bsnr(&flat, 2.0).unwrap(), f64::NEG_INFINITY);
        assert!(bsnr(&flat, 0.0).is_err());
        assert!(bsnr(&flat, -1.0).is_err());

        // values ±1 around 0: per-pixel variance 1
        let img = grid(1, 2, vec![-1.0, 1.0]);
        assert!(bsnr(&img, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sigma_for_bsnr_inverts_bsnr() {
        let img = ImageGrid::from_fn(16, 16, |r, c| ((r * 7 + c * 13) % 23) as f64 * 9.0).unwrap();
        let v = img.variance();
        let s40 = sigma_for_bsnr(&img, 40.0).unwrap();
        assert!((s40 - v.sqrt() * 1e-2).abs() < 1e-12 * v.sqrt());
        assert!((bsnr(&img, s40).unwrap() - 40.0).abs() < 1e-9);
        let s0 = sigma_for_bsnr(&img, 0.0).unwrap();
        assert!((s0 - v.sqrt()).abs() < 1e-12 * v.sqrt());
        assert!(sigma_for_bsnr(&ImageGrid::filled(2, 2, 1.0).unwrap(), 40.0).is_err());
    }

    fn pair() -> impl Strategy<Value = (ImageGrid, ImageGrid, ImageGrid)> {
        (1usize..6, 1usize..6).prop_flat_map(|(h, w)| {
            let v = || prop::collection::vec(-50.0f64..300.0, h * w);
            (v(), v(), v()).prop_map(move |(a, b, c)| {
                (grid(h, w, a), grid(h, w, b), grid(h, w, c))
            })
        })
    }

    proptest! {
        #[test]
        fn psnr_symmetric_and_translation_invariant((a, b, _) in pair(), shift in -100.0f64..100.0) {
            let ab = psnr(&a, &b).unwrap();
            prop_assert_eq!(ab, psnr(&b, &a).unwrap());
            let shifted = psnr(&a.offset(shift), &b.offset(shift)).unwrap();
            if ab.is_finite() {
                prop_assert!((ab - shifted).abs() < 1e-9);
            }
        }

        #[test]
        fn isnr_is_psnr_difference((x, y, xhat) in pair()) {
            let direct = psnr(&x, &xhat).unwrap() - psnr(&x, &y).unwrap();
            let via = isnr(&x, &y, &xhat).unwrap();
            prop_assert!(direct == via || (direct.is_nan() && via.is_nan()));
        }
    }
}
