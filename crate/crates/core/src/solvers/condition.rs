use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::operators::DegradationOperator;

/// Ratio of the two sides of the per-iteration δ check:
///
/// ```text
/// [ ‖y − Hx̃‖₂ / σₙ² ] / [ ‖H†(y − Hx̃)‖₂ / (σₙ + δ)² ]
/// ```
///
/// A value below 1 at any iterate proves that `δ` violates the feasibility
/// condition; values above 1 do not prove the converse. Returns `+∞` when the
/// denominator vanishes.
pub fn condition_ratio(
    op: &dyn DegradationOperator,
    y: &ImageGrid,
    x_tilde: &ImageGrid,
    sigma_n: f64,
    delta: f64,
) -> Result<f64> {
    if !(sigma_n > 0.0) || !sigma_n.is_finite() {
        return Err(Error::invalid(format!(
            "condition ratio needs a positive noise level, got {sigma_n}"
        )));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be nonnegative, got {delta}")));
    }
    let residual = y.sub(&op.forward(x_tilde)?)?;
    let lhs = op.measurement_norm(&residual) / (sigma_n * sigma_n);
    let back = op.pseudoinverse(&residual)?.norm();
    if back == 0.0 {
        return Ok(f64::INFINITY);
    }
    let sigma = sigma_n + delta;
    let rhs = back / (sigma * sigma);
    Ok(lhs / rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RngState;
    use crate::operators::{generate_random_mask, BlurOperator, Kernel};

    #[test]
    fn inpainting_ratio_is_a_noise_level_ratio() {
        let mut rng = RngState::new(21);
        let op = generate_random_mask(12, 12, 0.7, &mut rng).unwrap();
        let x = rng.gaussian_image(12, 12, 50.0).unwrap();
        let y = op.observe(&x, 10.0, &mut rng).unwrap();
        let xt = rng.gaussian_image(12, 12, 50.0).unwrap();
        assert_eq!(condition_ratio(&op, &y, &xt, 10.0, 0.0).unwrap(), 1.0);
        let r = condition_ratio(&op, &y, &xt, 10.0, 5.0).unwrap();
        assert!((r - 2.25).abs() < 1e-12);
    }

    #[test]
    fn delta_kernel_ratio() {
        let (sigma, delta, eps) = (2.0, 3.0, 0.005);
        let t = eps * sigma * sigma;
        let op = BlurOperator::new(Kernel::delta(), 6, 6, eps, sigma).unwrap();
        let mut rng = RngState::new(4);
        let y = rng.gaussian_image(6, 6, 20.0).unwrap();
        let xt = rng.gaussian_image(6, 6, 20.0).unwrap();
        let r = condition_ratio(&op, &y, &xt, sigma, delta).unwrap();
        let expect = (1.0 + t) * (sigma + delta).powi(2) / (sigma * sigma);
        assert!((r - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn zero_residual_gives_infinity_and_zero_sigma_errors() {
        let op = crate::operators::InpaintingOperator::new(3, 3, vec![true; 9]).unwrap();
        let y = ImageGrid::filled(3, 3, 4.0).unwrap();
        assert_eq!(condition_ratio(&op, &y, &y, 1.0, 0.0).unwrap(), f64::INFINITY);
        assert!(condition_ratio(&op, &y, &y, 0.0, 1.0).is_err());
    }
}
