use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::operators::{DegradationOperator, InpaintingOperator};

/// Fills missing pixels by repeated 3×3 median sweeps.
///
/// Each sweep visits the still-missing pixels in raster order and assigns the
/// median of the neighbors that were known when the sweep began, so the result
/// does not depend on the position of a pixel within the sweep. Pixels with no
/// known neighbor wait for a later sweep. An even number of neighbors takes the
/// mean of the two middle values.
pub fn median_initialize(op: &InpaintingOperator, y: &ImageGrid) -> Result<ImageGrid> {
    y.ensure_dims(op.dims())?;
    y.ensure_finite("measurements")?;
    if op.observed_count() == 0 {
        return Err(Error::invalid("median initialization needs at least one observed pixel"));
    }
    let (h, w) = op.dims();
    let mut values = y.data().to_vec();
    let mut known = op.mask().to_vec();
    let mut pending: Vec<usize> = (0..h * w).filter(|&i| !known[i]).collect();
    let mut window = Vec::with_capacity(8);

    while !pending.is_empty() {
        let mut filled = Vec::new();
        for &i in &pending {
            let (r, c) = (i / w, i % w);
            window.clear();
            for rr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                    let j = rr * w + cc;
                    if j != i && known[j] {
                        window.push(values[j]);
                    }
                }
            }
            if !window.is_empty() {
                filled.push((i, median(&mut window)));
            }
        }
        // The grid is connected and holds a known pixel, so every sweep makes progress.
        debug_assert!(!filled.is_empty());
        for &(i, v) in &filled {
            values[i] = v;
            known[i] = true;
        }
        pending.retain(|&i| !known[i]);
    }
    ImageGrid::from_vec(h, w, values)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `ȳ = x + H†e`, the measurements a perfect estimator of the null-space part would see.
pub fn improved_measurements(
    x_true: &ImageGrid,
    op: &dyn DegradationOperator,
    noise: &ImageGrid,
) -> Result<ImageGrid> {
    x_true.add(&op.pseudoinverse(noise)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RngState;
    use crate::operators::generate_random_mask;

    #[test]
    fn full_mask_is_unchanged() {
        let op = InpaintingOperator::new(3, 3, vec![true; 9]).unwrap();
        let y = ImageGrid::from_fn(3, 3, |r, c| (r * 3 + c) as f64).unwrap();
        assert_eq!(median_initialize(&op, &y).unwrap(), y);
    }

    #[test]
    fn single_hole_in_constant_field() {
        let mut mask = vec![true; 25];
        mask[12] = false;
        let op = InpaintingOperator::new(5, 5, mask).unwrap();
        let y = op.forward(&ImageGrid::filled(5, 5, 42.0).unwrap()).unwrap();
        assert_eq!(y.get(2, 2), 0.0);
        assert_eq!(median_initialize(&op, &y).unwrap().get(2, 2), 42.0);
    }

    #[test]
    fn lone_observation_propagates() {
        let mut mask = vec![false; 7 * 6];
        mask[0] = true;
        let op = InpaintingOperator::new(7, 6, mask).unwrap();
        let mut y = ImageGrid::zeros(7, 6).unwrap();
        y.set(0, 0, 13.5);
        let out = median_initialize(&op, &y).unwrap();
        assert!(out.data().iter().all(|&v| v == 13.5));
    }

    #[test]
    fn even_count_averages() {
        let op = InpaintingOperator::new(1, 3, vec![true, false, true]).unwrap();
        let y = ImageGrid::from_vec(1, 3, vec![2.0, 0.0, 6.0]).unwrap();
        assert_eq!(median_initialize(&op, &y).unwrap().data(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn improved_measurements_identities() {
        let mut rng = RngState::new(8);
        let op = generate_random_mask(10, 10, 0.5, &mut rng).unwrap();
        let x = rng.gaussian_image(10, 10, 30.0).unwrap();
        let zero = ImageGrid::zeros(10, 10).unwrap();
        assert_eq!(improved_measurements(&x, &op, &zero).unwrap(), x);

        let e = rng.gaussian_image(10, 10, 5.0).unwrap();
        let ybar = improved_measurements(&x, &op, &e).unwrap();
        let pinv_e = op.pseudoinverse(&e).unwrap();
        assert!((ybar.distance(&x).unwrap() - pinv_e.norm()).abs() < 1e-9);
        for i in 0..100 {
            if !op.mask()[i] {
                assert_eq!(ybar.data()[i], x.data()[i]);
            }
        }
    }
}
