use crate::error::Result;
use crate::image::ImageGrid;

pub(super) fn linear(z: &ImageGrid, alpha: f64, truth: &ImageGrid) -> Result<ImageGrid> {
    truth.zip_map(z, |x, v| alpha * x + (1.0 - alpha) * v)
}

pub(super) fn bounded(z: &ImageGrid, sigma: f64, alpha: f64, bound: f64, truth: &ImageGrid) -> Result<ImageGrid> {
    let step = truth.sub(z)?.scale(alpha);
    let len = step.norm();
    let cap = sigma * bound;
    let step = if len > cap { step.scale(cap / len) } else { step };
    z.add(&step)
}
