use super::padding::pad_reflect;
use crate::image::ImageGrid;

pub(super) fn denoise(z: &ImageGrid, sigma: f64, radius: usize) -> ImageGrid {
    if sigma == 0.0 || radius == 0 {
        return z.clone();
    }
    let (h, w) = z.dims();
    let (padded, _, pw) = pad_reflect(z, radius);
    let side = 2 * radius + 1;
    let mut window = Vec::with_capacity(side * side);
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            window.clear();
            for dr in 0..side {
                let row = (r + dr) * pw + c;
                window.extend_from_slice(&padded[row..row + side]);
            }
            let mid = window.len() / 2;
            let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            out.push(*m);
        }
    }
    ImageGrid::from_raw(h, w, out)
}
