use crate::image::ImageGrid;

/// Half-sample symmetric reflection of an index into `0..n`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Row-major copy of `img` with `pad` reflected pixels on every side.
pub(crate) fn pad_reflect(img: &ImageGrid, pad: usize) -> (Vec<f64>, usize, usize) {
    let (h, w) = img.dims();
    let (ph, pw) = (h + 2 * pad, w + 2 * pad);
    let mut out = Vec::with_capacity(ph * pw);
    for r in 0..ph {
        let sr = reflect(r as isize - pad as isize, h);
        for c in 0..pw {
            let sc = reflect(c as isize - pad as isize, w);
            out.push(img.get(sr, sc));
        }
    }
    (out, ph, pw)
}
