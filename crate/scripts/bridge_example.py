#!/usr/bin/env python3
"""Example external denoiser for `--denoiser external`.

Reads `IDBP1 <height> <width> <sigma>\n` plus row-major little-endian float32
pixels on stdin and writes the denoised pixels in the same layout to stdout.
Uses the `bm3d` package when installed, otherwise scikit-image's NLM.

    idbp inpaint --input cameraman.pgm --denoiser external \
        --external-cmd "python3 scripts/bridge_example.py"
"""
import sys

import numpy as np


def denoise(img, sigma):
    if sigma <= 0:
        return img
    try:
        import bm3d

        return bm3d.bm3d(img, sigma_psd=sigma)
    except ImportError:
        from skimage.restoration import denoise_nl_means

        return denoise_nl_means(img, patch_size=7, patch_distance=10, h=0.6 * sigma, sigma=sigma, fast_mode=True)


def main():
    stdin = sys.stdin.buffer
    magic, h, w, sigma = stdin.readline().split()
    if magic != b"IDBP1":
        sys.exit("unexpected header")
    h, w, sigma = int(h), int(w), float(sigma)
    img = np.frombuffer(stdin.read(4 * h * w), dtype="<f4").reshape(h, w).astype(np.float64)
    out = denoise(img, sigma)
    sys.stdout.buffer.write(np.ascontiguousarray(out, dtype="<f4").tobytes())


if __name__ == "__main__":
    main()
