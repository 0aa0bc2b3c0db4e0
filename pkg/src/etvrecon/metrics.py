"""Reconstruction quality metrics."""

import numpy as np
from scipy.signal import fftconvolve

__all__ = ["relative_error", "ssim"]


def relative_error(ref, cand):
    """Frobenius relative error ||cand - ref||_2 / ||ref||_2."""
    ref = np.asarray(ref)
    cand = np.asarray(cand)
    if ref.shape != cand.shape:
        raise ValueError("shape mismatch: %s vs %s" % (ref.shape, cand.shape))
    denom = np.linalg.norm(ref)
    if denom == 0:
        raise ValueError("reference image has zero norm")
    return float(np.linalg.norm(cand - ref) / denom)


def _gaussian_window(size=11, sigma=1.5):
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(ref, cand, data_range=1.0):
    """Mean structural similarity with the standard 11x11 Gaussian window.

    Computed on the real parts; window sigma 1.5, stabilizers (0.01 L)^2 and
    (0.03 L)^2 with L = data_range (1 for [0, 1] images).  Windows are applied
    in 'valid' mode, so images must be at least 11 x 11.
    """
    a = np.asarray(ref).real.astype(float)
    b = np.asarray(cand).real.astype(float)
    if a.shape != b.shape:
        raise ValueError("shape mismatch: %s vs %s" % (a.shape, b.shape))
    if min(a.shape) < 11:
        raise ValueError("images must be at least 11 x 11 for SSIM")
    w = _gaussian_window()
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2

    mu_a = fftconvolve(a, w, mode="valid")
    mu_b = fftconvolve(b, w, mode="valid")
    var_a = fftconvolve(a * a, w, mode="valid") - mu_a**2
    var_b = fftconvolve(b * b, w, mode="valid") - mu_b**2
    cov = fftconvolve(a * b, w, mode="valid") - mu_a * mu_b

    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
