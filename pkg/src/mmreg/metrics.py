"""Registration quality metrics at pixel and structural level."""

import numpy as np

from . import _kernels
from .imaging import GRAY_WEIGHTS


def _check_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a.astype(np.float64), b.astype(np.float64)


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    """Root mean squared pixel difference over all channel samples."""
    fa, fb = _check_pair(a, b)
    d = fa - fb
    return float(np.sqrt((d * d).mean()))


def aaid(a: np.ndarray, b: np.ndarray) -> float:
    """Average absolute intensity difference over all channel samples."""
    fa, fb = _check_pair(a, b)
    return float(np.abs(fa - fb).mean())


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 2-D Gaussian weights on a size x size grid."""
    half = (size - 1) / 2.0
    ax = np.arange(size, dtype=np.float64) - half
    g1 = np.exp(-(ax * ax) / (2.0 * sigma * sigma))
    g = np.outer(g1, g1)
    return g / g.sum()


def _to_gray_float(img):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 3:
        wr, wg, wb = GRAY_WEIGHTS
        return wr * arr[:, :, 0] + wg * arr[:, :, 1] + wb * arr[:, :, 2]
    raise ValueError("expected 1 or 3 channels")


def ssim(
    a: np.ndarray,
    b: np.ndarray,
    window: int = 11,
    sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
    c3: float | None = None,
    data_range: float = 255.0,
) -> float:
    """Mean structural similarity with Gaussian-weighted local stats.

    The local map is the product of luminance, contrast, and structure
    terms (unit exponents), computed over all fully interior windows.
    RGB inputs are first collapsed to grayscale. c3 defaults to c2 / 2.
    """
    aa = np.asarray(a)
    bb = np.asarray(b)
    if aa.shape != bb.shape:
        raise ValueError(f"dimension mismatch: {aa.shape} vs {bb.shape}")
    fa = _to_gray_float(aa)
    fb = _to_gray_float(bb)
    if min(fa.shape) < window:
        raise ValueError("image smaller than the window")
    g = gaussian_window(window, sigma)
    mu_a, mu_b, e_aa, e_bb, e_ab = _kernels.window_stats_valid(fa, fb, g)
    var_a = np.maximum(e_aa - mu_a * mu_a, 0.0)
    var_b = np.maximum(e_bb - mu_b * mu_b, 0.0)
    cov = e_ab - mu_a * mu_b
    sd_a = np.sqrt(var_a)
    sd_b = np.sqrt(var_b)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    c3v = c2 / 2.0 if c3 is None else float(c3)
    lum = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    con = (2.0 * sd_a * sd_b + c2) / (var_a + var_b + c2)
    struct = (cov + c3v) / (sd_a * sd_b + c3v)
    return float((lum * con * struct).mean())
