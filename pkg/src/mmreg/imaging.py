"""Image loading, conversion, resizing, binarization, and cleanup.

Images are numpy arrays: uint8 of shape (h, w) for grayscale or
(h, w, 3) for RGB. Binary masks are bool arrays of shape (h, w).
"""

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from . import _kernels

GRAY_WEIGHTS = (0.2989, 0.5870, 0.1140)


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG (grayscale or RGB) or binary PGM into an array."""
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode == "1":
                im = im.convert("L")
            if im.mode not in ("L", "RGB"):
                raise ValueError(f"unsupported or corrupt image: mode {im.mode!r}")
            arr = np.asarray(im, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValueError(f"unsupported or corrupt image: {path}") from exc
    if arr.size == 0:
        raise ValueError(f"unsupported or corrupt image: {path} has a zero dimension")
    return arr


def save_image(img: np.ndarray, path) -> None:
    """Write a grayscale or RGB uint8 array as PNG."""
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim not in (2, 3):
        raise ValueError("expected a (h, w) or (h, w, 3) array")
    PILImage.fromarray(arr).save(path, format="PNG")


def mask_to_image(mask: np.ndarray) -> np.ndarray:
    """Render a boolean mask as a {0, 255} grayscale image."""
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Collapse RGB to single-channel luminance; pass grayscale through."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 3:
        wr, wg, wb = GRAY_WEIGHTS
        lum = wr * arr[:, :, 0] + wg * arr[:, :, 1] + wb * arr[:, :, 2]
        return np.floor(lum + 0.5).astype(np.uint8)
    raise ValueError("expected 1 or 3 channels")


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Resize with edge-clamped bilinear sampling, pixel-center aligned."""
    if out_w < 1 or out_h < 1:
        raise ValueError("zero target dimension")
    arr = np.asarray(img)
    in_h, in_w = arr.shape[:2]
    if (in_w, in_h) == (out_w, out_h):
        return arr.copy()
    sx = in_w / out_w
    sy = in_h / out_h
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * sx - 0.5
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * sy - 0.5
    gx = np.tile(xs, out_h)
    gy = np.repeat(ys, out_w)

    def _one(channel):
        vals = _kernels.bilinear_sample(channel.astype(np.float64), gx, gy, True, 0.0)
        return np.floor(vals + 0.5).astype(np.uint8).reshape(out_h, out_w)

    if arr.ndim == 2:
        return _one(arr)
    return np.stack([_one(arr[:, :, c]) for c in range(arr.shape[2])], axis=2)


def otsu_threshold(img: np.ndarray) -> int:
    """Integer threshold in 0..254 maximizing between-class variance.

    Foreground is defined as strictly-above-threshold, so a constant
    image has no valid split and raises.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError("binarization expects a grayscale image")
    hist = np.bincount(arr.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    cum = np.cumsum(hist)
    cum_val = np.cumsum(hist * np.arange(256))
    w0 = cum[:255]
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.zeros(255)
    mu1 = np.zeros(255)
    mu0[valid] = cum_val[:255][valid] / w0[valid]
    mu1[valid] = (cum_val[255] - cum_val[:255][valid]) / w1[valid]
    sigma_b = np.zeros(255)
    sigma_b[valid] = w0[valid] * w1[valid] * (mu0[valid] - mu1[valid]) ** 2
    if not valid.any() or sigma_b.max() <= 0.0:
        raise ValueError("degenerate histogram")
    return int(np.argmax(sigma_b))


def binarize(img: np.ndarray, method: str = "otsu", threshold: int | None = None) -> np.ndarray:
    """Threshold a grayscale image into a boolean foreground mask.

    method "otsu" picks the threshold automatically; "fixed" uses the
    given value. Foreground = pixels strictly above the threshold.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError("binarization expects a grayscale image")
    if method == "otsu":
        t = otsu_threshold(arr)
    elif method == "fixed":
        if threshold is None:
            raise ValueError("fixed binarization requires a threshold")
        t = int(threshold)
    else:
        raise ValueError(f"unknown binarization method {method!r}")
    mask = arr > t
    if not mask.any():
        raise ValueError("empty foreground")
    return mask


def remove_small_components(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Drop 8-connected foreground components with area below min_area."""
    if min_area < 0:
        raise ValueError("min_area must be nonnegative")
    m = np.asarray(mask, dtype=bool)
    if min_area == 0:
        return m.copy()
    labels = _kernels.label_components(m.astype(np.uint8))
    areas = np.bincount(labels.ravel())
    keep = np.zeros(areas.shape[0], dtype=bool)
    keep[1:] = areas[1:] >= min_area
    out = keep[labels]
    if not out.any():
        raise ValueError("empty foreground")
    return out
