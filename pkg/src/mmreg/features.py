"""Per-scale feature maps and built-in corner detectors.

Feature maps either come from an external activation export (see
mmreg.fmap) or from the Harris/FAST detectors below. Detector output is
a pair of arrays: points (n, 2) as float (x, y) pixel coordinates and
the matching response values sorted nonincreasing.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class FeatureMap:
    """One scale's activation grid, stored channel-major (c, gh, gw)."""

    scale_id: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ValueError("feature map values must be (channels, grid_h, grid_w)")

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def grid_h(self) -> int:
        return self.values.shape[1]

    @property
    def grid_w(self) -> int:
        return self.values.shape[2]

    def vectors(self) -> np.ndarray:
        """Per-position channel vectors, positions enumerated row-major."""
        c = self.values.shape[0]
        return self.values.reshape(c, -1).T.astype(np.float64)


@dataclass(frozen=True)
class FeatureStack:
    """Ordered per-scale maps plus the source-image size they refer to."""

    source_w: int
    source_h: int
    maps: tuple

    def __post_init__(self):
        if len(self.maps) < 1:
            raise ValueError("feature stack needs at least one map")
        if self.source_w < 1 or self.source_h < 1:
            raise ValueError("feature stack source size must be positive")

    def by_scale(self, scale_id: int) -> FeatureMap:
        for m in self.maps:
            if m.scale_id == scale_id:
                return m
        raise ValueError(f"unknown scale id {scale_id}")


def z_normalize(fmap: FeatureMap) -> FeatureMap:
    """Zero-mean unit-variance per channel; constant channels become 0."""
    v = fmap.values.astype(np.float64)
    mu = v.mean(axis=(1, 2), keepdims=True)
    sigma = v.std(axis=(1, 2), keepdims=True)
    out = np.zeros_like(v)
    np.divide(v - mu, sigma, out=out, where=sigma > 0)
    return FeatureMap(scale_id=fmap.scale_id, values=out)


def grid_to_image(grid_size, cell, source_size):
    """Map a grid cell to the pixel coordinates of its center.

    grid_size is (grid_w, grid_h), cell is (col, row), source_size is
    (w, h). Returns (x, y) floats strictly inside the source bounds.
    """
    grid_w, grid_h = grid_size
    col, row = cell
    w, h = source_size
    if not (0 <= col < grid_w and 0 <= row < grid_h):
        raise ValueError(f"cell ({col}, {row}) out of range for grid {grid_w}x{grid_h}")
    return ((col + 0.5) * (w / grid_w), (row + 0.5) * (h / grid_h))


def grid_centers(grid_w, grid_h, source_w, source_h) -> np.ndarray:
    """Pixel centers of every grid cell, row-major, as an (n, 2) array."""
    cols = (np.arange(grid_w, dtype=np.float64) + 0.5) * (source_w / grid_w)
    rows = (np.arange(grid_h, dtype=np.float64) + 0.5) * (source_h / grid_h)
    xx, yy = np.meshgrid(cols, rows)
    return np.column_stack([xx.ravel(), yy.ravel()])


def _collect_points(scores: np.ndarray, radius: int, max_points: int):
    mask = _kernels.local_max_mask(scores, radius)
    ys, xs = np.nonzero(mask)
    resp = scores[ys, xs]
    order = np.lexsort((xs, ys, -resp))
    ys, xs, resp = ys[order], xs[order], resp[order]
    if max_points is not None and len(resp) > max_points:
        ys, xs, resp = ys[:max_points], xs[:max_points], resp[:max_points]
    pts = np.column_stack([xs.astype(np.float64), ys.astype(np.float64)])
    return pts, resp.astype(np.float64)


def detect_harris(img: np.ndarray, k: float = 0.04, window: int = 3, max_points: int = 500):
    """Harris corners: Sobel gradients, 3x3 Gaussian-weighted structure
    tensor, response det(M) - k*trace(M)^2, non-maximum suppression
    within `window` pixels. Returns (points, responses) sorted by
    descending response."""
    if img.ndim != 2:
        raise ValueError("corner detection expects a grayscale image")
    if not 0.0 < k < 0.25:
        raise ValueError("harris k must be in (0, 0.25)")
    if window < 1:
        raise ValueError("window must be >= 1")
    gray = np.asarray(img, dtype=np.float64) / 255.0
    resp = _kernels.harris_response(gray, float(k))
    return _collect_points(resp, int(window), max_points)


def detect_fast(img: np.ndarray, intensity_threshold: int = 20, max_points: int = 500):
    """FAST segment-test corners (16-pixel circle, 9 contiguous pixels
    brighter or darker by more than the threshold). Score is the
    largest threshold at which the test still passes; 3x3 non-maximum
    suppression. Returns (points, responses) sorted by descending
    score."""
    if img.ndim != 2:
        raise ValueError("corner detection expects a grayscale image")
    if not 0 <= intensity_threshold <= 255:
        raise ValueError("intensity threshold must be in [0, 255]")
    gray = np.asarray(img, dtype=np.float64)
    scores = _kernels.fast_scores(gray, float(intensity_threshold))
    return _collect_points(scores, 1, max_points)
