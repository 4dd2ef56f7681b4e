"""Synthetic image pairs with known ground-truth deformations."""

import numpy as np

from . import _kernels
from .transform import TpsModel, apply_tps, fit_tps

CANVAS = 224


def _ellipse_union(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    mask = np.zeros((size, size), dtype=bool)
    n_ellipses = int(rng.integers(3, 9))
    center = np.array([size / 2.0, size / 2.0]) + rng.uniform(-20, 20, 2)
    for _ in range(n_ellipses):
        ax_a = rng.uniform(15, 45)
        ax_b = rng.uniform(15, 45)
        angle = rng.uniform(0, np.pi)
        ca, sa = np.cos(angle), np.sin(angle)
        dx = xx - center[0]
        dy = yy - center[1]
        u = (dx * ca + dy * sa) / ax_a
        v = (-dx * sa + dy * ca) / ax_b
        mask |= u * u + v * v <= 1.0
        # walk the next center a bounded step so the union stays blobby
        center = np.clip(center + rng.uniform(-30, 30, 2), 50, size - 50)
    return mask


def _control_grid(size: int) -> np.ndarray:
    lin = np.linspace(size * 0.125, size * 0.875, 4)
    gx, gy = np.meshgrid(lin, lin)
    return np.column_stack([gx.ravel(), gy.ravel()])


def synth_pair(seed: int, deform_px: float, size: int = CANVAS):
    """Binary aggregate plus a warped copy and the ground-truth model.

    The fixed image is a union of 3..8 random overlapping ellipses with
    0.5% salt noise. The moving image is the fixed image resampled
    through a random thin-plate field whose control displacements have
    max magnitude deform_px. The returned model maps moving coordinates
    to fixed coordinates.
    """
    if deform_px < 0:
        raise ValueError("deform_px must be nonnegative")
    rng = np.random.default_rng(seed)
    mask = _ellipse_union(rng, size)
    salt = rng.random((size, size)) < 0.005
    fixed = np.where(mask | salt, 255, 0).astype(np.uint8)

    grid = _control_grid(size)
    disp = rng.uniform(-1.0, 1.0, grid.shape)
    if deform_px > 0:
        mags = np.sqrt((disp * disp).sum(axis=1))
        disp *= deform_px / mags.max()
        truth = fit_tps(grid + disp, grid, 0.0)
        xs, ys = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64))
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        src = apply_tps(truth, pts)
        vals = _kernels.bilinear_sample(
            fixed.astype(np.float64),
            np.ascontiguousarray(src[:, 0]),
            np.ascontiguousarray(src[:, 1]),
            False,
            0.0,
        )
        moving = np.floor(vals + 0.5).astype(np.uint8).reshape(size, size)
    else:
        truth = fit_tps(grid, grid, 0.0)
        moving = fixed.copy()
    return fixed, moving, truth


def truth_summary(truth: TpsModel) -> dict:
    """Ground-truth model serialized for the synth CLI output."""
    return {
        "kind": truth.kind,
        "lambda": truth.regularization,
        "affine": truth.affine.tolist(),
        "control_points": truth.control_points.tolist(),
        "radial_weights": truth.radial_weights.tolist(),
    }
