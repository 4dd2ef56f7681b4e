"""Vectorized numpy implementations of the hot kernels.

This is the fallback path used when numba is unavailable or disabled via
MMREG_NO_NUMBA=1. Each function here has a loop-style twin in
numba_impl with the same signature and (up to float summation order)
the same output.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .lapcore import lap_solve_square as _lap_solve_square

BACKEND = "numpy"

lap_solve_square = _lap_solve_square

_ROW_CHUNK = 64  # bounds memory in the pairwise expansion below


def pairwise_dist(a, b):
    # a: (na, c), b: (nb, c) -> (na, nb) Euclidean distances.
    na = a.shape[0]
    out = np.empty((na, b.shape[0]), dtype=np.float64)
    for start in range(0, na, _ROW_CHUNK):
        stop = min(start + _ROW_CHUNK, na)
        diff = a[start:stop, None, :] - b[None, :, :]
        out[start:stop] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def sc_bin_counts(pts, r_edges, n_theta):
    # Log-polar neighbor counts per point. pts already scale-normalized.
    n = pts.shape[0]
    n_r = r_edges.shape[0] - 1
    k = n_r * n_theta
    dx = pts[None, :, 0] - pts[:, None, 0]
    dy = pts[None, :, 1] - pts[:, None, 1]
    r = np.sqrt(dx * dx + dy * dy)
    rbin = np.clip(np.searchsorted(r_edges, r, side="right") - 1, 0, n_r - 1)
    theta = np.arctan2(dy, dx)
    theta = np.where(theta < 0.0, theta + 2.0 * np.pi, theta)
    tbin = np.minimum((theta / (2.0 * np.pi / n_theta)).astype(np.int64), n_theta - 1)
    flat = rbin * n_theta + tbin
    off_diag = ~np.eye(n, dtype=bool)
    idx = (np.arange(n)[:, None] * k + flat)[off_diag]
    counts = np.bincount(idx, minlength=n * k)
    return counts.reshape(n, k).astype(np.int64)


def _pad_edge(img):
    return np.pad(img, 1, mode="edge")


def harris_response(gray, k):
    # gray: (h, w) float64 in [0, 1]. Sobel gradients, 3x3 binomial
    # smoothing of the structure tensor, det - k*trace^2.
    p = _pad_edge(gray)
    gx = (
        (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    ) / 8.0
    gy = (
        (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    ) / 8.0

    def smooth(img):
        q = _pad_edge(img)
        h = (q[:, :-2] + 2.0 * q[:, 1:-1] + q[:, 2:]) / 4.0
        return (h[:-2, :] + 2.0 * h[1:-1, :] + h[2:, :]) / 4.0

    sxx = smooth(gx * gx)
    syy = smooth(gy * gy)
    sxy = smooth(gx * gy)
    tr = sxx + syy
    return (sxx * syy - sxy * sxy) - k * (tr * tr)


def local_max_mask(resp, radius):
    # True where resp > 0 and resp equals the max of its clamped
    # (2*radius+1)^2 neighborhood.
    r = int(radius)
    padded = np.pad(resp, r, mode="constant", constant_values=-np.inf)
    windows = sliding_window_view(padded, (2 * r + 1, 2 * r + 1))
    neigh_max = windows.max(axis=(2, 3))
    return (resp > 0.0) & (resp >= neigh_max)


# Bresenham circle of radius 3, clockwise from 12 o'clock: (dx, dy)
FAST_OFFSETS = np.array(
    [
        (0, -3), (1, -3), (2, -2), (3, -1),
        (3, 0), (3, 1), (2, 2), (1, 3),
        (0, 3), (-1, 3), (-2, 2), (-3, 1),
        (-3, 0), (-3, -1), (-2, -2), (-1, -3),
    ],
    dtype=np.int64,
)

FAST_ARC = 9


def fast_scores(gray, threshold):
    # gray: (h, w) float64 with integer values. Returns the corner score
    # map: max threshold at which the segment test still passes, 0
    # where the test fails at the given threshold.
    h, w = gray.shape
    scores = np.zeros((h, w), dtype=np.float64)
    if h <= 6 or w <= 6:
        return scores
    center = gray[3 : h - 3, 3 : w - 3]
    diffs = np.empty((16, h - 6, w - 6), dtype=np.float64)
    for u, (dx, dy) in enumerate(FAST_OFFSETS):
        diffs[u] = gray[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx] - center
    bright = np.full(center.shape, -np.inf)
    dark = np.full(center.shape, -np.inf)
    for start in range(16):
        idx = [(start + j) % 16 for j in range(FAST_ARC)]
        arc = diffs[idx]
        bright = np.maximum(bright, arc.min(axis=0))
        dark = np.maximum(dark, (-arc).min(axis=0))
    score = np.maximum(bright, dark)
    score[score <= threshold] = 0.0
    scores[3 : h - 3, 3 : w - 3] = score
    return scores


def bilinear_sample(img, xs, ys, clamp_edges, fill):
    # Sample img (h, w) float64 at real-valued positions. clamp_edges
    # snaps out-of-range coordinates to the border; otherwise positions
    # outside [0, w-1] x [0, h-1] (with a tiny tolerance) return fill.
    h, w = img.shape
    eps = 1e-9
    if clamp_edges:
        valid = np.ones(xs.shape, dtype=bool)
    else:
        valid = (xs >= -eps) & (xs <= w - 1 + eps) & (ys >= -eps) & (ys <= h - 1 + eps)
    x = np.clip(xs, 0.0, w - 1.0)
    y = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    out = top * (1.0 - fy) + bot * fy
    return np.where(valid, out, fill)


def tps_eval_points(pts, ctrl, weights, affine):
    # pts: (m, 2); ctrl: (n, 2); weights: (n, 2); affine: (2, 3) with
    # rows [coeff_x, coeff_y, const]. Kernel r^2 log r written as
    # 0.5 * r^2 * log(r^2) to avoid the sqrt.
    dx = pts[:, None, 0] - ctrl[None, :, 0]
    dy = pts[:, None, 1] - ctrl[None, :, 1]
    r2 = dx * dx + dy * dy
    u = np.zeros_like(r2)
    nz = r2 > 0.0
    u[nz] = 0.5 * r2[nz] * np.log(r2[nz])
    out = np.empty((pts.shape[0], 2), dtype=np.float64)
    out[:, 0] = affine[0, 0] * pts[:, 0] + affine[0, 1] * pts[:, 1] + affine[0, 2]
    out[:, 1] = affine[1, 0] * pts[:, 0] + affine[1, 1] * pts[:, 1] + affine[1, 2]
    out += u @ weights
    return out


def label_components(mask):
    # 8-connected labeling by iterative minimum-label propagation.
    # Labels are 1..L, background 0; numbering is backend-specific.
    h, w = mask.shape
    fg = mask.astype(bool)
    labels = np.where(fg, np.arange(1, h * w + 1, dtype=np.int64).reshape(h, w), 0)
    big = np.iinfo(np.int64).max
    while True:
        cur = np.where(fg, labels, big)
        padded = np.pad(cur, 1, mode="constant", constant_values=big)
        best = cur.copy()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                shifted = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
                best = np.minimum(best, shifted)
        best = np.where(fg, best, 0)
        nxt = np.where(fg, np.minimum(labels, best), 0)
        if np.array_equal(nxt, labels):
            break
        labels = nxt
    # compress to 1..L in first-seen (row-major) order
    flat = labels.ravel()
    ids = flat[flat > 0]
    order = {}
    for v in ids:
        if v not in order:
            order[v] = len(order) + 1
    out = np.zeros(h * w, dtype=np.int64)
    for i, v in enumerate(flat):
        if v > 0:
            out[i] = order[v]
    return out.reshape(h, w)


def window_stats_valid(a, b, g):
    # Gaussian-weighted local first and second moments over all fully
    # interior windows. g: (k, k) weights summing to 1.
    k = g.shape[0]
    wa = sliding_window_view(a, (k, k))
    wb = sliding_window_view(b, (k, k))
    mu_a = np.einsum("ijkl,kl->ij", wa, g)
    mu_b = np.einsum("ijkl,kl->ij", wb, g)
    e_aa = np.einsum("ijkl,ijkl,kl->ij", wa, wa, g)
    e_bb = np.einsum("ijkl,ijkl,kl->ij", wb, wb, g)
    e_ab = np.einsum("ijkl,ijkl,kl->ij", wa, wb, g)
    return mu_a, mu_b, e_aa, e_bb, e_ab
