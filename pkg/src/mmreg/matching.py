"""Preliminary matching: per-scale distance maps, row-minimum candidate
selection, top-fraction thresholding, and cross-scale pooling into
pixel-space match pairs."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .features import FeatureMap, FeatureStack, grid_centers


class Candidates(NamedTuple):
    """Row-minimum matches: moving position index, fixed position index,
    and the feature distance."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class MatchSet:
    """Corresponding point pairs in pixel coordinates with scores."""

    moving: np.ndarray  # (n, 2) float64
    fixed: np.ndarray   # (n, 2) float64
    scores: np.ndarray  # (n,) float64

    def __post_init__(self):
        if not (len(self.moving) == len(self.fixed) == len(self.scores)):
            raise ValueError("match set arrays must have equal length")

    def __len__(self):
        return len(self.scores)

    def take(self, idx) -> "MatchSet":
        return MatchSet(self.moving[idx], self.fixed[idx], self.scores[idx])


def pairwise_distances(a: FeatureMap, b: FeatureMap) -> np.ndarray:
    """Euclidean distances between all channel vectors of two same-scale
    maps; rows index positions of a, columns positions of b."""
    if a.channels != b.channels:
        raise ValueError("channel or grid mismatch: differing channel counts")
    if (a.grid_h, a.grid_w) != (b.grid_h, b.grid_w):
        raise ValueError("channel or grid mismatch: differing grid sizes")
    return _kernels.pairwise_dist(a.vectors(), b.vectors())


def select_row_minima(d: np.ndarray) -> Candidates:
    """One candidate per row: its minimum entry, lowest column on ties."""
    d = np.asarray(d)
    if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
        raise ValueError("distance matrix must be nonempty and 2-D")
    cols = np.argmin(d, axis=1)
    rows = np.arange(d.shape[0], dtype=np.int64)
    return Candidates(rows=rows, cols=cols.astype(np.int64), values=d[rows, cols].astype(np.float64))


def keep_top_fraction(cands: Candidates, fraction: float) -> Candidates:
    """Retain the ceil(fraction * n) smallest-distance candidates, sorted
    nondecreasing, ties broken by row index."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    n = len(cands)
    if n == 0:
        return cands
    keep = math.ceil(fraction * n - 1e-9)
    order = np.lexsort((cands.rows, cands.values))[:keep]
    return Candidates(cands.rows[order], cands.cols[order], cands.values[order])


def pool_scales(per_scale, stacks) -> MatchSet:
    """Convert each scale's candidates to pixel coordinates and union
    them; exact duplicate pairs keep the smallest score.

    per_scale: sequence of (scale_id, Candidates); stacks: the
    (moving, fixed) FeatureStack pair the candidates came from.
    """
    moving_stack, fixed_stack = stacks
    mov_parts, fix_parts, score_parts = [], [], []
    for scale_id, cands in per_scale:
        ma = moving_stack.by_scale(scale_id)
        mb = fixed_stack.by_scale(scale_id)
        centers_m = grid_centers(ma.grid_w, ma.grid_h, moving_stack.source_w, moving_stack.source_h)
        centers_f = grid_centers(mb.grid_w, mb.grid_h, fixed_stack.source_w, fixed_stack.source_h)
        mov_parts.append(centers_m[cands.rows])
        fix_parts.append(centers_f[cands.cols])
        score_parts.append(cands.values)
    moving = np.concatenate(mov_parts) if mov_parts else np.empty((0, 2))
    fixed = np.concatenate(fix_parts) if fix_parts else np.empty((0, 2))
    scores = np.concatenate(score_parts) if score_parts else np.empty((0,))
    order = np.argsort(scores, kind="stable")
    moving, fixed, scores = moving[order], fixed[order], scores[order]
    seen = {}
    keep = []
    for i in range(len(scores)):
        key = (moving[i, 0], moving[i, 1], fixed[i, 0], fixed[i, 1])
        if key not in seen:
            seen[key] = True
            keep.append(i)
    keep = np.asarray(keep, dtype=np.int64)
    return MatchSet(moving=moving[keep], fixed=fixed[keep], scores=scores[keep])
