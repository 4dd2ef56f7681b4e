"""Match refinement: log-polar shape descriptors, chi-square costs,
optimal assignment, and quantile-based inlier filtering."""

import numpy as np

from . import _kernels
from .matching import MatchSet


def normalize_points(points: np.ndarray):
    """Scale a point set so its mean pairwise distance is 1.

    Returns (scaled_points, mean_dist) where mean_dist is the original
    mean pairwise distance. Requires at least 2 distinct points.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    n = pts.shape[0]
    if n < 2:
        raise ValueError("degenerate point set: need at least 2 distinct points")
    diff = pts[:, None, :] - pts[None, :, :]
    dists = np.sqrt((diff * diff).sum(-1))
    iu = np.triu_indices(n, k=1)
    mean_dist = float(dists[iu].mean())
    if mean_dist <= 0.0:
        raise ValueError("degenerate point set: need at least 2 distinct points")
    return pts / mean_dist, mean_dist


def radial_edges(n_r: int, r_min: float, r_max: float) -> np.ndarray:
    """Bin edges uniform in log r between r_min and r_max."""
    if n_r < 1:
        raise ValueError("degenerate shape context parameters: need >= 1 radial bin")
    if not 0.0 < r_min < r_max:
        raise ValueError("degenerate shape context parameters: need 0 < r_min < r_max")
    return np.exp(np.linspace(np.log(r_min), np.log(r_max), n_r + 1))


def shape_context(
    points: np.ndarray,
    n_r: int = 5,
    n_theta: int = 12,
    r_min: float = 0.125,
    r_max: float = 2.0,
) -> np.ndarray:
    """Log-polar neighbor histograms, one row per point, sum-normalized.

    Points must already be normalized by their mean pairwise distance.
    Radii below r_min land in the innermost bin and above r_max in the
    outermost, so every one of the n-1 neighbors is counted. Bin k of
    the flat descriptor is radial_bin * n_theta + angular_bin.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("degenerate point set: need at least 2 distinct points")
    if n_theta < 1:
        raise ValueError("degenerate shape context parameters: need >= 1 angular bin")
    edges = radial_edges(n_r, r_min, r_max)
    counts = _kernels.sc_bin_counts(pts, edges, n_theta)
    return counts.astype(np.float64) / (pts.shape[0] - 1)


def cost_matrix(desc_a: np.ndarray, desc_b: np.ndarray) -> np.ndarray:
    """Chi-square histogram cost, 0.5 * sum (ha - hb)^2 / (ha + hb);
    empty-bin pairs contribute nothing."""
    a = np.asarray(desc_a, dtype=np.float64)
    b = np.asarray(desc_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError("bin-count mismatch between descriptor sets")
    ha = a[:, None, :]
    hb = b[None, :, :]
    num = (ha - hb) ** 2
    den = ha + hb
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return 0.5 * terms.sum(axis=2)


def solve_assignment(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost assignment of rows to columns.

    Rectangular inputs are padded square with dummy entries at
    max + 1; dummy matches are dropped. Returns col_of_row with -1 for
    rows left unmatched (only possible when rows > cols).
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError("cost matrix must be nonempty and 2-D")
    if not np.isfinite(c).all():
        raise ValueError("non-finite cost entry")
    na, nb = c.shape
    n = max(na, nb)
    if na != nb:
        pad_val = c.max() + 1.0
        sq = np.full((n, n), pad_val, dtype=np.float64)
        sq[:na, :nb] = c
    else:
        sq = np.ascontiguousarray(c)
    col_of_row = _kernels.lap_solve_square(sq)
    out = col_of_row[:na].copy()
    out[out >= nb] = -1
    return out


def assignment_cost(cost: np.ndarray, col_of_row: np.ndarray) -> float:
    """Total cost over real (non-dummy) matched pairs."""
    rows = np.nonzero(col_of_row >= 0)[0]
    return float(cost[rows, col_of_row[rows]].sum())


def refine_matches(
    moving_pts: np.ndarray,
    fixed_pts: np.ndarray,
    n_r: int = 5,
    n_theta: int = 12,
    r_min: float = 0.125,
    r_max: float = 2.0,
) -> MatchSet:
    """Match two point sets by shape-context descriptors and optimal
    assignment. Scores are the chi-square costs of the chosen pairs."""
    norm_m, _ = normalize_points(moving_pts)
    norm_f, _ = normalize_points(fixed_pts)
    desc_m = shape_context(norm_m, n_r, n_theta, r_min, r_max)
    desc_f = shape_context(norm_f, n_r, n_theta, r_min, r_max)
    costs = cost_matrix(desc_m, desc_f)
    col_of_row = solve_assignment(costs)
    rows = np.nonzero(col_of_row >= 0)[0]
    cols = col_of_row[rows]
    moving = np.asarray(moving_pts, dtype=np.float64)[rows]
    fixed = np.asarray(fixed_pts, dtype=np.float64)[cols]
    return MatchSet(moving=moving, fixed=fixed, scores=costs[rows, cols])


def quantile_filter(matches: MatchSet) -> MatchSet:
    """Keep pairs whose pixel displacement lies within the inclusive
    25..75% quantile band (linear-interpolation quantiles)."""
    n = len(matches)
    if n < 4:
        raise ValueError("too few matches for quantile filtering")
    diff = matches.moving - matches.fixed
    dist = np.sqrt((diff * diff).sum(axis=1))
    q25, q75 = np.percentile(dist, [25.0, 75.0])
    keep = (dist >= q25) & (dist <= q75)
    return matches.take(np.nonzero(keep)[0])
