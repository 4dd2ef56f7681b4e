"""Thin-plate-spline and similarity transforms fitted from matched
control points, plus inverse-mapping image warps."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class TpsModel:
    """T(p) = affine . (x, y, 1) + sum_i w_i U(|p - control_i|) with the
    kernel U(r) = r^2 log r, U(0) = 0."""

    control_points: np.ndarray   # (n, 2)
    affine: np.ndarray           # (2, 3), rows [coeff_x, coeff_y, const]
    radial_weights: np.ndarray   # (n, 2), column d weights output dim d
    regularization: float = 0.0

    @property
    def kind(self) -> str:
        return "tps"


@dataclass(frozen=True)
class SimilarityModel:
    """T(p) = scale * R(rotation) p + translation, det(R) = +1."""

    scale: float
    rotation: float
    translation: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("similarity scale must be positive")

    @property
    def kind(self) -> str:
        return "similarity"


def _tps_u(r2):
    out = np.zeros_like(r2)
    nz = r2 > 0.0
    out[nz] = 0.5 * r2[nz] * np.log(r2[nz])
    return out


def _as_points(p):
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    return arr


def fit_tps(src, dst, lam: float = 0.0) -> TpsModel:
    """Solve the TPS linear system mapping src control points to dst.

    lam >= 0 is added to the kernel-block diagonal; lam = 0 gives exact
    interpolation and requires non-collinear, duplicate-free sources.
    """
    src = _as_points(src)
    dst = _as_points(dst)
    if src.shape != dst.shape:
        raise ValueError("mismatched lengths between source and target points")
    if lam < 0:
        raise ValueError("regularization must be nonnegative")
    n = src.shape[0]
    if n < 3:
        raise ValueError("TPS needs at least 3 control points")
    if lam == 0.0:
        uniq = np.unique(src, axis=0)
        if uniq.shape[0] != n:
            raise ValueError("singular TPS system: duplicate control points")
    p = np.column_stack([np.ones(n), src])
    # collinear sources leave the affine part underdetermined
    if np.linalg.matrix_rank(p) < 3:
        raise ValueError("singular TPS system: collinear control points")
    diff = src[:, None, :] - src[None, :, :]
    k = _tps_u((diff * diff).sum(-1))
    k[np.diag_indices(n)] += lam
    lhs = np.zeros((n + 3, n + 3))
    lhs[:n, :n] = k
    lhs[:n, n:] = p
    lhs[n:, :n] = p.T
    rhs = np.zeros((n + 3, 2))
    rhs[:n] = dst
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular TPS system") from exc
    if not np.isfinite(sol).all():
        raise ValueError("singular TPS system")
    weights = sol[:n]
    affine = np.vstack([[sol[n + 1, 0], sol[n + 2, 0], sol[n, 0]],
                        [sol[n + 1, 1], sol[n + 2, 1], sol[n, 1]]])
    return TpsModel(
        control_points=src.copy(),
        affine=affine,
        radial_weights=weights,
        regularization=float(lam),
    )


def apply_tps(model: TpsModel, pts) -> np.ndarray:
    """Evaluate the transform at one (2,) point or many (n, 2) points."""
    arr = np.asarray(pts, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    out = _kernels.tps_eval_points(
        np.ascontiguousarray(arr),
        np.ascontiguousarray(model.control_points),
        np.ascontiguousarray(model.radial_weights),
        np.ascontiguousarray(model.affine),
    )
    return out[0] if single else out


def invert_tps(model: TpsModel) -> TpsModel:
    """Reverse-direction TPS fitted on swapped control points."""
    targets = apply_tps(model, model.control_points)
    return fit_tps(targets, model.control_points, model.regularization)


def fit_similarity(src, dst) -> SimilarityModel:
    """Least-squares isotropic scale + rotation + translation (no
    reflection) mapping src points onto dst."""
    src = _as_points(src)
    dst = _as_points(dst)
    if src.shape != dst.shape:
        raise ValueError("mismatched lengths between source and target points")
    if src.shape[0] < 2:
        raise ValueError("similarity fit needs at least 2 points")
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    cs = src - mu_s
    cd = dst - mu_d
    var_s = (cs * cs).sum() / src.shape[0]
    if var_s == 0.0:
        raise ValueError("degenerate configuration: source points coincide")
    cov = cd.T @ cs / src.shape[0]
    u, d, vt = np.linalg.svd(cov)
    s = np.ones(2)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        s[-1] = -1.0
    rot = u @ np.diag(s) @ vt
    scale = float((d * s).sum() / var_s)
    if scale <= 0.0:
        raise ValueError("degenerate configuration: nonpositive scale")
    trans = mu_d - scale * rot @ mu_s
    rotation = float(np.arctan2(rot[1, 0], rot[0, 0]))
    return SimilarityModel(scale=scale, rotation=rotation, translation=trans)


def apply_similarity(model: SimilarityModel, pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    c, s = np.cos(model.rotation), np.sin(model.rotation)
    rot = np.array([[c, -s], [s, c]])
    out = model.scale * arr @ rot.T + model.translation
    return out[0] if single else out


def invert_similarity(model: SimilarityModel) -> SimilarityModel:
    c, s = np.cos(model.rotation), np.sin(model.rotation)
    rot_inv = np.array([[c, s], [-s, c]])
    inv_scale = 1.0 / model.scale
    trans = -inv_scale * rot_inv @ model.translation
    return SimilarityModel(scale=inv_scale, rotation=-model.rotation, translation=trans)


def apply_transform(model, pts) -> np.ndarray:
    if isinstance(model, TpsModel):
        return apply_tps(model, pts)
    return apply_similarity(model, pts)


def _inverse_map(model):
    if isinstance(model, TpsModel):
        inv = invert_tps(model)
        return lambda pts: apply_tps(inv, pts)
    inv = invert_similarity(model)
    return lambda pts: apply_similarity(inv, pts)


def warp_image(moving: np.ndarray, model, out_size) -> np.ndarray:
    """Resample the moving image onto the fixed frame.

    The model maps moving coordinates to fixed coordinates; each output
    pixel is bilinearly sampled at the inverse-transformed position,
    with 0 outside the moving image. out_size is (w, h).
    """
    out_w, out_h = int(out_size[0]), int(out_size[1])
    if out_w < 1 or out_h < 1:
        raise ValueError("zero output size")
    arr = np.asarray(moving)
    xs, ys = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    grid = np.column_stack([xs.ravel(), ys.ravel()])
    src = _inverse_map(model)(grid)
    sx = np.ascontiguousarray(src[:, 0])
    sy = np.ascontiguousarray(src[:, 1])

    def _one(channel):
        vals = _kernels.bilinear_sample(channel.astype(np.float64), sx, sy, False, 0.0)
        return np.floor(vals + 0.5).astype(np.uint8).reshape(out_h, out_w)

    if arr.ndim == 2:
        return _one(arr)
    return np.stack([_one(arr[:, :, c]) for c in range(arr.shape[2])], axis=2)
