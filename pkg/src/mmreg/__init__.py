"""Multimodal image registration toolkit.

Registers a moving image onto a fixed image by extracting multiscale
features, matching them with shape-context descriptors and optimal
assignment, fitting a thin-plate-spline or similarity transform, and
scoring alignment with RMSE, AAID, and SSIM.
"""

from ._kernels import BACKEND
from .correspondence import (
    cost_matrix,
    normalize_points,
    quantile_filter,
    refine_matches,
    shape_context,
    solve_assignment,
)
from .errors import StageError
from .features import (
    FeatureMap,
    FeatureStack,
    detect_fast,
    detect_harris,
    grid_to_image,
    z_normalize,
)
from .fmap import read_feature_stack, write_feature_stack
from .imaging import (
    binarize,
    load_image,
    otsu_threshold,
    remove_small_components,
    resize_bilinear,
    save_image,
    to_grayscale,
)
from .matching import MatchSet, keep_top_fraction, pairwise_distances, pool_scales, select_row_minima
from .metrics import aaid, rmse, ssim
from .pipeline import (
    PipelineConfig,
    RegistrationReport,
    emit_report,
    evaluate_recovery,
    run_registration,
)
from .synth import synth_pair
from .transform import (
    SimilarityModel,
    TpsModel,
    apply_similarity,
    apply_tps,
    fit_similarity,
    fit_tps,
    warp_image,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FeatureMap",
    "FeatureStack",
    "MatchSet",
    "PipelineConfig",
    "RegistrationReport",
    "SimilarityModel",
    "StageError",
    "TpsModel",
    "aaid",
    "apply_similarity",
    "apply_tps",
    "binarize",
    "cost_matrix",
    "detect_fast",
    "detect_harris",
    "emit_report",
    "evaluate_recovery",
    "fit_similarity",
    "fit_tps",
    "grid_to_image",
    "keep_top_fraction",
    "load_image",
    "normalize_points",
    "otsu_threshold",
    "pairwise_distances",
    "pool_scales",
    "quantile_filter",
    "read_feature_stack",
    "refine_matches",
    "remove_small_components",
    "resize_bilinear",
    "rmse",
    "run_registration",
    "save_image",
    "select_row_minima",
    "shape_context",
    "solve_assignment",
    "ssim",
    "synth_pair",
    "to_grayscale",
    "warp_image",
    "write_feature_stack",
    "z_normalize",
]
