"""Kernel backend selection.

The numba path is the default; set MMREG_NO_NUMBA=1 to force the pure
numpy fallback (also used automatically when numba cannot be imported).
Both backends expose the same functions with matching semantics.
"""

import os


def _want_numpy() -> bool:
    return os.environ.get("MMREG_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


if _want_numpy():
    from . import numpy_impl as _impl
else:
    try:
        from . import numba_impl as _impl
    except ImportError:
        from . import numpy_impl as _impl

BACKEND = _impl.BACKEND

pairwise_dist = _impl.pairwise_dist
lap_solve_square = _impl.lap_solve_square
sc_bin_counts = _impl.sc_bin_counts
harris_response = _impl.harris_response
local_max_mask = _impl.local_max_mask
fast_scores = _impl.fast_scores
bilinear_sample = _impl.bilinear_sample
tps_eval_points = _impl.tps_eval_points
label_components = _impl.label_components
window_stats_valid = _impl.window_stats_valid
