"""Log-determinants of kernel matrices via a Cholesky decomposition that may
stop early once a probabilistic bound certifies the requested precision."""

from .bounds import (
    BoundsState,
    bound_values,
    Continue,
    Stop,
    StoppingConfig,
    bounds_at,
    decide,
    evaluate_stop,
    h_n,
    h_n_inverse,
    make_config,
    relative_error_bound,
)
from .cholesky import (
    BlockPlan,
    Completed,
    Stopped,
    cholesky_full,
    default_block_size,
    log_det_from_factor,
    stopped_cholesky_blocked,
    stopped_cholesky_rowwise,
)
from .errors import FactorizationError, InputError
from .kernels import Family, KernelSpec, assemble_matrix, kappa_plus, kernel_eval
from .pivoted import PivotedResult, guaranteed_precision_at_stop, pivoted_cholesky

__all__ = [
    "BlockPlan", "BoundsState", "Completed", "Continue", "FactorizationError", "Family", "InputError",
    "KernelSpec", "PivotedResult", "Stop", "Stopped", "StoppingConfig", "assemble_matrix", "bound_values", "bounds_at",
    "cholesky_full", "decide", "default_block_size", "evaluate_stop", "guaranteed_precision_at_stop", "h_n",
    "h_n_inverse", "kappa_plus", "kernel_eval", "log_det_from_factor", "make_config", "pivoted_cholesky",
    "relative_error_bound", "stopped_cholesky_blocked", "stopped_cholesky_rowwise",
]
