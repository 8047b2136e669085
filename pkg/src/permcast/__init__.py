"""Gaussian determinant estimators of matrix permanents and their diagnostics."""

__version__ = "0.1.0"

from permcast.estimator import (  # noqa: E402
    EstimateRun,
    FieldKind,
    averaged_estimate,
    chebyshev_coverage_bound,
    log_det_estimate,
    sample_X,
)
from permcast.exact_perm import (  # noqa: E402
    PermValue,
    perm_flat,
    perm_naive,
    perm_rank_one,
    perm_rect,
    perm_ryser,
)
from permcast.matrix_core import (  # noqa: E402
    DenseMatrix,
    EntryBounds,
    SparseColumnSpec,
    gen_flat,
    gen_rank_one,
    gen_sparse_column,
    gen_uniform,
    read_matrix,
    scale_tilde,
    validate_class,
)

__all__ = [
    "DenseMatrix",
    "EntryBounds",
    "EstimateRun",
    "FieldKind",
    "PermValue",
    "SparseColumnSpec",
    "averaged_estimate",
    "chebyshev_coverage_bound",
    "gen_flat",
    "gen_rank_one",
    "gen_sparse_column",
    "gen_uniform",
    "log_det_estimate",
    "perm_flat",
    "perm_naive",
    "perm_rank_one",
    "perm_rect",
    "perm_ryser",
    "read_matrix",
    "sample_X",
    "scale_tilde",
    "validate_class",
]
