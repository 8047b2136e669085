"""The Gaussian determinant estimator of the permanent.

For ``A`` with nonnegative entries put ``X(A)_ij = sqrt(a_ij) x_ij`` and
``Z(A) = X(A)^* X(A)``.  With ``x_ij`` standard (real or complex) Gaussians,
``E det Z(A) = per A``.  Everything here works with ``log det Z``, obtained
from the singular values of ``X`` so that ``Z`` is never formed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from permcast import _streams
from permcast.matrix_core import MatrixLike, as_matrix


class FieldKind(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


@dataclass(frozen=True)
class EstimateRun:
    log_det: float
    field: FieldKind
    seed: int
    shape: tuple[int, int]


def _field(field) -> FieldKind:
    return FieldKind(field.value if isinstance(field, FieldKind) else str(field).lower())


def gaussian_batch(
    field,
    shape: tuple[int, int],
    seed: int,
    start: int,
    stop: int,
    tags: Sequence[int] = (),
) -> np.ndarray:
    """Entry draws ``x`` for trials ``start .. stop-1``, shape ``(T, n, m)``.

    Complex entries are ``(x_R + i x_I) / sqrt(2)`` so that ``E|x|^2 = 1``.
    """
    field = _field(field)
    n, m = shape
    if field is FieldKind.REAL:
        return _streams.normals(seed, tags, start, stop, (n, m))
    z = _streams.normals(seed, tags, start, stop, (2, n, m))
    return (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)


def sample_X(A: MatrixLike, field=FieldKind.REAL, seed: int = 0) -> np.ndarray:
    """One draw of ``X(A)`` (trial 0 of the stream keyed by ``seed``)."""
    A = as_matrix(A)
    x = gaussian_batch(field, A.shape, seed, 0, 1)[0]
    return np.sqrt(A.entries) * x


def sample_X_batch(
    A: MatrixLike, field, seed: int, start: int, stop: int, tags: Sequence[int] = ()
) -> np.ndarray:
    A = as_matrix(A)
    x = gaussian_batch(field, A.shape, seed, start, stop, tags)
    return np.sqrt(A.entries) * x


def _diagonal_square(A) -> bool:
    arr = A.entries
    return A.n == A.m and not np.any(arr[~np.eye(A.n, dtype=bool)])


def log_det_from_X(X: np.ndarray) -> np.ndarray:
    """``log det(X^* X)`` for a stack of ``n x m`` matrices.

    Computed as twice the sum of log singular values; ``-inf`` when any
    singular value is zero.
    """
    sv = np.linalg.svd(X, compute_uv=False)
    with np.errstate(divide="ignore"):
        return 2.0 * np.sum(np.log(sv), axis=-1)


def log_det_batch(
    A: MatrixLike, field, seed: int, start: int, stop: int, tags: Sequence[int] = ()
) -> np.ndarray:
    """``log det Z(A)`` for trials ``start .. stop-1``.

    A square diagonal ``A`` skips the SVD: ``det Z = prod a_ii |x_ii|^2``.
    """
    A = as_matrix(A)
    diagonal = _diagonal_square(A)
    draw_shape = (2,) + A.shape if _field(field) is FieldKind.COMPLEX else A.shape
    out = np.empty(stop - start)
    for lo, hi in _streams.subranges(start, stop, draw_shape):
        X = sample_X_batch(A, field, seed, lo, hi, tags)
        if diagonal:
            d = np.abs(np.diagonal(X, axis1=-2, axis2=-1)) ** 2
            with np.errstate(divide="ignore"):
                out[lo - start : hi - start] = np.sum(np.log(d), axis=-1)
        else:
            out[lo - start : hi - start] = log_det_from_X(X)
    return out


def log_det_estimate(A: MatrixLike, field=FieldKind.REAL, seed: int = 0) -> EstimateRun:
    """One draw of ``log det Z(A)``."""
    A = as_matrix(A)
    field = _field(field)
    value = float(log_det_batch(A, field, seed, 0, 1)[0])
    return EstimateRun(log_det=value, field=field, seed=int(seed), shape=A.shape)


def log_mean_and_se_from_logs(log_values: np.ndarray) -> tuple[float, float]:
    """Logs of the sample mean and standard error of ``exp(log_values)``.

    Values are rescaled by their maximum before exponentiation and summed with
    ``math.fsum`` so the result does not depend on the order of the draws.
    """
    logs = np.asarray(log_values, dtype=np.float64)
    N = logs.size
    if N < 2:
        raise ValueError("need at least two draws for a standard error")
    top = float(np.max(logs))
    if top == -math.inf:
        return -math.inf, -math.inf
    w = np.exp(logs - top)
    mean_w = math.fsum(w) / N
    var_w = math.fsum((w - mean_w) ** 2) / (N - 1)
    log_se = top + 0.5 * math.log(var_w / N) if var_w > 0 else -math.inf
    return top + math.log(mean_w), log_se


def mean_and_se_from_logs(log_values: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error of ``exp(log_values)``; ``inf`` past double range."""
    log_mean, log_se = log_mean_and_se_from_logs(log_values)
    with np.errstate(over="ignore"):
        return float(np.exp(log_mean)), float(np.exp(log_se))


def averaged_estimate(
    A: MatrixLike, N: int, field=FieldKind.REAL, seed: int = 0, tags: Sequence[int] = ()
) -> tuple[float, float]:
    """Mean of ``det Z(A)`` over ``N`` independent draws, with its standard error."""
    if N < 2:
        raise ValueError("averaged_estimate needs N >= 2")
    logs = log_det_batch(A, field, seed, 0, int(N), tags)
    return mean_and_se_from_logs(logs)


def chebyshev_coverage_bound(n: int, m: int, delta: float, N: int) -> float:
    """Chebyshev bound on ``P(|Y - per J| > delta per J)`` for an ``N``-draw mean.

    Uses the exact second-moment ratio of ``det Z(J_{nm})``:
    ``(ratio - 1) / (delta^2 N)``.
    """
    from permcast.flat_case import flat_moments

    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    if math.isinf(delta):
        return 0.0
    ratio = flat_moments(n, m).variance_ratio
    return (ratio - 1.0) / (delta * delta * N)
