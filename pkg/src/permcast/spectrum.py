"""Spectral statistics of the normalized Gram matrix ``Z(A~)``.

The normalization follows the columns ``x~_k = (n + m)^{-1/2} D_k x_k``, so
``Z(A~) = Z(A) / (n + m)`` and ``trace Z(A~) = sum a_ij x_ij^2 / (n + m)``.
Eigenvalues are always the squared singular values of ``X(A) / sqrt(n + m)``;
the smallest ones drive every statistic here and forming ``Z`` would square
the condition number.  Eigenvalues are stored in ascending order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from permcast import _streams
from permcast.estimator import FieldKind, sample_X, sample_X_batch
from permcast.matrix_core import MatrixLike, as_matrix

PSD_SLACK = 1e-10


def normalized_X(A: MatrixLike, field=FieldKind.REAL, seed: int = 0) -> np.ndarray:
    """One draw of ``X(A) / sqrt(n + m)``, whose Gram matrix is ``Z(A~)``."""
    A = as_matrix(A)
    return sample_X(A, field, seed) / math.sqrt(A.n + A.m)


class SingularMatrixError(ValueError):
    """Raised when ``Z`` is numerically singular where an inverse is needed."""


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    epsilon: float = 0.01
    s: float = 1.0

    def __post_init__(self):
        lam = np.sort(np.asarray(self.eigenvalues, dtype=np.float64))
        if lam.size and lam[0] < -PSD_SLACK:
            raise ValueError(f"eigenvalue {lam[0]} below PSD slack")
        lam = np.maximum(lam, 0.0)
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.s > 0:
            raise ValueError("s must be positive")


@dataclass(frozen=True)
class TailStatistic:
    value: float
    count_below: int
    cutoff_gap: float


def eigenvalues_of_Z(
    A: MatrixLike, field=FieldKind.REAL, seed: int = 0, epsilon: float = 0.01, s: float = 1.0
) -> SpectrumReport:
    """Spectrum of ``Z(A~)`` for one draw."""
    sv = np.linalg.svd(normalized_X(A, field, seed), compute_uv=False)
    return SpectrumReport(sv**2, epsilon=epsilon, s=s)


def eigenvalues_batch(
    A: MatrixLike, field, seed: int, start: int, stop: int, tags: Sequence[int] = ()
) -> np.ndarray:
    """Ascending spectra of ``Z(A~)`` for trials ``start .. stop-1``, shape ``(T, m)``."""
    A = as_matrix(A)
    scale = math.sqrt(A.n + A.m)
    draw_shape = (2,) + A.shape if FieldKind(field) is FieldKind.COMPLEX else A.shape
    out = np.empty((stop - start, A.m))
    for lo, hi in _streams.subranges(start, stop, draw_shape):
        X = sample_X_batch(A, field, seed, lo, hi, tags) / scale
        out[lo - start : hi - start] = (np.linalg.svd(X, compute_uv=False) ** 2)[:, ::-1]
    return out


def log_det_cutoff(report: SpectrumReport) -> float:
    """``sum log(max(lambda_i, epsilon))``."""
    return math.fsum(np.log(np.maximum(report.eigenvalues, report.epsilon)))


def log_det_cutoff_batch(eigs: np.ndarray, epsilon: float) -> np.ndarray:
    return np.sum(np.log(np.maximum(eigs, epsilon)), axis=-1)


def tail_statistic(report: SpectrumReport) -> TailStatistic:
    """``(1/s) sum_{lambda < eps} log(1/lambda)`` and the cutoff gap.

    The gap ``(1/s) sum_{lambda < eps} log(eps/lambda)`` is what the cutoff
    determinant adds to the plain one.  A zero eigenvalue gives ``inf``.
    """
    eps = report.epsilon
    if not eps < 1:
        raise ValueError("tail_statistic needs epsilon < 1")
    lam = report.eigenvalues
    small = lam[lam < eps]
    if np.any(small == 0):
        return TailStatistic(math.inf, int(small.size), math.inf)
    value = math.fsum(-np.log(small)) / report.s
    gap = math.fsum(np.log(eps / small)) / report.s
    return TailStatistic(value, int(small.size), gap)


def tail_statistic_batch(eigs: np.ndarray, epsilon: float, s: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        terms = np.where(eigs < epsilon, -np.log(eigs), 0.0)
    return np.sum(terms, axis=-1) / s


def prop31_rhs(n: int, m: int, a: float, eps: float, corrected: bool = False) -> float:
    """Closed-form bound on ``E[(1/n) sum_{lambda < eps} log(1/lambda)]``.

    ``(eps |log eps| / a) (n + m) m / (n (n - m + 1))``.  With
    ``corrected=True`` the denominator uses ``n - m - 1``, the exact mean of an
    inverse chi-square with ``n - m + 1`` degrees of freedom.
    """
    if not n > m + 3:
        raise ValueError(f"need n > m + 3, got (n, m) = ({n}, {m})")
    if not 0 < eps <= 1 / math.e:
        raise ValueError(f"need 0 < eps <= 1/e, got {eps}")
    if not a > 0:
        raise ValueError(f"need a > 0, got {a}")
    d = n - m - 1 if corrected else n - m + 1
    return (eps * abs(math.log(eps)) / a) * (n + m) * m / (n * d)


def inverse_chi2_mean(dof: int) -> float:
    """``E[1/chi2_dof] = 1/(dof - 2)``."""
    if dof <= 2:
        return math.inf
    return 1.0 / (dof - 2)


def _projection_residual(V: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Column ``v_k`` and its component orthogonal to the other columns."""
    vk = V[:, k]
    Vk = np.delete(V, k, axis=1)
    if Vk.shape[1] == 0:
        return vk, vk
    Q, _ = np.linalg.qr(Vk)
    return vk, vk - Q @ (Q.conj().T @ vk)


def inverse_diagonal_from_X(V: np.ndarray) -> np.ndarray:
    """Diagonal of ``(V^* V)^{-1}`` as ``1 / (v_k^* P_k v_k)``."""
    m = V.shape[1]
    out = np.empty(m)
    for k in range(m):
        _, r = _projection_residual(V, k)
        q = float(np.real(np.vdot(r, r)))
        if q <= 0:
            raise SingularMatrixError(f"column {k} lies in the span of the others")
        out[k] = 1.0 / q
    return out


def inverse_diagonal(A: MatrixLike, field=FieldKind.REAL, seed: int = 0) -> np.ndarray:
    """Diagonal of ``Z(A~)^{-1}`` for one draw."""
    return inverse_diagonal_from_X(normalized_X(A, field, seed))


def factorization_identity_gap(V, k: int) -> float:
    """Relative gap in ``det(V^T V) = det(V_k^T V_k) (v_k^T P_k v_k)``.

    ``k`` is the zero-based index of the deleted column.
    """
    V = np.asarray(V)
    if V.ndim != 2 or not 0 <= k < V.shape[1]:
        raise IndexError(f"column {k} out of range for shape {V.shape}")
    if np.linalg.matrix_rank(V) < V.shape[1]:
        raise SingularMatrixError("V must have full column rank")
    full = float(np.real(np.linalg.det(V.conj().T @ V)))
    Vk = np.delete(V, k, axis=1)
    rest = float(np.real(np.linalg.det(Vk.conj().T @ Vk))) if Vk.shape[1] else 1.0
    vk = V[:, k]
    P = np.eye(V.shape[0]) - (Vk @ np.linalg.solve(Vk.conj().T @ Vk, Vk.conj().T) if Vk.shape[1] else 0.0)
    quad = float(np.real(np.vdot(vk, P @ vk)))
    return abs(full - rest * quad) / abs(full)


def quadratic_form_bounds_check(
    A: MatrixLike, k: int, field=FieldKind.REAL, seed: int = 0
) -> bool:
    """Eigenvalue sandwich for ``D_k P_k D_k``.

    ``D_k = diag(sqrt(a_1k), ..., sqrt(a_nk))`` and ``P_k`` projects onto the
    orthogonal complement of the other columns of ``X(A)``.  Passes iff exactly
    ``m - 1`` eigenvalues are (numerically) zero and the rest lie in
    ``[min_i a_ik, max_i a_ik]``.
    """
    A = as_matrix(A)
    n, m = A.shape
    X = sample_X(A, field, seed)
    Xk = np.delete(X, k, axis=1)
    if Xk.shape[1]:
        Q, _ = np.linalg.qr(Xk)
        P = np.eye(n) - Q @ Q.conj().T
    else:
        P = np.eye(n)
    col = A.entries[:, k]
    a, b = float(col.min()), float(col.max())
    D = np.diag(np.sqrt(col))
    lam = np.linalg.eigvalsh(D @ P @ D)
    zero_tol = 1e-8 * b
    zeros = lam[np.abs(lam) <= zero_tol]
    rest = lam[np.abs(lam) > zero_tol]
    slack = 1e-10 * max(1.0, b)
    return bool(
        zeros.size == m - 1
        and np.all(rest >= a - slack)
        and np.all(rest <= b + slack)
    )


def descending(values) -> np.ndarray:
    """Reverse an ascending eigenvalue list (and vice versa)."""
    return np.asarray(values)[::-1]


def _sqrtm_psd(M: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(M)
    return (U * np.sqrt(np.maximum(w, 0.0))) @ U.conj().T


def fan_inequality_check(M1, M2, i: int, j: int, rtol: float = 1e-12) -> bool:
    """Check ``lam_{i+j}(M2) <= lam_i(M1 M2) lam_j(M1^{-1})``.

    Indices are zero-based into eigenvalues sorted in decreasing order.  The
    spectrum of ``M1 M2`` is taken from ``M1^{1/2} M2 M1^{1/2}``.  Computed
    eigenvalues are clamped at zero and the slack is ``rtol`` times the larger
    of the two sides and ``lam_max(M2)``, since a rank-deficient ``M2`` has
    exact zeros that come back as rounding noise.
    """
    M1 = np.asarray(M1)
    M2 = np.asarray(M2)
    dim = M1.shape[0]
    if i < 0 or j < 0 or i + j >= dim:
        raise IndexError(f"need 0 <= i, j and i + j < {dim}, got ({i}, {j})")
    w1 = np.linalg.eigvalsh(M1)
    if w1[0] <= 0:
        raise ValueError("M1 must be positive definite")
    root = _sqrtm_psd(M1)
    prod = np.maximum(descending(np.linalg.eigvalsh(root @ M2 @ root)), 0.0)
    inv = descending(np.sort(1.0 / w1))
    w2 = np.maximum(descending(np.linalg.eigvalsh(M2)), 0.0)
    lhs = w2[i + j]
    rhs = prod[i] * inv[j]
    return bool(lhs <= rhs + rtol * max(lhs, rhs, w2[0]))


def interlacing_check(A: MatrixLike, k: int, field=FieldKind.REAL, seed: int = 0) -> bool:
    """``lam_l(Z) <= lam_l(Z_k) <= lam_{l+1}(Z)`` after deleting column ``k``."""
    A = as_matrix(A)
    if A.m < 2:
        raise ValueError("interlacing needs m >= 2")
    X = normalized_X(A, field, seed)
    lam = np.linalg.svd(X, compute_uv=False)[::-1] ** 2
    mu = np.linalg.svd(np.delete(X, k, axis=1), compute_uv=False)[::-1] ** 2
    slack = 1e-10 * max(1.0, float(lam[-1]))
    return bool(np.all(lam[:-1] <= mu + slack) and np.all(mu <= lam[1:] + slack))
