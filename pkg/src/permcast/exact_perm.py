"""Exact permanents: brute force, Ryser, padding reduction and closed forms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from permcast.matrix_core import MatrixLike, ShapeError, as_matrix

NAIVE_MAX_N = 10
RYSER_MAX_N = 24
_VALUE_CEILING = 1e300


class SizeGuardError(ValueError):
    """Raised when an exponential-time oracle is asked for too large a matrix."""


@dataclass(frozen=True)
class PermValue:
    """A permanent held as ``log_value``; ``value`` only when below 1e300."""

    log_value: float
    value: Optional[float] = None

    @classmethod
    def from_value(cls, value: float) -> "PermValue":
        if value < 0:
            # inclusion-exclusion rounding on a true zero
            value = 0.0
        log_value = math.log(value) if value > 0 else -math.inf
        return cls(log_value, value if value < _VALUE_CEILING else None)

    @classmethod
    def from_log(cls, log_value: float) -> "PermValue":
        if log_value < math.log(_VALUE_CEILING):
            return cls(log_value, math.exp(log_value))
        return cls(log_value, None)


def perm_naive(A: MatrixLike) -> PermValue:
    """Sum over all injections of columns into rows (``n <= 10``)."""
    A = as_matrix(A)
    n, m = A.shape
    if n > NAIVE_MAX_N:
        raise SizeGuardError(f"perm_naive limited to n <= {NAIVE_MAX_N}, got n={n}")
    arr = A.entries
    cols = np.arange(m)
    parts = []
    perms = itertools.permutations(range(n), m)
    while True:
        block = np.array(list(itertools.islice(perms, 50_000)), dtype=np.intp)
        if block.size == 0:
            break
        parts.extend(arr[block, cols].prod(axis=1).tolist())
    return PermValue.from_value(math.fsum(parts))


def _ryser_square(arr: np.ndarray) -> float:
    """Ryser's formula with Gray-code steps over the high column bits.

    The subsets of the low ``k`` columns are enumerated as one vectorized
    block; the remaining columns are toggled one at a time in Gray-code order.
    """
    n = arr.shape[0]
    k = min(n, 12)
    arr = arr.astype(np.longdouble)
    low = arr[:, :k]
    masks = np.arange(1 << k)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(np.longdouble)
    low_sums = bits @ low.T  # (2^k, n) row sums over the chosen low columns
    low_sign = np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0).astype(np.longdouble)

    high = arr[:, k:]
    high_sum = np.zeros(n, dtype=np.longdouble)
    high_count = 0
    partials = []
    for g in range(1 << (n - k)):
        if g:
            j = (g & -g).bit_length() - 1  # bit flipped between gray(g-1) and gray(g)
            if (g ^ (g >> 1)) >> j & 1:
                high_sum += high[:, j]
                high_count += 1
            else:
                high_sum -= high[:, j]
                high_count -= 1
        terms = low_sign * np.prod(low_sums + high_sum, axis=1)
        if high_count % 2:
            terms = -terms
        # split extended-precision terms into two doubles for exact summation
        hi = terms.astype(np.float64)
        partials.append(math.fsum(hi))
        partials.append(math.fsum((terms - hi).astype(np.float64)))
    total = math.fsum(partials)
    return total if n % 2 == 0 else -total


def perm_ryser(A: MatrixLike) -> PermValue:
    """Permanent of a square matrix by Ryser inclusion-exclusion (``n <= 24``)."""
    A = as_matrix(A)
    n, m = A.shape
    if n != m:
        raise ShapeError(f"perm_ryser needs a square matrix, got {A.shape}")
    if n > RYSER_MAX_N:
        raise SizeGuardError(f"perm_ryser limited to n <= {RYSER_MAX_N}, got n={n}")
    return PermValue.from_value(_ryser_square(A.entries))


def perm_rect(A: MatrixLike) -> PermValue:
    """Rectangular permanent via ``per A = per([A | J]) / (n - m)!``."""
    A = as_matrix(A)
    n, m = A.shape
    if n > RYSER_MAX_N:
        raise SizeGuardError(f"perm_rect limited to n <= {RYSER_MAX_N}, got n={n}")
    if m == n:
        return perm_ryser(A)
    padded = np.hstack([A.entries, np.ones((n, n - m))])
    value = _ryser_square(padded)
    if value <= 0:
        return PermValue.from_value(0.0)
    return PermValue.from_log(math.log(value) - math.lgamma(n - m + 1))


def perm_flat(n: int, m: int) -> PermValue:
    """``per J_{nm} = n! / (n - m)!`` from log-Gamma."""
    if n < 0 or m < 0 or m > n:
        raise ShapeError(f"need 0 <= m <= n, got (n, m) = ({n}, {m})")
    log_value = math.lgamma(n + 1) - math.lgamma(n - m + 1)
    if log_value < 690.0:
        # small enough to carry the exact integer as the raw value
        return PermValue(log_value, float(math.perm(n, m)))
    return PermValue.from_log(log_value)


def log_elementary_symmetric(log_x: np.ndarray, k: int) -> float:
    """``log e_k(x)`` for positive ``x`` given as logs."""
    e = np.full(k + 1, -np.inf)
    e[0] = 0.0
    for lx in log_x:
        e[1:] = np.logaddexp(e[1:], lx + e[:-1])
    return float(e[k])


def perm_rank_one(u, v) -> PermValue:
    """``per(u v^T) = m! * e_m(u) * prod(v)``."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if np.any(u <= 0) or np.any(v <= 0):
        raise ValueError("rank-one factors must be strictly positive")
    n, m = u.size, v.size
    if m > n:
        raise ShapeError(f"need len(v) <= len(u), got {m} > {n}")
    log_value = math.lgamma(m + 1) + log_elementary_symmetric(np.log(u), m) + math.fsum(np.log(v))
    return PermValue.from_log(log_value)
