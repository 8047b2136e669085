"""Nonnegative rectangular matrices, entry classes and test ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from permcast._streams import generator


class ShapeError(ValueError):
    """Raised for shapes outside ``1 <= m <= n``."""


class MatrixFormatError(ValueError):
    """Raised when a matrix text file cannot be parsed."""


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """An ``n x m`` nonnegative matrix with ``m <= n``.

    The entries are copied into a read-only float64 array.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"expected a non-empty 2-d array, got shape {arr.shape}")
        if arr.shape[1] > arr.shape[0]:
            raise ShapeError(f"need m <= n, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        if np.any(arr < 0):
            raise ValueError("matrix entries must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def entry_range(self) -> tuple[float, float]:
        """Smallest and largest entry."""
        return float(self.entries.min()), float(self.entries.max())

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None


MatrixLike = Union[DenseMatrix, np.ndarray, list]


def as_matrix(A: MatrixLike) -> DenseMatrix:
    return A if isinstance(A, DenseMatrix) else DenseMatrix(np.asarray(A))


@dataclass(frozen=True)
class EntryBounds:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("entry bounds must be finite")
        if self.a < 0 or self.b <= 0 or self.a > self.b:
            raise ValueError(f"need 0 <= a <= b and b > 0, got [{self.a}, {self.b}]")


@dataclass(frozen=True)
class SparseColumnSpec:
    """Columns with a bounded fraction ``gamma`` of zeros, ``m = ceil(theta*n)``."""

    gamma: float
    theta: float
    bounds: EntryBounds

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.gamma + self.theta >= 1:
            raise ValueError("need gamma + theta < 1")
        if self.bounds.a <= 0:
            raise ValueError("nonzero entries need a strictly positive lower bound")


def validate_class(A: MatrixLike, bounds: EntryBounds) -> bool:
    """True iff every entry of ``A`` lies in ``[bounds.a, bounds.b]``."""
    arr = np.asarray(as_matrix(A))
    return bool(np.all(arr >= bounds.a) and np.all(arr <= bounds.b))


def scale_tilde(A: MatrixLike) -> DenseMatrix:
    """Return ``A / sqrt(n + m)``."""
    A = as_matrix(A)
    return DenseMatrix(A.entries / math.sqrt(A.n + A.m))


def _check_shape(n: int, m: int) -> None:
    if n < 1 or m < 1 or m > n:
        raise ShapeError(f"need 1 <= m <= n, got (n, m) = ({n}, {m})")


def gen_flat(n: int, m: int) -> DenseMatrix:
    """All-ones ``n x m`` matrix."""
    _check_shape(n, m)
    return DenseMatrix(np.ones((n, m)))


def gen_uniform(n: int, m: int, bounds: EntryBounds, seed: int) -> DenseMatrix:
    """Entries i.i.d. uniform on ``[a, b]``."""
    _check_shape(n, m)
    if bounds.a <= 0:
        raise ValueError("gen_uniform needs a > 0")
    if bounds.a == bounds.b:
        return DenseMatrix(np.full((n, m), bounds.a))
    u = generator(seed).random((n, m))
    return DenseMatrix(np.clip(bounds.a + (bounds.b - bounds.a) * u, bounds.a, bounds.b))


def gen_rank_one(u, v) -> DenseMatrix:
    """Outer product ``u v^T`` of positive vectors."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.size == 0 or v.size == 0 or np.any(u <= 0) or np.any(v <= 0):
        raise ValueError("rank-one factors must be nonempty and strictly positive")
    _check_shape(u.size, v.size)
    return DenseMatrix(np.outer(u, v))


def gen_sparse_column(n: int, spec: SparseColumnSpec, seed: int) -> DenseMatrix:
    """``n x ceil(theta*n)`` matrix with ``ceil(gamma*n)`` zeros per column.

    Using the maximal number of zeros in every column makes this the least
    favourable member of the class.  Nonzero entries are uniform on ``[a, b]``.
    """
    m = math.ceil(spec.theta * n)
    zeros = math.ceil(spec.gamma * n)
    if m < 1 or m > n or zeros >= n:
        raise ShapeError(f"infeasible sparse-column shape for n={n}: m={m}, zeros={zeros}")
    rng = generator(seed)
    a, b = spec.bounds.a, spec.bounds.b
    arr = a + (b - a) * rng.random((n, m))
    for j in range(m):
        arr[rng.permutation(n)[:zeros], j] = 0.0
    return DenseMatrix(arr)


def read_matrix(path: Union[str, Path]) -> DenseMatrix:
    """Parse the plain-text matrix format.

    The first line holds ``n m``; each of the following ``n`` lines holds ``m``
    decimal values separated by spaces.
    """
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError(f"{path}: empty file")
    head = lines[0].split()
    try:
        n, m = (int(t) for t in head)
    except ValueError:
        raise MatrixFormatError(f"{path}: first line must be 'n m', got {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise MatrixFormatError(f"{path}: expected {n} rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        toks = ln.split()
        if len(toks) != m:
            raise MatrixFormatError(f"{path}:{i}: expected {m} values, found {len(toks)}")
        try:
            row = [float(t) for t in toks]
        except ValueError:
            raise MatrixFormatError(f"{path}:{i}: non-numeric value") from None
        if any(not math.isfinite(x) or x < 0 for x in row):
            raise MatrixFormatError(f"{path}:{i}: entries must be finite and nonnegative")
        rows.append(row)
    try:
        return DenseMatrix(np.array(rows, dtype=np.float64).reshape(n, m))
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: {exc}") from None


def write_matrix(A: MatrixLike, path: Union[str, Path]) -> None:
    A = as_matrix(A)
    lines = [f"{A.n} {A.m}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in A.entries]
    Path(path).write_text("\n".join(lines) + "\n")
