"""Exact distribution theory for the all-ones matrix ``J_{nm}``.

``det Z(J_{nm})`` has the law of a product of independent chi-square
variables with ``n, n-1, ..., n-m+1`` degrees of freedom.  This gives its
moments in closed form and a second sampler to test the estimator against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from permcast import _streams
from permcast.estimator import FieldKind, log_det_batch
from permcast.matrix_core import ShapeError, gen_flat

DEFAULT_BUDGET = 1_000_000


class BudgetError(ValueError):
    """Raised when a scenario would exceed its determinant-draw budget."""


@dataclass(frozen=True)
class FlatMoments:
    n: int
    m: int
    log_mean: float
    log_second_moment: float
    variance_ratio: float

    @property
    def telescoped_ratio(self) -> float:
        n, m = self.n, self.m
        return (n + 1) * (n + 2) / ((n - m + 1) * (n - m + 2))


def flat_moments(n: int, m: int) -> FlatMoments:
    """Mean, second moment and ``E[det^2] / E[det]^2`` of ``det Z(J_{nm})``.

    Each is built factor by factor from the chi-square moments
    ``E chi2_k = k`` and ``E (chi2_k)^2 = k^2 + 2k``.
    """
    if not 1 <= m <= n:
        raise ShapeError(f"need 1 <= m <= n, got (n, m) = ({n}, {m})")
    ks = range(n - m + 1, n + 1)
    log_mean = math.fsum(math.log(k) for k in ks)
    log_second = math.fsum(math.log(k * k + 2 * k) for k in ks)
    log_ratio = math.fsum(math.log1p(2.0 / k) for k in ks)
    return FlatMoments(n, m, log_mean, log_second, math.exp(log_ratio))


def telescoped_ratio_exact(n: int, m: int) -> tuple[Fraction, Fraction]:
    """The product of ``1 + 2/k`` and its telescoped closed form, as fractions."""
    prod = Fraction(1)
    for k in range(n - m + 1, n + 1):
        prod *= Fraction(k + 2, k)
    closed = Fraction((n + 1) * (n + 2), (n - m + 1) * (n - m + 2))
    return prod, closed


def chi2_degrees(n: int, m: int, shift: int = 0) -> np.ndarray:
    return np.arange(n, n - m, -1) + shift


def chi2_product_batch(
    n: int,
    m: int,
    seed: int,
    start: int,
    stop: int,
    tags: Sequence[int] = (),
    shift: int = 0,
) -> np.ndarray:
    """``log`` of products of independent chi-square draws, one per trial.

    Degrees are ``n + shift, ..., n - m + 1 + shift``.  Chi-square draws come
    from ``Gamma(k/2, scale=2)``; the product is accumulated as a sum of logs.
    """
    if not 1 <= m <= n:
        raise ShapeError(f"need 1 <= m <= n, got (n, m) = ({n}, {m})")
    df = chi2_degrees(n, m, shift)
    if np.any(df < 1):
        raise ValueError("chi-square degrees must be positive")
    size = _streams.chunk_size((m,))
    out = np.empty(stop - start)
    pos = 0
    for c, lo, hi in _streams.chunks(start, stop, size):
        rng = _streams.generator(seed, *tags, c)
        g = rng.standard_gamma(df / 2.0, size=(hi, m))
        out[pos : pos + hi - lo] = np.sum(np.log(2.0 * g[lo:hi]), axis=1)
        pos += hi - lo
    return out


def chi2_product_sample(n: int, m: int, seed: int) -> float:
    """One draw of ``log(chi2_n chi2_{n-1} ... chi2_{n-m+1})``."""
    return float(chi2_product_batch(n, m, seed, 0, 1)[0])


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float


def flat_distribution_match(
    n: int,
    m: int,
    trials: int,
    seed: int,
    shift: int = 0,
    tags: Sequence[int] = (),
) -> KSResult:
    """Two-sample KS test of ``log det Z(J_{nm})`` against the chi-square product.

    ``shift`` offsets the chi-square degrees; a nonzero shift is a deliberately
    wrong null used to show the test has power.
    """
    if trials < 1000:
        raise ValueError("flat_distribution_match needs at least 1000 trials")
    est = log_det_batch(gen_flat(n, m), FieldKind.REAL, seed, 0, trials, (*tags, 1))
    chi = chi2_product_batch(n, m, seed, 0, trials, (*tags, 2), shift=shift)
    res = stats.ks_2samp(est, chi, method="asymp")
    return KSResult(float(res.statistic), float(res.pvalue))


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    bound: float
    draws_per_estimate: int
    replications: int
    relative_errors: np.ndarray


def draws_per_estimate(n: int, rho: float) -> int:
    return math.ceil(n ** (2.0 + rho))


def y_estimates(
    n: int,
    m: int,
    N: int,
    replications: int,
    seed: int,
    tags: Sequence[int] = (),
    start: int = 0,
) -> np.ndarray:
    """``Y / per J_{nm} - 1`` for replications ``start .. start+replications-1``.

    Replication ``r`` averages ``N`` determinant draws from its own stream.
    """
    J = gen_flat(n, m)
    log_per = flat_moments(n, m).log_mean
    out = np.empty(replications)
    for i in range(replications):
        logs = log_det_batch(J, FieldKind.REAL, seed, 0, N, (*tags, start + i))
        out[i] = math.fsum(np.exp(logs - log_per)) / N - 1.0
    return out


def yn_coverage(
    n: int,
    m: int,
    rho: float,
    delta: float,
    trials: int,
    seed: int,
    N: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> CoverageResult:
    """Empirical ``P((1-delta) per <= Y <= (1+delta) per)`` and its Chebyshev bound.

    ``N`` defaults to ``ceil(n^(2+rho))`` draws per estimate; ``trials``
    independent estimates are formed.
    """
    from permcast.estimator import chebyshev_coverage_bound

    if N is None:
        N = draws_per_estimate(n, rho)
    if N * trials > budget:
        raise BudgetError(f"{N} draws x {trials} replications exceeds budget {budget}")
    rel = y_estimates(n, m, N, trials, seed)
    covered = np.abs(rel) <= delta
    return CoverageResult(
        coverage=float(np.mean(covered)),
        bound=chebyshev_coverage_bound(n, m, delta, N),
        draws_per_estimate=N,
        replications=trials,
        relative_errors=rel,
    )
