"""Exact eigenvalue density of the square complex Wishart (Laguerre) ensemble.

For ``Y`` an ``n x n`` matrix of complex Gaussians with ``E|Y_ij|^2 = 1/n``
the mean empirical eigenvalue density of ``Y^* Y`` is

    p_n(x) = e^{-nx} sum_{k<n} L_k(nx)^2
           = n e^{-nx} [L^1_{n-1}(nx)^2 - L^1_n(nx) L^1_{n-2}(nx)].

Laguerre values are carried with the damping ``e^{-x/2}`` and a running log
scale, so nothing overflows even where ``L_k(x)`` itself is astronomically
large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from permcast import _streams

_RESCALE = 1e150


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class LaguerreContext:
    """Size ``n`` of the ensemble; densities are evaluated at ``n x``."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")


@dataclass(frozen=True)
class DensityEval:
    x: float
    sum_form: float
    cd_form: float


def _ctx(ctx: Union[LaguerreContext, int]) -> LaguerreContext:
    return ctx if isinstance(ctx, LaguerreContext) else LaguerreContext(int(ctx))


def _check_beta(beta: int) -> None:
    if beta not in (0, 1):
        raise ValueError(f"only beta in {{0, 1}} is supported, got {beta}")


def laguerre_scaled_table(kmax: int, beta: int, x) -> tuple[np.ndarray, np.ndarray]:
    """Signed mantissas and log scales of ``e^{-x/2} L_k^beta(x)``, ``k = 0..kmax``.

    Returns ``(mant, logscale)`` each of shape ``(kmax + 1, *x.shape)`` with
    ``e^{-x/2} L_k^beta(x) = mant[k] * exp(logscale[k])``.  Uses

        (k+1) l_{k+1} = (2k + 1 + beta - x) l_k - (k + beta) l_{k-1}.
    """
    _check_beta(beta)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    mant = np.empty((kmax + 1,) + x.shape)
    logscale = np.empty((kmax + 1,) + x.shape)
    scale = -0.5 * x
    prev = np.ones_like(x)
    mant[0], logscale[0] = prev, scale
    if kmax == 0:
        return mant, logscale
    cur = 1.0 + beta - x
    mant[1], logscale[1] = cur, scale
    for k in range(1, kmax):
        nxt = ((2 * k + 1 + beta - x) * cur - (k + beta) * prev) / (k + 1)
        prev, cur = cur, nxt
        big = np.maximum(np.abs(cur), np.abs(prev))
        over = big > _RESCALE
        if np.any(over):
            f = np.where(over, big, 1.0)
            cur = cur / f
            prev = prev / f
            scale = scale + np.log(f)
        mant[k + 1], logscale[k + 1] = cur, scale
    return mant, logscale


def laguerre_scaled_log(k: int, beta: int, x) -> tuple[np.ndarray, np.ndarray]:
    """``(sign, log|e^{-x/2} L_k^beta(x)|)``, valid far outside double range."""
    mant, logscale = laguerre_scaled_table(k, beta, x)
    with np.errstate(divide="ignore"):
        return np.sign(mant[k]), np.log(np.abs(mant[k])) + logscale[k]


def laguerre_scaled(k: int, beta: int, x):
    """``e^{-x/2} L_k^beta(x)``."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    mant, logscale = laguerre_scaled_table(k, beta, x)
    out = mant[k] * np.exp(logscale[k])
    return float(out) if np.ndim(out) == 0 else out


def density_sum_form(ctx, x):
    """``p_n(x) = sum_{k<n} (e^{-nx/2} L_k(nx))^2``."""
    n = _ctx(ctx).n
    x = np.asarray(x, dtype=np.float64)
    mant, logscale = laguerre_scaled_table(n - 1, 0, n * x)
    out = np.sum((mant * np.exp(logscale)) ** 2, axis=0)
    return float(out) if out.ndim == 0 else out


def density_cd_form(ctx, x):
    """Christoffel-Darboux form ``n [l1_{n-1}^2 - l1_n l1_{n-2}]`` at ``nx``.

    ``l1_k`` is ``e^{-nx/2} L_k^1(nx)``.
    """
    n = _ctx(ctx).n
    if n < 2:
        raise ValueError("the Christoffel-Darboux form needs n >= 2")
    x = np.asarray(x, dtype=np.float64)
    mant, logscale = laguerre_scaled_table(n, 1, n * x)
    ell = mant * np.exp(logscale)
    out = n * (ell[n - 1] ** 2 - ell[n] * ell[n - 2])
    return float(out) if out.ndim == 0 else out


def density_eval(ctx, x: float) -> DensityEval:
    return DensityEval(float(x), float(density_sum_form(ctx, x)), float(density_cd_form(ctx, x)))


# -- quadrature -------------------------------------------------------------

_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(20)


def _panel_edges(n: int, lo: float, hi: float) -> np.ndarray:
    """Initial panels resolving the ``cos(2 n sqrt(x))`` oscillation of ``p_n``.

    Steps are a quarter of the local half-wavelength, capped so no panel is
    wider than ``pi / (8 n sqrt(x))``.
    """
    edges = [lo]
    x = lo
    while x < hi:
        r = math.sqrt(x)
        # phase step of pi/4 in 2 n sqrt(x)
        step = (r + math.pi / (8 * n)) ** 2 - x
        if r > 0:
            step = min(step, math.pi / (8 * n * r))
        x = min(hi, x + step)
        edges.append(x)
    return np.asarray(edges)


def _gauss(f, a: np.ndarray, b: np.ndarray, rule) -> np.ndarray:
    nodes, weights = rule
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return half * (vals @ weights)


def adaptive_panels(f, edges: np.ndarray, tol: float = 1e-10, max_rounds: int = 40):
    """Integrate a vectorized ``f`` over panels, bisecting where needed.

    Each panel is estimated with 20-point Gauss-Legendre; the difference from
    the 10-point rule serves as its error estimate.  Returns ``(value, error)``.
    """
    a = np.asarray(edges[:-1], dtype=np.float64)
    b = np.asarray(edges[1:], dtype=np.float64)
    total = (b - a).sum()
    done_val: list[float] = []
    done_err: list[float] = []
    for _ in range(max_rounds):
        hi = _gauss(f, a, b, _GL_HI)
        err = np.abs(hi - _gauss(f, a, b, _GL_LO))
        ok = err <= tol * np.maximum((b - a) / total, 1e-3)
        done_val.extend(hi[ok].tolist())
        done_err.extend(err[ok].tolist())
        if np.all(ok):
            return math.fsum(done_val), math.fsum(done_err)
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    achieved = math.fsum(done_err) + float(np.sum(err[~ok]))
    raise QuadratureError("adaptive quadrature did not converge", achieved)


def integral_A2(ctx, eps: float, alpha: float, tol: float = 1e-8) -> float:
    """``int_0^eps x^{-alpha} p_n(x) dx``.

    The substitution ``u = x^{1-alpha}`` turns ``x^{-alpha} dx`` into
    ``du / (1 - alpha)`` and removes the endpoint singularity.
    """
    n = _ctx(ctx).n
    if not 0 < eps <= 1:
        raise ValueError(f"need 0 < eps <= 1, got {eps}")
    if not 0 <= alpha < 1:
        raise ValueError(f"need 0 <= alpha < 1, got {alpha}")
    p = 1.0 - alpha
    edges_u = _panel_edges(n, 0.0, eps) ** p

    def g(u):
        return density_sum_form(n, u ** (1.0 / p)) / p

    value, err = adaptive_panels(g, edges_u, tol=tol * 1e-2)
    if err > tol:
        raise QuadratureError("integral_A2 error above tolerance", err)
    return value


def density_mass(ctx, lo: float, hi: float, tol: float = 1e-10) -> float:
    """``int_lo^hi p_n(x) dx``."""
    n = _ctx(ctx).n
    value, _ = adaptive_panels(lambda x: density_sum_form(n, x), _panel_edges(n, lo, hi), tol=tol)
    return value


def density_normalization(ctx) -> float:
    """Total mass of ``p_n`` on ``[0, 10 + 40/n]``.

    Past that point ``p_n`` is below ``e^{-nx}`` times a polynomial of
    degree ``2n - 2`` in ``nx``, far smaller than 1e-12 for every ``n``.
    """
    n = _ctx(ctx).n
    return density_mass(n, 0.0, 10.0) + density_mass(n, 10.0, 10.0 + 40.0 / n)


def complex_wishart_eigs(n: int, seed: int, start: int = 0, stop: int | None = None, tags: Sequence[int] = ()):
    """Ascending eigenvalues of ``Y^* Y``, ``Y_ij = (x^R + i x^I) / sqrt(2n)``.

    Without ``stop`` returns the single draw for ``seed``; otherwise an array
    of shape ``(stop - start, n)``.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    single = stop is None
    if single:
        start, stop = 0, 1
    eigs = np.empty((stop - start, n))
    for lo, hi in _streams.subranges(start, stop, (2, n, n)):
        z = _streams.normals(seed, tags, lo, hi, (2, n, n))
        Y = (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0 * n)
        eigs[lo - start : hi - start] = (np.linalg.svd(Y, compute_uv=False) ** 2)[:, ::-1]
    return eigs[0] if single else eigs


def histogram_l1(eigs: np.ndarray, n: int, bins: int = 40, upper: float = 5.0) -> float:
    """L1 distance between the pooled eigenvalue histogram and ``p_n`` bin masses."""
    edges = np.linspace(0.0, upper, bins + 1)
    counts, _ = np.histogram(np.ravel(eigs), bins=edges)
    empirical = counts / np.size(eigs)
    expected = np.array([density_mass(n, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    return float(np.sum(np.abs(empirical - expected)))


def propA1_scan(n_list: Sequence[int], eps_list: Sequence[float], alpha: float) -> dict:
    """``E[(1/n) sum_{lambda < eps} lambda^{-alpha}]`` over a grid of ``(n, eps)``.

    Each entry is ``integral_A2``; the ``proxy`` entry is the value at the
    largest ``n`` and smallest ``eps``.
    """
    if not alpha < 0.5:
        raise ValueError(f"the scan is defined for alpha < 1/2, got {alpha}")
    values = [[integral_A2(n, eps, alpha) for eps in eps_list] for n in n_list]
    i = int(np.argmax(n_list))
    j = int(np.argmin(eps_list))
    return {
        "alpha": float(alpha),
        "n": [int(n) for n in n_list],
        "eps": [float(e) for e in eps_list],
        "values": values,
        "proxy": values[i][j],
    }
