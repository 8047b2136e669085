"""Named Monte Carlo scenarios with deterministic, parallel trial execution.

Trials are processed in fixed blocks on a thread pool.  Each block draws from
streams keyed by ``(seed, scenario tag, ..., chunk)`` so the output depends
only on the configuration, never on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from scipy import special, stats

from permcast import __version__
from permcast import _streams
from permcast.estimator import FieldKind, log_det_batch
from permcast.exact_perm import RYSER_MAX_N, perm_flat, perm_rank_one, perm_rect
from permcast.flat_case import (
    DEFAULT_BUDGET,
    BudgetError,
    chi2_product_batch,
    draws_per_estimate,
    flat_moments,
    y_estimates,
)
from permcast.laguerre_density import (
    complex_wishart_eigs,
    density_cd_form,
    density_normalization,
    density_sum_form,
    histogram_l1,
    propA1_scan,
)
from permcast.matrix_core import (
    DenseMatrix,
    EntryBounds,
    SparseColumnSpec,
    gen_flat,
    gen_rank_one,
    gen_sparse_column,
    gen_uniform,
    read_matrix,
)
from permcast.spectrum import (
    eigenvalues_batch,
    factorization_identity_gap,
    fan_inequality_check,
    interlacing_check,
    log_det_cutoff_batch,
    prop31_rhs,
    quadratic_form_bounds_check,
    tail_statistic_batch,
)

BLOCK = 1024
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


class ConfigError(ValueError):
    """Invalid scenario configuration."""


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int
    trials: int
    shape: Optional[list] = None
    bounds: tuple = (1.0, 2.0)
    field: str = "real"
    epsilon: Optional[float] = None
    s: Optional[float] = None
    delta: Optional[float] = None
    alpha: Optional[float] = None
    rho: Optional[float] = None
    draws_per_estimate: Optional[int] = None
    budget: int = DEFAULT_BUDGET
    kinds: Optional[list] = None
    sparse: Optional[dict] = None
    matrix_file: Optional[str] = None
    output: Optional[str] = None
    concurrency: int = dc_field(default_factory=lambda: os.cpu_count() or 1)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("scenario", "seed", "trials"):
            if data.get(key) is None:
                raise ConfigError(f"config needs '{key}'")
        cfg = cls(**{k: v for k, v in data.items() if v is not None})
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bounds"] = list(self.bounds)
        return d

    def shapes(self, default: list) -> list[tuple[int, int]]:
        raw = self.shape if self.shape is not None else default
        if len(raw) == 2 and all(isinstance(v, (int, np.integer)) for v in raw):
            raw = [raw]
        return [(int(n), int(m)) for n, m in raw]

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.concurrency, (int, np.integer)) or self.concurrency < 1:
            raise ConfigError(f"concurrency must be a positive integer, got {self.concurrency!r}")
        try:
            FieldKind(self.field)
        except ValueError:
            raise ConfigError(f"field must be 'real' or 'complex', got {self.field!r}") from None
        try:
            self.entry_bounds()
            shapes = self.shapes([])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad shape or bounds: {exc}") from None
        for n, m in shapes:
            if not 1 <= m <= n:
                raise ConfigError(f"shape ({n}, {m}) needs 1 <= m <= n")
        spec = SCENARIOS[self.scenario]
        missing = [p for p in spec.required if getattr(self, p) is None]
        if missing:
            raise ConfigError(f"scenario {self.scenario!r} needs {missing}")
        for name in ("epsilon", "s", "delta", "rho"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if spec.check is not None:
            spec.check(self)

    def entry_bounds(self) -> EntryBounds:
        a, b = self.bounds
        return EntryBounds(float(a), float(b))

    @property
    def tag(self) -> int:
        return _streams.tag_of(self.scenario)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: dict[str, np.ndarray]
    aggregates: dict[str, dict]
    bounds: dict[str, Any]
    duration: float = 0.0

    def rows(self):
        for stat, values in self.records.items():
            for t, v in enumerate(values):
                yield t, stat, float(v)


def aggregate(values) -> dict:
    """Mean, standard error and quantiles over the finite values."""
    v = np.asarray(values, dtype=np.float64)
    v = v[np.isfinite(v)]
    out: dict[str, Any] = {"count": int(v.size)}
    if v.size == 0:
        out.update({"mean": None, "se": None})
        out.update({f"q{int(q * 100):02d}": None for q in QUANTILES})
        return out
    mean = math.fsum(v) / v.size
    se = math.sqrt(math.fsum((v - mean) ** 2) / (v.size - 1) / v.size) if v.size > 1 else None
    qs = np.quantile(np.sort(v), QUANTILES)
    out.update({"mean": mean, "se": se})
    out.update({f"q{int(q * 100):02d}": float(x) for q, x in zip(QUANTILES, qs)})
    return out


def binomial(hits: int, total: int) -> dict:
    p = hits / total
    return {"hits": int(hits), "trials": int(total), "p": p, "se": math.sqrt(max(p * (1 - p), 0.0) / total)}


def _blocks(trials: int):
    return [(lo, min(lo + BLOCK, trials)) for lo in range(0, trials, BLOCK)]


def run_blocks(cfg: ScenarioConfig, task: Callable[[int, int], Any]) -> list:
    """Run ``task(lo, hi)`` over fixed trial blocks; results in block order."""
    blocks = _blocks(cfg.trials)
    if cfg.concurrency == 1 or len(blocks) == 1:
        return [task(lo, hi) for lo, hi in blocks]
    with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
        return list(pool.map(lambda b: task(*b), blocks))


def _concat(parts: list) -> np.ndarray:
    return np.concatenate(parts) if parts else np.empty(0)


def _label(n: int, m: int) -> str:
    return f"{n}x{m}"


def _test_matrix(cfg: ScenarioConfig, i: int, n: int, m: int) -> DenseMatrix:
    if cfg.matrix_file:
        return read_matrix(cfg.matrix_file)
    return gen_uniform(n, m, cfg.entry_bounds(), _streams.derive_seed(cfg.seed, cfg.tag, i))


def _exact_log_per(A: DenseMatrix) -> Optional[float]:
    arr = A.entries
    if np.all(arr == 1.0):
        return perm_flat(A.n, A.m).log_value
    if A.n <= RYSER_MAX_N:
        return perm_rect(A).log_value
    return None


# -- scenarios --------------------------------------------------------------


def _unbiasedness(cfg: ScenarioConfig):
    shapes = [read_matrix(cfg.matrix_file).shape] if cfg.matrix_file else cfg.shapes([(5, 3)])
    records, bounds = {}, {}
    for i, (n, m) in enumerate(shapes):
        A = _test_matrix(cfg, i, n, m)
        key = f"det[{_label(n, m)}]"

        def task(lo, hi, A=A, i=i):
            return np.exp(log_det_batch(A, cfg.field, cfg.seed, lo, hi, (cfg.tag, i)))

        dets = _concat(run_blocks(cfg, task))
        records[key] = dets
        agg = aggregate(dets)
        log_per = _exact_log_per(A)
        per = math.exp(log_per) if log_per is not None else None
        z = (agg["mean"] - per) / agg["se"] if per is not None and agg["se"] else None
        bounds[key] = {"exact_per": per, "z_score": z}
    return records, bounds


def _rank_one_factors(cfg: ScenarioConfig, i: int, n: int, m: int):
    a, b = cfg.entry_bounds().a, cfg.entry_bounds().b
    if a <= 0:
        raise ConfigError("rank-one matrices need a > 0")
    rng = _streams.generator(cfg.seed, cfg.tag, i, 1 << 20)
    u = rng.uniform(math.sqrt(a), math.sqrt(b), n)
    v = rng.uniform(math.sqrt(a), math.sqrt(b), m)
    return u, v


def _concentration(cfg: ScenarioConfig):
    shapes = cfg.shapes([(50, 50), (100, 100), (200, 200)])
    kinds = cfg.kinds or ["flat", "rank_one"]
    delta = cfg.delta if cfg.delta is not None else 0.1
    records, bounds = {}, {}
    for kind_index, kind in enumerate(kinds):
        for i, (n, m) in enumerate(shapes):
            if kind == "flat":
                A = gen_flat(n, m)
                log_per = perm_flat(n, m).log_value
            elif kind == "rank_one":
                u, v = _rank_one_factors(cfg, i, n, m)
                A = gen_rank_one(u, v)
                log_per = perm_rank_one(u, v).log_value
            else:
                raise ConfigError(f"unknown matrix kind {kind!r}")
            tags = (cfg.tag, kind_index, n, m)

            def task(lo, hi, A=A, tags=tags):
                return log_det_batch(A, cfg.field, cfg.seed, lo, hi, tags)

            dev = (_concat(run_blocks(cfg, task)) - log_per) / n
            key = f"dev[{kind}:{_label(n, m)}]"
            records[key] = dev
            bounds[key] = {"delta": delta, "log_per": log_per, "exceed": binomial(int(np.sum(np.abs(dev) > delta)), dev.size)}
    return records, bounds


def _upper_tail(cfg: ScenarioConfig):
    shapes = cfg.shapes([(100, 100)])
    records, bounds = {}, {}
    for i, (n, m) in enumerate(shapes):
        A = read_matrix(cfg.matrix_file) if cfg.matrix_file else gen_flat(n, m)
        n, m = A.shape
        log_per = _exact_log_per(A)
        if log_per is None:
            raise ConfigError("upper_tail needs a matrix with a computable permanent")
        s = cfg.s if cfg.s is not None else float(n)

        def task(lo, hi, A=A, i=i):
            return log_det_batch(A, cfg.field, cfg.seed, lo, hi, (cfg.tag, i))

        stat = (_concat(run_blocks(cfg, task)) - log_per) / s
        key = f"excess[{_label(n, m)}]"
        records[key] = stat
        bounds[key] = {
            "delta": cfg.delta,
            "s": s,
            "bound": math.exp(-2 * cfg.delta * s),
            "exceed": binomial(int(np.sum(stat > 2 * cfg.delta)), stat.size),
        }
    return records, bounds


def _cutoff_concentration(cfg: ScenarioConfig):
    shapes = cfg.shapes([(20, 10), (40, 20), (80, 40)])
    b = cfg.entry_bounds().b
    delta = cfg.delta if cfg.delta is not None else 0.05
    records, bounds = {}, {}
    for i, (n, m) in enumerate(shapes):
        A = _test_matrix(cfg, i, n, m)

        def task(lo, hi, A=A, i=i):
            eigs = eigenvalues_batch(A, cfg.field, cfg.seed, lo, hi, (cfg.tag, i))
            return log_det_cutoff_batch(eigs, cfg.epsilon) / (n + m)

        stat = _concat(run_blocks(cfg, task))
        key = f"logdet_eps[{_label(n, m)}]"
        records[key] = stat
        dev = np.abs(stat - math.fsum(stat) / stat.size)
        sd = float(np.std(stat, ddof=1)) if stat.size > 1 else None
        bounds[key] = {
            "epsilon": cfg.epsilon,
            "delta": delta,
            "sd": sd,
            # standard error of a sample standard deviation, normal approximation
            "sd_se": sd / math.sqrt(2 * (stat.size - 1)) if sd is not None else None,
            "bound": 2 * math.exp(-((m + n) ** 2) * cfg.epsilon**2 * delta**2 / (8 * b * b)),
            "exceed": binomial(int(np.sum(dev >= delta)), stat.size),
        }
    return records, bounds


def _tail_stats(cfg, A, tags, s, eps):
    def task(lo, hi):
        eigs = eigenvalues_batch(A, cfg.field, cfg.seed, lo, hi, tags)
        tail = tail_statistic_batch(eigs, eps, s)
        with np.errstate(divide="ignore"):
            mn = eps * abs(math.log(eps)) / A.n * np.sum(1.0 / eigs, axis=1)
        return tail, mn

    parts = run_blocks(cfg, task)
    return _concat([p[0] for p in parts]), _concat([p[1] for p in parts])


def _tail_statistic(cfg: ScenarioConfig):
    shapes = cfg.shapes([(12, 6), (20, 10)])
    a = cfg.entry_bounds().a
    eps = cfg.epsilon
    records, bounds = {}, {}
    for i, (n, m) in enumerate(shapes):
        A = _test_matrix(cfg, i, n, m)
        s = cfg.s if cfg.s is not None else float(n)
        tail, mn = _tail_stats(cfg, A, (cfg.tag, i), s, eps)
        key = f"tail[{_label(n, m)}]"
        records[key] = tail
        records[f"mn[{_label(n, m)}]"] = mn
        entry: dict[str, Any] = {"epsilon": eps, "s": s}
        if n > m + 3 and eps <= 1 / math.e and a > 0:
            entry["prop31_rhs"] = prop31_rhs(n, m, a, eps)
            entry["prop31_rhs_corrected"] = prop31_rhs(n, m, a, eps, corrected=True)
        bounds[key] = entry
    if cfg.sparse:
        sp = cfg.sparse
        spec = SparseColumnSpec(float(sp["gamma"]), float(sp["theta"]), cfg.entry_bounds())
        sparse_eps = float(sp.get("epsilon", eps))
        c = float(sp.get("constant", 10.0))
        for j, n in enumerate(sp.get("n", [40, 60, 80])):
            A = gen_sparse_column(int(n), spec, _streams.derive_seed(cfg.seed, cfg.tag, 1000 + j))
            tail, _ = _tail_stats(cfg, A, (cfg.tag, 1000 + j), float(A.n), sparse_eps)
            key = f"sparse_tail[{_label(*A.shape)}]"
            records[key] = tail
            bounds[key] = {
                "epsilon": sparse_eps,
                "gamma": spec.gamma,
                "theta": spec.theta,
                "bound": c * sparse_eps * abs(math.log(sparse_eps)),
            }
    return records, bounds


def _flat_distribution(cfg: ScenarioConfig):
    shapes = cfg.shapes([(6, 4)])
    records, bounds = {}, {}
    for i, (n, m) in enumerate(shapes):
        J = gen_flat(n, m)

        def task(lo, hi, J=J, i=i, n=n, m=m):
            est = log_det_batch(J, FieldKind.REAL, cfg.seed, lo, hi, (cfg.tag, i, 1))
            chi = chi2_product_batch(n, m, cfg.seed, lo, hi, (cfg.tag, i, 2))
            shifted = chi2_product_batch(n, m, cfg.seed, lo, hi, (cfg.tag, i, 3), shift=1)
            return est, chi, shifted

        parts = run_blocks(cfg, task)
        est, chi, shifted = (_concat([p[k] for p in parts]) for k in range(3))
        label = _label(n, m)
        records[f"logdet_estimator[{label}]"] = est
        records[f"logdet_chi2[{label}]"] = chi
        records[f"logdet_chi2_shifted[{label}]"] = shifted
        match = stats.ks_2samp(est, chi, method="asymp")
        control = stats.ks_2samp(est, shifted, method="asymp")
        bounds[f"ks[{label}]"] = {
            "statistic": float(match.statistic),
            "pvalue": float(match.pvalue),
            "shifted_statistic": float(control.statistic),
            "shifted_pvalue": float(control.pvalue),
            "log_mean_exact": flat_moments(n, m).log_mean,
        }
    return records, bounds


def _yn_coverage(cfg: ScenarioConfig):
    shapes = cfg.shapes([(6, 4)])
    rho = cfg.rho if cfg.rho is not None else 1.0
    records, bounds = {}, {}
    for i, (n, m) in enumerate(shapes):
        N = cfg.draws_per_estimate or draws_per_estimate(n, rho)
        if N * cfg.trials > cfg.budget:
            raise BudgetError(f"{N} draws x {cfg.trials} replications exceeds budget {cfg.budget}")

        def task(lo, hi, n=n, m=m, N=N, i=i):
            return y_estimates(n, m, N, hi - lo, cfg.seed, (cfg.tag, i), start=lo)

        rel = _concat(run_blocks(cfg, task))
        covered = (np.abs(rel) <= cfg.delta).astype(np.float64)
        label = _label(n, m)
        records[f"rel_error[{label}]"] = rel
        records[f"covered[{label}]"] = covered
        ratio = flat_moments(n, m).variance_ratio
        bounds[f"coverage[{label}]"] = {
            "delta": cfg.delta,
            "draws_per_estimate": N,
            "variance_ratio": ratio,
            "chebyshev_failure_bound": (ratio - 1) / (cfg.delta**2 * N),
            "coverage": binomial(int(covered.sum()), covered.size),
        }
    return records, bounds


def _gamma_constant(cfg: ScenarioConfig):
    shapes = cfg.shapes([(400, 400)])
    expected = {
        FieldKind.REAL: float(special.digamma(0.5) + math.log(2.0)),
        FieldKind.COMPLEX: float(special.digamma(1.0)),
    }
    records, bounds = {}, {}
    for i, (n, _) in enumerate(shapes):
        eye = DenseMatrix(np.eye(n))
        for f_index, fk in enumerate((FieldKind.REAL, FieldKind.COMPLEX)):

            def task(lo, hi, fk=fk, tags=(cfg.tag, i, f_index)):
                return log_det_batch(eye, fk, cfg.seed, lo, hi, tags) / n

            stat = _concat(run_blocks(cfg, task))
            key = f"mean_log[{fk.value}:{n}]"
            records[key] = stat
            bounds[key] = {"expected": expected[fk], "gamma": math.exp(expected[fk])}
    return records, bounds


def _laguerre_density(cfg: ScenarioConfig):
    shapes = cfg.shapes([(50, 50)])
    n = shapes[0][0]

    def task(lo, hi):
        return complex_wishart_eigs(n, cfg.seed, lo, hi, (cfg.tag,))

    eigs = np.concatenate(run_blocks(cfg, task))
    records = {"lambda_min": eigs[:, 0], "trace": eigs.sum(axis=1)}
    grid = np.logspace(-6, 1, 200)
    gaps = {}
    for k in range(2, 31):
        s_form = density_sum_form(k, grid)
        gaps[k] = float(np.max(np.abs(s_form - density_cd_form(k, grid)) / np.maximum(1.0, s_form)))
    scan = {
        str(a): propA1_scan([20, 50, 100], [0.1, 0.05, 0.01, 0.005], a) for a in (0.0, cfg.alpha)
    }
    bounds = {
        "form_gap_max": max(gaps.values()),
        "normalization_error": {str(k): abs(density_normalization(k) - 1.0) for k in (1, 2, 5, 20, 50)},
        "histogram_l1": histogram_l1(eigs, n) if cfg.trials > 0 else None,
        "propA1_scan": scan,
    }
    return records, bounds


def _identities(cfg: ScenarioConfig):
    def task(lo, hi):
        out = {"factorization_gap": [], "quadratic_form_ok": [], "fan_ok": [], "interlacing_ok": []}
        for t in range(lo, hi):
            rng = _streams.generator(cfg.seed, cfg.tag, t)
            V = rng.standard_normal((8, 5))
            out["factorization_gap"].append(max(factorization_identity_gap(V, k) for k in range(5)))
            A = gen_uniform(6, 3, EntryBounds(1.0, 2.0), _streams.derive_seed(cfg.seed, cfg.tag, t, 1))
            qseed = _streams.derive_seed(cfg.seed, cfg.tag, t, 2)
            out["quadratic_form_ok"].append(
                float(all(quadratic_form_bounds_check(A, k, cfg.field, qseed) for k in range(3)))
            )
            dim = int(rng.integers(2, 9))
            G1 = rng.standard_normal((dim, dim + 2))
            G2 = rng.standard_normal((dim, int(rng.integers(1, dim + 3))))
            M1, M2 = G1 @ G1.T, G2 @ G2.T
            out["fan_ok"].append(
                float(all(fan_inequality_check(M1, M2, i, j) for i in range(dim) for j in range(dim - i)))
            )
            B = gen_uniform(7, 4, EntryBounds(1.0, 2.0), _streams.derive_seed(cfg.seed, cfg.tag, t, 3))
            iseed = _streams.derive_seed(cfg.seed, cfg.tag, t, 4)
            out["interlacing_ok"].append(float(all(interlacing_check(B, k, cfg.field, iseed) for k in range(4))))
        return {k: np.asarray(v) for k, v in out.items()}

    parts = run_blocks(cfg, task)
    records = {k: _concat([p[k] for p in parts]) for k in parts[0]}
    bounds = {
        "factorization_gap_max": float(np.max(records["factorization_gap"])),
        "quadratic_form_pass_rate": float(np.mean(records["quadratic_form_ok"])),
        "fan_pass_rate": float(np.mean(records["fan_ok"])),
        "interlacing_pass_rate": float(np.mean(records["interlacing_ok"])),
    }
    return records, bounds


def _check_flat_distribution(cfg):
    if cfg.trials < 1000:
        raise ConfigError("flat_distribution needs at least 1000 trials")


def _check_alpha(cfg):
    if not 0 <= cfg.alpha < 0.5:
        raise ConfigError(f"alpha must lie in [0, 1/2), got {cfg.alpha}")


def _check_epsilon_below_one(cfg):
    if not cfg.epsilon < 1:
        raise ConfigError(f"epsilon must be below 1, got {cfg.epsilon}")


def _check_sparse(cfg):
    if cfg.sparse is None:
        return
    try:
        SparseColumnSpec(float(cfg.sparse["gamma"]), float(cfg.sparse["theta"]), cfg.entry_bounds())
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad sparse block: {exc}") from None
    _check_epsilon_below_one(cfg)


@dataclass(frozen=True)
class ScenarioSpec:
    run: Callable
    required: tuple = ()
    check: Optional[Callable] = None


SCENARIOS: dict[str, ScenarioSpec] = {
    "unbiasedness": ScenarioSpec(_unbiasedness),
    "concentration": ScenarioSpec(_concentration, ("delta",)),
    "upper_tail": ScenarioSpec(_upper_tail, ("delta",)),
    "cutoff_concentration": ScenarioSpec(_cutoff_concentration, ("epsilon",)),
    "tail_statistic": ScenarioSpec(_tail_statistic, ("epsilon",), _check_sparse),
    "flat_distribution": ScenarioSpec(_flat_distribution, (), _check_flat_distribution),
    "yn_coverage": ScenarioSpec(_yn_coverage, ("delta", "rho")),
    "gamma_constant": ScenarioSpec(_gamma_constant),
    "laguerre_density": ScenarioSpec(_laguerre_density, ("alpha",), _check_alpha),
    "identities": ScenarioSpec(_identities),
}


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run a configured scenario; writes files when ``config.output`` is set."""
    config.validate()
    started = time.perf_counter()
    records, bounds = SCENARIOS[config.scenario].run(config)
    aggregates = {k: aggregate(v) for k, v in records.items()}
    result = ScenarioResult(config, records, aggregates, bounds, time.perf_counter() - started)
    if config.output:
        write_results(result, config.output)
    return result


# -- output -----------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def trials_csv(result: ScenarioResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "statistic", "value"])
    for t, stat, v in result.rows():
        w.writerow([t, stat, f"{v:.17g}"])
    return buf.getvalue()


def write_results(result: ScenarioResult, prefix) -> tuple[Path, Path]:
    """Write ``<prefix>.summary.json`` and ``<prefix>.trials.csv``."""
    prefix = str(prefix)
    summary_path = Path(prefix + ".summary.json")
    csv_path = Path(prefix + ".trials.csv")
    summary = {
        "artifact_version": __version__,
        "scenario": result.config.scenario,
        "config": result.config.to_dict(),
        "aggregates": result.aggregates,
        "bounds": result.bounds,
        "duration_seconds": result.duration,
    }
    for path, text in (
        (summary_path, json.dumps(_jsonable(summary), indent=2) + "\n"),
        (csv_path, trials_csv(result)),
    ):
        try:
            if path.parent and not path.parent.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    return summary_path, csv_path


def read_trials_csv(path) -> dict[str, np.ndarray]:
    """Parse a trials CSV back into per-statistic arrays ordered by trial."""
    cols: dict[str, list[tuple[int, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            cols.setdefault(row["statistic"], []).append((int(row["trial"]), float(row["value"])))
    return {k: np.array([v for _, v in sorted(rows)]) for k, rows in cols.items()}


def load_config(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data
