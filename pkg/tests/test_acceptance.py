"""End-to-end acceptance checks, one test per criterion.

Each test records its parts through the ``criterion`` fixture so the terminal
summary prints a PASS/FAIL line per criterion, then asserts.
"""

import itertools
import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy import special

from permcast import _streams
from permcast.estimator import averaged_estimate, log_det_batch
from permcast.exact_perm import perm_flat, perm_naive, perm_rank_one, perm_rect, perm_ryser
from permcast.flat_case import flat_distribution_match, flat_moments, telescoped_ratio_exact, yn_coverage
from permcast.harness import ScenarioConfig, load_config, run_scenario, trials_csv
from permcast.laguerre_density import density_sum_form, integral_A2
from permcast.matrix_core import EntryBounds, gen_flat, gen_rank_one, gen_uniform
from permcast.spectrum import factorization_identity_gap

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EPS_SCAN = [0.1, 0.05, 0.01, 0.005]


def _config(name, **overrides):
    data = load_config(CONFIGS / f"{name}.json")
    data.update(overrides)
    return ScenarioConfig.from_dict(data)


def test_unbiasedness(criterion):
    started = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(20):
        n = int(rng.integers(2, 8))
        m = n if i % 2 == 0 else int(rng.integers(1, n + 1))
        field = "real" if i % 4 < 2 else "complex"
        A = gen_uniform(n, m, EntryBounds(0.5, 2), 1000 + i)
        mean, se = averaged_estimate(A, 100_000, field, 2000 + i)
        worst = max(worst, abs(mean - perm_naive(A).value) / se)
    elapsed = time.perf_counter() - started
    ok = criterion(1, "20 matrices within 4 SE", worst <= 4, f"max |z| = {worst:.2f}")
    ok &= criterion(1, "runtime <= 60 s", elapsed <= 60, f"{elapsed:.1f} s")
    assert ok


def test_oracle_agreement(criterion):
    started = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(1, 9))
        m = n if i % 2 == 0 else int(rng.integers(1, n + 1))
        A = gen_uniform(n, m, EntryBounds(0.1, 3), 3000 + i)
        ref = perm_naive(A).value
        vals = [perm_rect(A).value]
        if n == m:
            vals.append(perm_ryser(A).value)
        worst = max(worst, max(abs(v - ref) / ref for v in vals))
    flat = perm_flat(5, 3).value
    worst_r1 = 0.0
    for i in range(50):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, n + 1))
        u, v = rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, m)
        ref = perm_naive(gen_rank_one(u, v)).value
        worst_r1 = max(worst_r1, abs(perm_rank_one(u, v).value - ref) / ref)
    elapsed = time.perf_counter() - started
    ok = criterion(2, "naive/ryser/rect on 100 instances", worst <= 1e-10, f"max rel err {worst:.2e}")
    ok &= criterion(2, "perm_flat(5,3) = 60", flat == 60, f"{flat!r}")
    ok &= criterion(2, "rank-one vs naive on 50 instances", worst_r1 <= 1e-10, f"max rel err {worst_r1:.2e}")
    ok &= criterion(2, "runtime <= 10 s", elapsed <= 10, f"{elapsed:.1f} s")
    assert ok


def test_flat_distribution(criterion):
    started = time.perf_counter()
    match = flat_distribution_match(6, 4, 10_000, 303)
    control = flat_distribution_match(6, 4, 10_000, 303, shift=1)
    elapsed = time.perf_counter() - started
    ok = criterion(3, "KS p-value > 0.01", match.pvalue > 0.01, f"p = {match.pvalue:.3f}")
    ok &= criterion(3, "shifted control p < 0.001", control.pvalue < 0.001, f"p = {control.pvalue:.2e}")
    ok &= criterion(3, "runtime <= 30 s", elapsed <= 30, f"{elapsed:.1f} s")
    assert ok


def test_flat_moments(criterion):
    worst = 0.0
    exact_values = True
    for n in range(1, 501):
        for m in range(1, n + 1):
            fm = flat_moments(n, m)
            pf = perm_flat(n, m)
            worst = max(worst, abs(fm.log_mean - pf.log_value) / max(1.0, abs(pf.log_value)))
            if n <= 30 and math.exp(fm.log_mean) != pytest.approx(pf.value, rel=1e-12):
                exact_values = False
    ok = criterion(4, "flat_moments vs perm_flat, n <= 500", worst <= 1e-12 and exact_values, f"max rel err {worst:.1e}")

    zs = []
    for i, (n, m) in enumerate([(4, 2), (6, 4), (8, 8)]):
        logs = log_det_batch(gen_flat(n, m), "real", 404, 0, 100_000, (i,))
        sq = np.exp(2 * logs)
        target = math.prod(k * k + 2 * k for k in range(n - m + 1, n + 1))
        se = sq.std(ddof=1) / math.sqrt(sq.size)
        zs.append((n, m, (sq.mean() - target) / se))
    ok &= criterion(
        4,
        "second moment within 4 SE",
        all(abs(z) <= 4 for *_, z in zs),
        ", ".join(f"({n},{m}) z={z:+.2f}" for n, m, z in zs),
    )

    bad = [(n, m) for n in range(1, 101) for m in range(1, n + 1) if len(set(telescoped_ratio_exact(n, m))) != 1]
    direct = all(
        math.prod(Fraction(k * k + 2 * k, k * k) for k in range(n - m + 1, n + 1)) == telescoped_ratio_exact(n, m)[1]
        for n, m in [(2, 2), (6, 4), (100, 37)]
    )
    ok &= criterion(4, "telescoped ratio exact, n <= 100", not bad and direct, f"{len(bad)} mismatches")
    assert ok


def test_yn_coverage(criterion):
    started = time.perf_counter()
    res = yn_coverage(6, 4, 1.0, 0.3, 500, 505, N=2000)
    elapsed = time.perf_counter() - started
    p = res.coverage
    se = math.sqrt(p * (1 - p) / res.replications)
    floor = 1 - res.bound - 3 * se
    ok = criterion(5, "coverage >= 1 - bound - 3 SE", p >= floor, f"coverage {p:.3f}, bound {res.bound:.4f}")
    ok &= criterion(5, "runtime <= 120 s", elapsed <= 120, f"{elapsed:.1f} s")
    assert ok


def test_worst_case_constants(criterion):
    started = time.perf_counter()
    cfg = _config("gamma_constant", seed=606, trials=200, shape=[[400, 400]])
    res = run_scenario(cfg)
    elapsed = time.perf_counter() - started
    real = res.aggregates["mean_log[real:400]"]["mean"]
    cplx = res.aggregates["mean_log[complex:400]"]["mean"]
    r_exp = float(special.digamma(0.5)) + math.log(2)
    c_exp = float(special.digamma(1.0))
    ok = criterion(6, "REAL within 0.05 of psi(1/2)+ln 2", abs(real - r_exp) <= 0.05, f"{real:.4f} vs {r_exp:.4f}")
    ok &= criterion(6, "COMPLEX within 0.05 of psi(1)", abs(cplx - c_exp) <= 0.05, f"{cplx:.4f} vs {c_exp:.4f}")
    ok &= criterion(6, "runtime <= 30 s", elapsed <= 30, f"{elapsed:.1f} s")
    assert ok


def test_concentration(criterion):
    started = time.perf_counter()
    res = run_scenario(_config("concentration", seed=707))
    elapsed = time.perf_counter() - started
    ok = True
    for kind in ("rank_one", "flat"):
        ex = [res.bounds[f"dev[{kind}:{n}x{n}]"]["exceed"] for n in (50, 100, 200)]
        mono = all(b["p"] <= a["p"] + 2 * math.hypot(a["se"], b["se"]) for a, b in zip(ex, ex[1:]))
        detail = ", ".join(f"n={n}: {e['p']:.3f}" for n, e in zip((50, 100, 200), ex))
        ok &= criterion(7, f"{kind}: nonincreasing in n", mono, detail)
        ok &= criterion(7, f"{kind}: <= 0.05 at n = 200", ex[-1]["p"] <= 0.05, f"{ex[-1]['p']:.3f}")
    ok &= criterion(7, "runtime <= 10 min", elapsed <= 600, f"{elapsed:.1f} s")
    assert ok


def test_upper_tail(criterion):
    res = run_scenario(_config("upper_tail", seed=808))
    b = res.bounds["excess[100x100]"]
    ex = b["exceed"]
    ok = criterion(
        8,
        "frequency <= exp(-2 delta n) + 3 SE",
        ex["p"] <= b["bound"] + 3 * ex["se"],
        f"{ex['hits']}/{ex['trials']} exceedances, bound {b['bound']:.2e}",
    )
    assert ok


def test_tail_statistic_bound(criterion):
    res = run_scenario(_config("tail_statistic", seed=909))
    ok = True
    for n, m in ((12, 6), (20, 10)):
        key = f"tail[{n}x{m}]"
        agg, b = res.aggregates[key], res.bounds[key]
        se = agg["se"] or 0.0
        ok &= criterion(
            9,
            f"({n},{m}) mean <= prop31_rhs + 3 SE",
            agg["mean"] <= b["prop31_rhs"] + 3 * se,
            f"mean {agg['mean']:.2e}, rhs {b['prop31_rhs']:.4f}, corrected rhs {b['prop31_rhs_corrected']:.4f}",
        )
        ok &= criterion(9, f"({n},{m}) corrected variant reported", "prop31_rhs_corrected" in b, "n-m-1 denominator")

    for sparse_eps in (0.01, 0.05):
        sp = _config("tail_statistic", seed=909).sparse
        sp = dict(sp, epsilon=sparse_eps)
        r = run_scenario(_config("tail_statistic", seed=910, sparse=sp, shape=[[12, 6]], trials=1000))
        keys = [k for k in r.records if k.startswith("sparse_tail")]
        means = [r.aggregates[k]["mean"] for k in keys]
        ses = [r.aggregates[k]["se"] or 0.0 for k in keys]
        bound = r.bounds[keys[0]]["bound"]
        below = all(mu <= bound for mu in means)
        spread = max(means) - min(means)
        stable = all(
            abs(means[i] - means[j]) <= max(3 * math.hypot(ses[i], ses[j]), 0.1 * bound)
            for i, j in itertools.combinations(range(len(keys)), 2)
        )
        detail = ", ".join(f"{k[12:-1]}: {mu:.2e}" for k, mu in zip(keys, means))
        ok &= criterion(9, f"sparse eps={sparse_eps}: mean <= 10 eps|ln eps|", below, f"{detail}; bound {bound:.3f}")
        ok &= criterion(9, f"sparse eps={sparse_eps}: stable across n", stable, f"spread {spread:.2e}")
    assert ok


def test_linear_algebra_identities(criterion):
    V = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    fixture_gap = factorization_identity_gap(V, 1)
    res = run_scenario(_config("identities", seed=1010, trials=500))
    rec = res.records
    fac = float(np.max(rec["factorization_gap"][:100]))
    ok = criterion(10, "factorization gap < 1e-10", fac < 1e-10 and fixture_gap < 1e-10,
                   f"random max {fac:.1e}, fixture {fixture_gap:.1e}")
    ok &= criterion(10, "quadratic-form sandwich, 100 instances", bool(np.all(rec["quadratic_form_ok"][:100] == 1)),
                    f"pass rate {np.mean(rec['quadratic_form_ok'][:100]):.2f}")
    ok &= criterion(10, "Fan inequality, 500 PSD pairs", bool(np.all(rec["fan_ok"] == 1)),
                    f"pass rate {np.mean(rec['fan_ok']):.3f}")
    ok &= criterion(10, "interlacing, 100 draws of (7,4)", bool(np.all(rec["interlacing_ok"][:100] == 1)),
                    f"pass rate {np.mean(rec['interlacing_ok'][:100]):.2f}")
    assert ok


def test_laguerre_density(criterion):
    res = run_scenario(_config("laguerre_density", seed=1111))
    b = res.bounds
    ok = criterion(11, "sum form = CD form to 1e-8, n <= 30", b["form_gap_max"] <= 1e-8, f"max gap {b['form_gap_max']:.1e}")
    norm = max(b["normalization_error"].values())
    ok &= criterion(11, "normalization within 1e-6", norm <= 1e-6, f"max error {norm:.1e}")
    grid = np.logspace(-6, 1, 200)
    p1 = float(np.max(np.abs(density_sum_form(1, grid) - np.exp(-grid))))
    ok &= criterion(11, "p_1(x) = exp(-x) to 1e-12", p1 <= 1e-12, f"max error {p1:.1e}")
    ok &= criterion(11, "histogram L1 <= 0.05", b["histogram_l1"] <= 0.05, f"L1 = {b['histogram_l1']:.4f}")
    assert ok


def test_small_eigenvalue_integral_scan(criterion):
    started = time.perf_counter()
    ok = True
    for alpha in (0.25, 0.4):
        vals = [integral_A2(100, e, alpha) for e in EPS_SCAN]
        ratios = [v / e ** (0.5 - alpha) for v, e in zip(vals, EPS_SCAN)]
        decreasing = all(a > b for a, b in zip(vals, vals[1:]))
        spread = max(ratios) / min(ratios)
        ok &= criterion(12, f"alpha={alpha}: strictly decreasing", decreasing, " ".join(f"{v:.4f}" for v in vals))
        ok &= criterion(12, f"alpha={alpha}: ratio within factor 3", spread <= 3, f"max/min {spread:.2f}")
    vals = [integral_A2(100, e, 0.6) for e in EPS_SCAN]
    ratios = [v / e ** (0.5 - 0.6) for v, e in zip(vals, EPS_SCAN)]
    growth = ratios[-1] / ratios[0]
    elapsed = time.perf_counter() - started
    ok &= criterion(
        12,
        "alpha=0.6: ratio grows by more than 3x as eps decreases",
        growth > 3,
        "ratios " + " ".join(f"{r:.2f}" for r in ratios) + f"; growth {growth:.2f}",
    )
    ok &= criterion(12, "runtime <= 60 s", elapsed <= 60, f"{elapsed:.1f} s")
    assert ok


def test_reproducibility(criterion):
    ok = True
    for path in sorted(CONFIGS.glob("*.json")):
        name = path.stem
        outputs = []
        for concurrency in (1, 8):
            cfg = _config(name, concurrency=concurrency)
            outputs.append(trials_csv(run_scenario(cfg)).encode())
        again = trials_csv(run_scenario(_config(name, concurrency=8))).encode()
        same = outputs[0] == outputs[1] == again
        ok &= criterion(13, name, same, f"{len(outputs[0])} bytes")
    assert ok
