"""Acceptance suite: one test per criterion, each printing a pass/fail
line with the measured worst case and its tolerance.

Instances are seeded and shared across criteria where the criteria ask
for "the same instance set".  Tolerances are pinned here, not
configurable.
"""

import math
import time

import numpy as np

from alphaleak import (
    alpha_mi,
    alpha_mi_via_leakage,
    arrow_pratt,
    cond_renyi_entropy,
    cond_vulnerability,
    g_leakage,
    gibbs_optimum,
    leakage_spec_for,
    make_pmf,
    power_loss,
    prior_vulnerability,
    q_log,
    q_log_aggregator,
    renyi_entropy,
    reverse_holder_check,
    shannon_measures,
    simplex_grid,
    soft01_gain,
    tilt,
)
from alphaleak.cli import emit_plot_gain, main
from alphaleak.leakage import _cond_ac, _cond_lp
from alphaleak.optimize import OptimizerConfig
from alphaleak.renyi import MiVariant, shannon_entropy
from conftest import random_pair

SEED = 20240
ALPHAS = (0.3, 0.6, 2.0, 4.0)
N_IDENTITY = 100
N_DIFF = 200
CFG = OptimizerConfig(seed=SEED)
DIFF_CFG = OptimizerConfig(seed=SEED, restarts=2)  # convex objectives

_instances_cache = {}


def instances(n):
    if n not in _instances_cache:
        rng = np.random.default_rng(SEED)
        _instances_cache[n] = [
            random_pair(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
            for _ in range(n)
        ]
    return _instances_cache[n]


def report(name, passed, detail):
    print(f"ACCEPT {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"{name}: {detail}"


def test_criterion_01_generalized_gibbs():
    """Grid search never beats the closed form; argmax near the tilt."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    grid = simplex_grid(3, 5e-3)
    worst_excess = 0.0
    worst_l1 = 0.0
    worst_gap_frac = 0.0
    for _ in range(100):
        p = make_pmf(0.9 * rng.dirichlet(np.ones(3)) + 0.1 / 3, renormalize=True)
        for q in (0.25, 0.5, 2.0, 4.0):
            opt = gibbs_optimum(p, q)
            with np.errstate(divide="ignore"):
                vals = q_log(grid, q) @ p.probs
            finite = vals[np.isfinite(vals)]
            idx = int(np.argmax(vals))
            worst_excess = max(worst_excess, float(vals[idx]) - opt.value)
            worst_l1 = max(worst_l1, float(np.abs(grid[idx] - opt.argmax.probs).sum()))
            obj_range = float(finite.max() - finite.min())
            worst_gap_frac = max(
                worst_gap_frac, (opt.value - float(vals[idx])) / max(obj_range, 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst_excess <= 1e-9 and worst_l1 <= 2e-2 and worst_gap_frac <= 5e-3 \
        and elapsed < 30.0
    report("criterion-01-generalized-gibbs", ok,
           f"excess={worst_excess:.2e}<=1e-9, L1={worst_l1:.3f}<=0.02, "
           f"gap={worst_gap_frac:.2e}<=5e-3 of range, {elapsed:.1f}s<30s")


def test_criterion_02_vulnerability_entropy_identities():
    """Vulnerability side vs exp(+-entropy) side, per-path tolerances."""
    t0 = time.perf_counter()
    worst_closed = 0.0
    worst_opt = 0.0
    for p, W in instances(N_IDENTITY):
        sm = shannon_measures(p, W)
        g01 = soft01_gain()
        log_agg = q_log_aggregator(1.0)
        rel = lambda lhs, rhs: abs(lhs - rhs) / max(1.0, abs(rhs))
        worst_closed = max(worst_closed, rel(
            prior_vulnerability(p, g01, log_agg).value, math.exp(-sm.entropy)))
        worst_closed = max(worst_closed, rel(
            cond_vulnerability(p, W, g01, log_agg, log_agg).value,
            math.exp(-sm.conditional_entropy)))
        for alpha in ALPHAS:
            agg = q_log_aggregator(1.0 / alpha)
            worst_closed = max(worst_closed, rel(
                prior_vulnerability(p, g01, agg).value,
                math.exp(-renyi_entropy(p, alpha))))
            worst_closed = max(worst_closed, rel(
                cond_vulnerability(p, W, g01, agg, agg).value,
                math.exp(-cond_renyi_entropy("arimoto", p, W, alpha))))
            pt = tilt(p, 1.0 / alpha)
            worst_closed = max(worst_closed, rel(
                cond_vulnerability(pt, W, g01, agg, agg).value,
                math.exp(-cond_renyi_entropy("sibson", p, W, alpha))))
            hagg = q_log_aggregator(alpha)
            worst_closed = max(worst_closed, rel(
                prior_vulnerability(p, power_loss(alpha), hagg, sense="loss").value,
                math.exp(renyi_entropy(p, alpha))))
            worst_closed = max(worst_closed, rel(
                cond_vulnerability(p, W, power_loss(alpha), hagg, hagg,
                                   sense="loss").value,
                math.exp(cond_renyi_entropy("hayashi", p, W, alpha))))
            # coupled tuples: optimizer path
            spec = leakage_spec_for("augustin_csiszar", p, alpha)
            worst_opt = max(worst_opt, rel(
                cond_vulnerability(p, W, spec.gain, spec.phi, spec.psi,
                                   method="optimize", cfg=CFG).value,
                math.exp(-cond_renyi_entropy("augustin_csiszar", p, W, alpha, cfg=CFG))))
            if alpha > 0.5:
                lspec = leakage_spec_for("lapidoth_pfister", p, alpha)
                worst_opt = max(worst_opt, rel(
                    cond_vulnerability(lspec.prior, W, lspec.gain, lspec.phi,
                                       lspec.psi, method="optimize", cfg=CFG).value,
                    math.exp(-cond_renyi_entropy("lapidoth_pfister", p, W, alpha,
                                                 cfg=CFG))))
    # oracle leg on a small 2x2 subsample, documented bound = n_x * resolution
    ocfg = OptimizerConfig(seed=SEED, grid_resolution=0.02)
    worst_oracle = 0.0
    rng = np.random.default_rng(SEED + 1)
    for _ in range(5):
        p, W = random_pair(rng, 2, 2)
        for alpha in (0.6, 2.0):
            v, _, _, _ = _cond_ac(p, W, alpha, "oracle", ocfg)
            h = cond_renyi_entropy("augustin_csiszar", p, W, alpha, cfg=CFG)
            worst_oracle = max(worst_oracle, abs(-math.log(v) - h))
            pt = tilt(p, alpha / (2 * alpha - 1))
            v, _, _, _ = _cond_lp(pt, W, alpha, "oracle", ocfg)
            h = cond_renyi_entropy("lapidoth_pfister", p, W, alpha, cfg=CFG)
            worst_oracle = max(worst_oracle, abs(-math.log(v) - h))
    oracle_bound = 2 * ocfg.grid_resolution
    elapsed = time.perf_counter() - t0
    ok = worst_closed <= 1e-6 and worst_opt <= 1e-3 \
        and worst_oracle <= oracle_bound and elapsed < 300.0
    report("criterion-02-vulnerability-entropy", ok,
           f"closed={worst_closed:.2e}<=1e-6, optimizer={worst_opt:.2e}<=1e-3, "
           f"oracle={worst_oracle:.2e}<={oracle_bound}, {elapsed:.1f}s<300s")


def test_criterion_03_leakage_representations():
    """Leakage representation equals the direct measure, all variants."""
    t0 = time.perf_counter()
    worst_closed = 0.0
    worst_opt = 0.0
    for p, W in instances(N_IDENTITY):
        for alpha in ALPHAS:
            for variant in MiVariant:
                if variant is MiVariant.LAPIDOTH_PFISTER and alpha <= 0.5:
                    continue
                coupled = variant in (MiVariant.AUGUSTIN_CSISZAR,
                                      MiVariant.LAPIDOTH_PFISTER)
                lhs = alpha_mi_via_leakage(
                    variant, p, W, alpha,
                    method="optimize" if coupled else "auto", cfg=CFG)
                rhs = alpha_mi(variant, p, W, alpha, cfg=CFG)
                err = abs(lhs - rhs) / max(1.0, abs(rhs))
                if coupled:
                    worst_opt = max(worst_opt, err)
                else:
                    worst_closed = max(worst_closed, err)
    elapsed = time.perf_counter() - t0
    ok = worst_closed <= 1e-6 and worst_opt <= 1e-3
    report("criterion-03-leakage-representations", ok,
           f"closed={worst_closed:.2e}<=1e-6, optimizer={worst_opt:.2e}<=1e-3, "
           f"{elapsed:.1f}s")


def test_criterion_04_difference_identities():
    """Closed-form measure vs independently optimized conditional entropy."""
    t0 = time.perf_counter()
    worst = 0.0
    for p, W in instances(N_DIFF):
        for alpha in ALPHAS:
            pairs = [("sibson", renyi_entropy(p, 1.0 / alpha)),
                     ("augustin_csiszar", shannon_entropy(p))]
            if alpha > 0.5:
                pairs.append(
                    ("lapidoth_pfister", renyi_entropy(p, alpha / (2 * alpha - 1))))
            for variant, head in pairs:
                closed = alpha_mi(variant, p, W, alpha, cfg=DIFF_CFG)
                viarule = head - cond_renyi_entropy(variant, p, W, alpha,
                                                    method="optimize", cfg=DIFF_CFG)
                worst = max(worst, abs(closed - viarule))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4
    report("criterion-04-difference-identities", ok,
           f"worst={worst:.2e}<=1e-4 on {N_DIFF} instances, {elapsed:.1f}s")


def test_criterion_05_power_score():
    """Grid extremum of the expected power score is the alpha-norm power."""
    rng = np.random.default_rng(SEED + 5)
    grid = simplex_grid(3, 5e-3)
    bound = 3 * 5e-3
    worst = 0.0
    for _ in range(50):
        p = make_pmf(0.9 * rng.dirichlet(np.ones(3)) + 0.1 / 3, renormalize=True)
        for alpha in (0.5, 2.0):
            base = np.maximum(grid, 1e-30) if alpha < 1.0 else grid
            vals = alpha * (base ** (alpha - 1.0) @ p.probs) \
                + (1.0 - alpha) * (base ** alpha).sum(axis=1)
            extremum = float(vals.max() if alpha > 1.0 else vals.min())
            worst = max(worst, abs(extremum - float((p.probs ** alpha).sum())))
    ok = worst <= bound
    report("criterion-05-power-score", ok, f"worst={worst:.2e}<={bound} (3 x resolution)")


def test_criterion_06_reverse_holder():
    """Direction on 1000 draws; constructed equality case within 1e-9."""
    rng = np.random.default_rng(SEED + 6)
    violations = 0
    worst_eq = 0.0
    for _ in range(1000):
        a = rng.uniform(0.0, 3.0, size=5)
        b = rng.uniform(0.0, 3.0, size=5)
        for order in (0.5, 2.0):
            if not reverse_holder_check(a, b, order).satisfied:
                violations += 1
        for order in (0.5, 2.0):
            bb = rng.uniform(0.1, 2.0, size=5)
            c = float(rng.uniform(0.5, 2.0))
            a_eq = c * bb ** (order / (1.0 - order))
            worst_eq = max(worst_eq, reverse_holder_check(a_eq, bb, order).equality_within)
    ok = violations == 0 and worst_eq <= 1e-9
    report("criterion-06-reverse-holder", ok,
           f"violations={violations}, equality gap={worst_eq:.2e}<=1e-9")


def test_criterion_07_continuity_at_order_one():
    """Every variant near order one is close to the order-1 measure."""
    rng = np.random.default_rng(SEED + 7)
    worst = 0.0
    for _ in range(50):
        p, W = random_pair(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        base = shannon_measures(p, W).mutual_information
        for variant in MiVariant:
            if variant is MiVariant.SHANNON:
                continue
            for alpha in (1 - 1e-3, 1 + 1e-3):
                worst = max(worst, abs(alpha_mi(variant, p, W, alpha, cfg=CFG) - base))
    ok = worst <= 1e-2
    report("criterion-07-continuity", ok, f"worst={worst:.2e}<=1e-2 on 50 instances")


def test_criterion_08_risk_aversion():
    """Finite differences match 1/(alpha r); strictly decreasing in alpha."""
    worst = 0.0
    rs = np.linspace(0.05, 1.0, 20)
    alphas = (0.5, 1.0, 2.0, 5.0)
    for alpha in alphas:
        for r in rs:
            worst = max(worst, abs(arrow_pratt(alpha, float(r), "finite_diff")
                                   - 1.0 / (alpha * r)))
    decreasing = all(
        arrow_pratt(alphas[i], float(r)) > arrow_pratt(alphas[i + 1], float(r))
        for r in rs for i in range(len(alphas) - 1)
    )
    ok = worst <= 1e-4 and decreasing
    report("criterion-08-risk-aversion", ok,
           f"fd-vs-closed worst={worst:.2e}<=1e-4, strictly decreasing={decreasing}")


def test_criterion_09_gain_curves():
    """Curve columns ordered in alpha below r=1; zero at r=1; large-order
    proxy within 1e-5 of r-1."""
    rows = emit_plot_gain([0.5, 1.0, 2.0, 5.0, 1e6], grid=100)
    cols = [k for k in rows[0] if k.startswith("g[")]
    ordered = all(
        row[cols[i]] <= row[cols[i + 1]] + 1e-12
        for row in rows[:-1] for i in range(len(cols) - 1)
    )
    at_one = all(abs(rows[-1][c]) < 1e-12 for c in cols)
    proxy = max(abs(row["g[alpha=1e+06]"] - (row["r"] - 1.0)) for row in rows)
    ok = ordered and at_one and proxy <= 1e-5
    report("criterion-09-gain-curves", ok,
           f"ordered={ordered}, zero-at-one={at_one}, proxy err={proxy:.2e}<=1e-5")


def test_criterion_10_structural(tmp_path):
    """Product bound, nonnegative leakage, and a clean verify run."""
    worst_gap = 0.0
    worst_leak = 0.0
    for p, W in instances(N_IDENTITY)[:50]:
        for alpha in ALPHAS:
            if alpha > 0.5:
                lp = alpha_mi("lapidoth_pfister", p, W, alpha, cfg=CFG)
                sib = alpha_mi("sibson", p, W, alpha, cfg=CFG)
                worst_gap = max(worst_gap, lp - sib)
            for variant in ("shannon", "arimoto", "sibson"):
                leak = g_leakage(leakage_spec_for(variant, p, alpha), W, cfg=CFG)
                worst_leak = min(worst_leak, leak)
    t0 = time.perf_counter()
    out = tmp_path / "verify.json"
    code = main(["verify", "--trials", "50", "--seed", "7", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    ok = worst_gap <= 1e-8 and worst_leak >= -1e-9 and code == 0 and elapsed < 600.0
    report("criterion-10-structural", ok,
           f"lp-sibson gap={worst_gap:.2e}<=1e-8, min leakage={worst_leak:.2e}>=-1e-9, "
           f"verify exit={code} in {elapsed:.1f}s<600s")
