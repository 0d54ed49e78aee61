#!/usr/bin/env python3
"""Side-by-side benchmark: numba-jitted kernels vs the pure-numpy path.

Runs each hot solver on a batch of seeded random instances with both
backends, checks that the returned optima agree, and prints timing and
speedup.  JIT compilation is triggered once before timing.

The numpy path is what you get with ALPHALEAK_NO_NUMBA=1; this script
imports both implementations directly so a single run compares them.
"""

import time

import numpy as np

from alphaleak import _kernels as K

N_SOLVES = 300
TOL = 1e-10
MAX_ITERS = 100_000
STEP = 0.5


def _instances(seed=0, n=N_SOLVES, nx=3, ny=3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = 0.9 * rng.dirichlet(np.ones(nx)) + 0.1 / nx
        W = 0.9 * rng.dirichlet(np.ones(ny), size=nx) + 0.1 / ny
        W /= W.sum(axis=1, keepdims=True)
        R0 = np.ascontiguousarray(rng.dirichlet(np.ones(nx), size=ny))
        out.append((p / p.sum(), W, R0))
    return out


def bench(name, fn_py, fn_nb, runner):
    # agreement check + timing
    if fn_nb is not None:
        runner(fn_nb, limit=2)  # compile
    t0 = time.perf_counter()
    vals_py = runner(fn_py)
    t_py = time.perf_counter() - t0
    if fn_nb is None:
        print(f"{name:>18}  {t_py:9.3f}s  {'n/a':>9}  {'n/a':>8}  (numba unavailable)")
        return
    t0 = time.perf_counter()
    vals_nb = runner(fn_nb)
    t_nb = time.perf_counter() - t0
    agree = np.allclose(vals_py, vals_nb, rtol=1e-6, atol=1e-9)
    print(f"{name:>18}  {t_py:9.3f}s  {t_nb:8.3f}s  {t_py / t_nb:7.1f}x  "
          f"{'ok' if agree else 'DISAGREE'}")


def main():
    insts = _instances()
    alpha = 2.0
    beta = 1.0 - 1.0 / alpha
    qt = alpha / (2.0 * alpha - 1.0)

    print(f"kernel backend available: {K.BACKEND}")
    print(f"{'kernel':>18}  {'numpy':>10}  {'numba':>9}  {'speedup':>8}  agree")

    def run_tsallis(fn, limit=None):
        vals = []
        for p, W, R0 in insts[:limit]:
            w = p * W[:, 0]
            _, v, _, _ = fn(w, beta, False, R0[0], True, TOL, MAX_ITERS, STEP)
            vals.append(v)
        return vals

    def run_power(fn, limit=None):
        vals = []
        for p, W, R0 in insts[:limit]:
            _, v, _, _ = fn(p, alpha, R0[0], True, TOL, MAX_ITERS, STEP)
            vals.append(v)
        return vals

    def run_ac(fn, limit=None):
        vals = []
        for p, W, R0 in insts[:limit]:
            _, v, _, _ = fn(p, W, beta, R0, True, TOL, MAX_ITERS, STEP)
            vals.append(v)
        return vals

    def run_lp(fn, limit=None):
        vals = []
        for p, W, R0 in insts[:limit]:
            _, v, _, _ = fn(p, W, beta, qt, R0, True, TOL, MAX_ITERS, STEP)
            vals.append(v)
        return vals

    def run_augustin(fn, limit=None):
        vals = []
        for p, W, _ in insts[:limit]:
            q0 = p @ W
            q, _, _, _ = fn(p, W ** alpha, alpha, q0, TOL, MAX_ITERS, 0.5)
            vals.append(q[0])
        return vals

    def run_alternating(fn, limit=None):
        vals = []
        for p, W, _ in insts[:limit]:
            joint = p[:, None] * W
            qx, qy, v, _, _, _ = fn(joint ** alpha, alpha, joint.sum(1), joint.sum(0),
                                    TOL, MAX_ITERS)
            vals.append(v)
        return vals

    nb = K.HAVE_NUMBA
    bench("tsallis_eg", K.tsallis_eg_py, K.tsallis_eg_nb if nb else None, run_tsallis)
    bench("power_eg", K.power_eg_py, K.power_eg_nb if nb else None, run_power)
    bench("ac_eg", K.ac_eg_py, K.ac_eg_nb if nb else None, run_ac)
    bench("lp_eg", K.lp_eg_py, K.lp_eg_nb if nb else None, run_lp)
    bench("augustin_solve", K.augustin_solve_py,
          K.augustin_solve_nb if nb else None, run_augustin)
    bench("lp_alternating", K.lp_alternating_solve_py,
          K.lp_alternating_solve_nb if nb else None, run_alternating)


if __name__ == "__main__":
    main()
