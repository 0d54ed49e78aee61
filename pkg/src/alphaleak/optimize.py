"""Simplex optimization engines.

Four engines, in increasing order of specialization:

* ``simplex_grid`` + the ``oracle_*`` scanners: exhaustive, used as
  brute-force oracles for everything else;
* ``eg_optimize``: generic exponentiated-gradient (multiplicative
  weights with backtracking line search) over a product of simplices,
  gradient supplied or estimated by central differences in log space;
* ``augustin_fixed_point``: the fixed-point iteration for the
  minimizing output distribution of the expected-divergence objective,
  damped for orders above one, with an EG fallback when it plateaus
  (convergence of the undamped iteration is not guaranteed there, the
  fallback is the guarantee);
* ``lp_alternating``: exact alternating coordinate minimization over
  product distributions, output side first, value nonincreasing.

Identical config (including seed) gives bit-identical results; restart
initializations are drawn from a generator seeded per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidOrder,
    OracleTooLarge,
    ValidationError,
)
from .simplex import Channel, JointDist, Pmf, make_pmf

GRID_POINT_BUDGET = 10_000_000
ORACLE_MAX_ALPHABET = 4
_EVAL_FLOOR = 1e-30  # boundary grid points under negative powers stay finite


@dataclass(frozen=True)
class OptimizerConfig:
    tolerance: float = 1e-10
    max_iters: int = 100_000
    restarts: int = 10
    seed: int = 0
    grid_resolution: float = 5e-3
    step_init: float = 0.5

    def __post_init__(self):
        if not (self.tolerance > 0.0):
            raise ValidationError("tolerance must be positive")
        if not (0.0 < self.grid_resolution <= 0.5):
            raise ValidationError("grid resolution must lie in (0, 0.5]")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.restarts < 1:
            raise ValidationError("restarts must be at least 1")

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = OptimizerConfig()


# ----------------------------------------------------------------------
# grid oracle
# ----------------------------------------------------------------------

@lru_cache(maxsize=32)
def _compositions(n: int, k: int) -> np.ndarray:
    """All length-n nonnegative integer vectors summing to k, lex order."""
    if n == 1:
        out = np.array([[k]], dtype=np.int64)
    else:
        blocks = []
        for first in range(k + 1):
            rest = _compositions(n - 1, k - first)
            head = np.full((rest.shape[0], 1), first, dtype=np.int64)
            blocks.append(np.hstack([head, rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def simplex_grid(n: int, resolution: float) -> np.ndarray:
    """All grid points of the (n-1)-simplex at the given resolution.

    Rows are probability vectors (compositions of 1/resolution scaled
    back), emitted once each in deterministic lexicographic order.
    """
    if n < 2:
        raise ValidationError("simplex grid needs at least two symbols")
    k = int(round(1.0 / resolution))
    if abs(k * resolution - 1.0) > 1e-12:
        raise ValidationError(f"resolution {resolution!r} does not divide 1")
    count = math.comb(k + n - 1, n - 1)
    if count > GRID_POINT_BUDGET:
        raise OracleTooLarge(f"{count} grid points exceed budget {GRID_POINT_BUDGET}")
    return _compositions(n, k).astype(np.float64) / k


def _check_oracle_alphabet(*sizes: int):
    for s in sizes:
        if s > ORACLE_MAX_ALPHABET:
            raise OracleTooLarge(
                f"oracle method is restricted to alphabets of size <= {ORACLE_MAX_ALPHABET}"
            )


def oracle_scan(values: np.ndarray, maximize: bool) -> tuple[int, float]:
    """Best index and value; ties break to the lowest index."""
    idx = int(np.argmax(values)) if maximize else int(np.argmin(values))
    return idx, float(values[idx])


def oracle_optimize_single(objective, n: int, maximize: bool,
                           cfg: OptimizerConfig = DEFAULT_CONFIG,
                           batch_objective=None) -> tuple[np.ndarray, float]:
    """Exhaustive scan of one simplex.  ``batch_objective(grid)->values``
    may replace the per-point loop."""
    _check_oracle_alphabet(n)
    grid = simplex_grid(n, cfg.grid_resolution)
    if batch_objective is not None:
        vals = np.asarray(batch_objective(grid), dtype=np.float64)
    else:
        vals = np.array([objective(row) for row in grid], dtype=np.float64)
    idx, val = oracle_scan(vals, maximize)
    return grid[idx].copy(), val


def oracle_optimize_rule(objective, n_x: int, n_y: int, maximize: bool,
                         cfg: OptimizerConfig = DEFAULT_CONFIG,
                         batch_objective=None,
                         chunk: int = 4096) -> tuple[np.ndarray, float]:
    """Exhaustive scan over the product of n_y simplices of size n_x.

    ``objective`` takes a rule matrix of shape (n_y, n_x);
    ``batch_objective`` takes a stack of shape (b, n_y, n_x).
    """
    _check_oracle_alphabet(n_x, n_y)
    grid = simplex_grid(n_x, cfg.grid_resolution)
    m = grid.shape[0]
    total = m ** n_y
    if total > GRID_POINT_BUDGET:
        raise OracleTooLarge(
            f"{total} rule combinations exceed budget {GRID_POINT_BUDGET}; "
            "use a coarser grid resolution"
        )
    best_val = -np.inf if maximize else np.inf
    best_combo = 0
    powers = m ** np.arange(n_y - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        combos = (flat[:, None] // powers[None, :]) % m  # lex order over index tuples
        stack = grid[combos]  # (b, n_y, n_x)
        if batch_objective is not None:
            vals = np.asarray(batch_objective(stack), dtype=np.float64)
        else:
            vals = np.array([objective(R) for R in stack], dtype=np.float64)
        idx, val = oracle_scan(vals, maximize)
        if (maximize and val > best_val) or (not maximize and val < best_val):
            best_val = val
            best_combo = start + idx
    combo = (best_combo // powers) % m
    return grid[combo].copy(), float(best_val)


# ----------------------------------------------------------------------
# generic exponentiated gradient
# ----------------------------------------------------------------------

@dataclass
class EgResult:
    point: list[np.ndarray]
    value: float
    residual: float
    iterations: int
    converged: bool


def _fd_grad(objective, blocks: list[np.ndarray], delta: float = 1e-6) -> list[np.ndarray]:
    """Central differences along multiplicative perturbations (stays positive)."""
    grads = []
    for bi, b in enumerate(blocks):
        g = np.zeros_like(b)
        for i in range(b.size):
            up = [x.copy() for x in blocks]
            dn = [x.copy() for x in blocks]
            up[bi][i] = b[i] * math.exp(delta)
            dn[bi][i] = b[i] * math.exp(-delta)
            g[i] = (objective(up) - objective(dn)) / (b[i] * (math.exp(delta) - math.exp(-delta)))
        grads.append(g)
    return grads


def _eg_run(objective, grad_fn, blocks, maximize, tol, max_iters, step_init):
    sign = 1.0 if maximize else -1.0
    blocks = [np.maximum(b, _kernels.EPS) for b in blocks]
    blocks = [b / b.sum() for b in blocks]
    f = objective(blocks)
    step = step_init
    resid = 1.0
    hits = 0
    it = 0
    for it in range(1, max_iters + 1):
        grads = grad_fn(blocks) if grad_fn is not None else _fd_grad(objective, blocks)
        shifted = [sign * g - (sign * g).max() for g in grads]
        s = step
        accepted = False
        fc = f
        cand = blocks
        for _ in range(80):
            cand = []
            for b, g in zip(blocks, shifted):
                nb = np.maximum(b * np.exp(s * g), _kernels.EPS)
                cand.append(nb / nb.sum())
            fc = objective(cand)
            if sign * (fc - f) >= 0.0:
                accepted = True
                break
            s *= 0.5
            if s < 1e-18:
                break
        if not accepted:
            resid = 0.0
            break
        rel = abs(fc - f) / max(1.0, abs(fc))
        blocks, f = cand, fc
        step = min(s * 2.0, 1e3)
        resid = rel
        if rel < tol:
            hits += 1
            if hits >= 3:
                break
        else:
            hits = 0
    return blocks, f, resid, it


def eg_optimize(objective, shape, sense: str, cfg: OptimizerConfig = DEFAULT_CONFIG,
                grad=None, inits=None) -> EgResult:
    """Exponentiated-gradient optimization over a product of simplices.

    ``objective(list_of_blocks) -> float`` maps one point per simplex in
    ``shape`` to a value; ``grad``, when given, returns one gradient
    array per block.  The first restart starts from ``inits`` (or
    uniform), the rest from seeded Dirichlet draws; the best converged
    run wins.  The objective sequence is monotone in the optimization
    sense within every run.
    """
    if sense not in ("max", "min"):
        raise ValidationError(f"sense must be 'max' or 'min', got {sense!r}")
    maximize = sense == "max"
    rng = np.random.default_rng(cfg.seed)
    starts = []
    if inits is not None:
        starts.append([np.asarray(b, dtype=np.float64).copy() for b in inits])
    else:
        starts.append([np.full(n, 1.0 / n) for n in shape])
    for _ in range(cfg.restarts - 1):
        starts.append([rng.dirichlet(np.ones(n)) for n in shape])
    best = None
    any_converged = False
    for start in starts:
        blocks, f, resid, iters = _eg_run(
            objective, grad, start, maximize, cfg.tolerance, cfg.max_iters, cfg.step_init
        )
        converged = resid <= cfg.tolerance
        any_converged = any_converged or converged
        if best is None or (maximize and f > best.value) or (not maximize and f < best.value):
            best = EgResult(point=blocks, value=f, residual=resid,
                            iterations=iters, converged=converged)
    if not any_converged:
        raise ConvergenceFailure(
            f"no EG restart reached residual {cfg.tolerance:g} "
            f"within {cfg.max_iters} iterations (best residual {best.residual:g})"
        )
    return best


# ----------------------------------------------------------------------
# Augustin fixed point
# ----------------------------------------------------------------------

@dataclass
class AugustinResult:
    q_y: Pmf
    value: float
    engine: str
    residual: float
    iterations: int


def _expected_divergence(p: np.ndarray, Wa: np.ndarray, alpha: float, q: np.ndarray) -> float:
    S = Wa @ np.maximum(q, _kernels.EPS) ** (1.0 - alpha)
    mask = p > 0.0
    return float((p[mask] * np.log(S[mask])).sum() / (alpha - 1.0))


def augustin_fixed_point(p: Pmf, W: Channel, alpha: float,
                         cfg: OptimizerConfig = DEFAULT_CONFIG) -> AugustinResult:
    """Minimizing output distribution of the expected divergence of order alpha.

    Iterates the self-consistency map from the output marginal, damped by
    geometric mixing 0.5 for alpha > 1; hands off to ``eg_optimize`` on
    the convex objective if the iteration plateaus, and reports which
    engine produced the result.
    """
    if p.labels != W.x_labels:
        raise DimensionMismatch("prior labels do not match channel input labels")
    if not (alpha > 0.0) or not np.isfinite(alpha):
        raise InvalidOrder(f"alpha must be positive and finite, got {alpha!r}")
    p_y = p.probs @ W.matrix
    if abs(alpha - 1.0) <= 1e-8:
        # expected KL is minimized by the output marginal
        mask = W.matrix > 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            logratio = np.where(mask, np.log(W.matrix / np.maximum(p_y[None, :], 1e-300)), 0.0)
        value = float((p.probs[:, None] * W.matrix * logratio).sum())
        return AugustinResult(q_y=make_pmf(p_y, renormalize=True, labels=W.y_labels),
                              value=value, engine="marginal", residual=0.0, iterations=0)
    Wa = W.matrix ** alpha
    damp = 0.5 if alpha > 1.0 else 0.0
    q, resid, iters, status = _kernels.augustin_solve(
        p.probs, Wa, alpha, p_y, cfg.tolerance, cfg.max_iters, damp
    )
    engine = "fixed_point"
    if status != 0:
        # plateau or exhausted budget: polish with EG on the convex objective
        def objective(blocks):
            return _expected_divergence(p.probs, Wa, alpha, blocks[0])

        def grad(blocks):
            qq = np.maximum(blocks[0], _kernels.EPS)
            S = Wa @ qq ** (1.0 - alpha)
            g = -(p.probs / S) @ (Wa * qq[None, :] ** (-alpha))
            return [g]

        eg = eg_optimize(objective, [W.n_y], "min",
                         cfg.with_(restarts=max(cfg.restarts, 3)), grad=grad, inits=[q])
        q, resid = eg.point[0], eg.residual
        engine = "fixed_point+eg"
    value = _expected_divergence(p.probs, Wa, alpha, q)
    return AugustinResult(
        q_y=make_pmf(q, renormalize=True, labels=W.y_labels),
        value=value, engine=engine, residual=float(resid), iterations=int(iters),
    )


# ----------------------------------------------------------------------
# alternating minimization over product distributions
# ----------------------------------------------------------------------

@dataclass
class LpResult:
    q_x: Pmf
    q_y: Pmf
    value: float
    residual: float
    iterations: int


def lp_alternating(joint: JointDist, alpha: float,
                   cfg: OptimizerConfig = DEFAULT_CONFIG) -> LpResult:
    """Minimize the order-alpha divergence to a product distribution.

    Coordinate updates use the same closed-form family as the minimizing
    output distribution (exact coordinate minimizers), so the value
    sequence is nonincreasing.  The reported pair is the one reached
    from the deterministic marginal initialization; the value, not the
    pair, is the contract (the minimizer may be non-unique).
    """
    if not (alpha > 0.5) or abs(alpha - 1.0) <= 1e-8 or not np.isfinite(alpha):
        raise InvalidOrder(f"alpha must lie in (1/2,1) or (1,inf), got {alpha!r}")
    Pa = joint.matrix ** alpha
    qx, qy, value, resid, iters, status = _kernels.lp_alternating_solve(
        Pa, alpha, joint.p_x, joint.p_y, cfg.tolerance, cfg.max_iters
    )
    if status == 2 and resid > cfg.tolerance:
        raise ConvergenceFailure(
            f"alternating minimization residual {resid:g} above {cfg.tolerance:g} "
            f"after {iters} iterations"
        )
    return LpResult(
        q_x=make_pmf(qx, renormalize=True, labels=joint.x_labels),
        q_y=make_pmf(qy, renormalize=True, labels=joint.y_labels),
        value=float(value), residual=float(resid), iterations=int(iters),
    )


# ----------------------------------------------------------------------
# batch objectives shared by the rule oracles (boundary-safe)
# ----------------------------------------------------------------------

def qlog_rule_batch(weights: np.ndarray, beta: float):
    """Batch per-observation objective sum_x w[x] r[x]^beta for grid rows."""
    def batch(grid: np.ndarray) -> np.ndarray:
        base = np.maximum(grid, _EVAL_FLOOR) if beta < 0.0 else grid
        return base ** beta @ weights
    return batch


def power_rule_batch(pi: np.ndarray, alpha: float):
    def batch(grid: np.ndarray) -> np.ndarray:
        base = np.maximum(grid, _EVAL_FLOOR) if alpha < 1.0 else grid
        return alpha * (base ** (alpha - 1.0) @ pi) + (1.0 - alpha) * (base ** alpha).sum(axis=1)
    return batch


def ac_rule_batch(p: np.ndarray, Wm: np.ndarray, beta: float):
    """Batch of the coupled log-sum objective over rule stacks (b, n_y, n_x).

    All-boundary rows give -inf, the legitimate worst value for the
    maximizing sense."""
    def batch(stack: np.ndarray) -> np.ndarray:
        base = np.maximum(stack, _EVAL_FLOOR) if beta < 0.0 else stack
        S = np.einsum("xy,byx->bx", Wm, base ** beta)
        with np.errstate(divide="ignore"):
            return np.log(S) @ p
    return batch


def lp_rule_batch(pt: np.ndarray, Wm: np.ndarray, beta: float, qt: float):
    def batch(stack: np.ndarray) -> np.ndarray:
        base = np.maximum(stack, _EVAL_FLOOR) if beta < 0.0 else stack
        S = np.einsum("xy,byx->bx", Wm, base ** beta)
        with np.errstate(divide="ignore"):
            return np.log(S ** qt @ pt)
    return batch
