"""Renyi-family information measures on finite (prior, channel) pairs.

Five order-alpha mutual-information variants are supported, named after
where their extremization sits:

* ``sibson``: divergence to the best product with the true input
  marginal fixed; closed form available.
* ``arimoto``: input entropy minus the escort-style conditional entropy.
* ``augustin_csiszar``: best output distribution under the expected
  per-input divergence; computed by fixed point, gradient descent, or
  grid.
* ``hayashi``: input entropy minus the posterior-moment conditional
  entropy.
* ``lapidoth_pfister``: divergence to the best product distribution
  over both marginals; needs alpha > 1/2.

Every variant also admits a decision-rule (conditional-entropy)
characterization; ``method="optimize"`` and ``method="oracle"`` compute
through that route so closed forms always have an independent check.
All outputs are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    InvalidOrder,
    NumericalInconsistency,
    OracleTooLarge,
    UnsupportedVariant,
)
from .optimize import (
    DEFAULT_CONFIG,
    OptimizerConfig,
    ac_rule_batch,
    augustin_fixed_point,
    eg_optimize,
    lp_alternating,
    lp_rule_batch,
    oracle_optimize_rule,
    oracle_optimize_single,
    power_rule_batch,
    qlog_rule_batch,
    simplex_grid,
)
from .simplex import Channel, Pmf, compose_joint, tilt

ALPHA_ONE_ATOL = 1e-8


class MiVariant(str, Enum):
    SHANNON = "shannon"
    SIBSON = "sibson"
    ARIMOTO = "arimoto"
    AUGUSTIN_CSISZAR = "augustin_csiszar"
    HAYASHI = "hayashi"
    LAPIDOTH_PFISTER = "lapidoth_pfister"


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    OPTIMIZE = "optimize"
    ORACLE = "oracle"


def _variant(v) -> MiVariant:
    return MiVariant(v)


def _method(m) -> Method:
    return Method(m)


def lp_order_valid(alpha: float) -> bool:
    return alpha > 0.5 and abs(alpha - 1.0) > ALPHA_ONE_ATOL


def _check_alpha(alpha: float, variant: MiVariant):
    if not np.isfinite(alpha) or alpha <= 0.0:
        raise InvalidOrder(f"alpha must be positive and finite, got {alpha!r}")
    if variant is MiVariant.LAPIDOTH_PFISTER and not (
        alpha > 0.5 or abs(alpha - 1.0) <= ALPHA_ONE_ATOL
    ):
        raise InvalidOrder(
            f"the lapidoth_pfister variant needs alpha in (1/2,1) or (1,inf), got {alpha!r}"
        )


def _logsumexp(a: np.ndarray) -> float:
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.exp(a - m).sum()))


@dataclass(frozen=True)
class ShannonMeasures:
    entropy: float
    conditional_entropy: float
    mutual_information: float


def shannon_entropy(p: Pmf) -> float:
    probs = p.probs[p.probs > 0.0]
    return float(-(probs * np.log(probs)).sum())


def shannon_measures(p: Pmf, W: Channel) -> ShannonMeasures:
    """Input entropy, conditional entropy, and their difference (nats)."""
    joint = compose_joint(p, W)
    h = shannon_entropy(p)
    h_cond = 0.0
    for y in np.flatnonzero(joint.y_support):
        pi = joint.posteriors[y]
        mask = pi > 0.0
        h_cond -= joint.p_y[y] * float((pi[mask] * np.log(pi[mask])).sum())
    mi = h - h_cond
    if mi < -1e-12:
        raise NumericalInconsistency(f"negative mutual information {mi!r}")
    return ShannonMeasures(entropy=h, conditional_entropy=h_cond,
                           mutual_information=max(mi, 0.0))


def renyi_entropy(p: Pmf, alpha: float) -> float:
    """(1/(1-alpha)) log sum p**alpha, the Shannon entropy at alpha = 1."""
    if not (alpha > 0.0) or not np.isfinite(alpha):
        raise InvalidOrder(f"alpha must be positive and finite, got {alpha!r}")
    if abs(alpha - 1.0) <= ALPHA_ONE_ATOL:
        return shannon_entropy(p)
    lp = np.log(p.probs[p.probs > 0.0])
    return _logsumexp(alpha * lp) / (1.0 - alpha)


def renyi_divergence(p: Pmf, q: Pmf, alpha: float) -> float:
    """(1/(alpha-1)) log sum p**alpha q**(1-alpha); KL at alpha = 1.

    For alpha > 1 the divergence is infinite unless support(p) is inside
    support(q).  Values are clamped at zero from rounding noise.
    """
    if not (alpha > 0.0) or not np.isfinite(alpha):
        raise InvalidOrder(f"alpha must be positive and finite, got {alpha!r}")
    if p.n != q.n:
        raise DimensionMismatch("distributions live on different alphabets")
    pp, qq = p.probs, q.probs
    sup_p = pp > 0.0
    if abs(alpha - 1.0) <= ALPHA_ONE_ATOL:
        if np.any(sup_p & (qq == 0.0)):
            return np.inf
        val = float((pp[sup_p] * np.log(pp[sup_p] / qq[sup_p])).sum())
    else:
        if alpha > 1.0 and np.any(sup_p & (qq == 0.0)):
            return np.inf
        both = sup_p & (qq > 0.0)
        if not np.any(both):
            return np.inf
        terms = alpha * np.log(pp[both]) + (1.0 - alpha) * np.log(qq[both])
        val = _logsumexp(terms) / (alpha - 1.0)
    if val < -1e-12:
        raise NumericalInconsistency(f"negative divergence {val!r}")
    return max(val, 0.0)


# ----------------------------------------------------------------------
# conditional Renyi entropies
# ----------------------------------------------------------------------

def _arimoto_style_closed(prior: Pmf, W: Channel, alpha: float) -> float:
    """(alpha/(1-alpha)) log sum_y (sum_x (prior*W)**alpha)**(1/alpha)."""
    with np.errstate(divide="ignore"):
        L = np.log(prior.probs)[:, None] + np.log(W.matrix)  # -inf on zeros
    inner = np.empty(W.n_y)
    for y in range(W.n_y):
        col = L[:, y]
        col = col[np.isfinite(col)]
        inner[y] = _logsumexp(alpha * col) / alpha if col.size else -np.inf
    total = _logsumexp(inner[np.isfinite(inner)])
    return alpha / (1.0 - alpha) * total


def _hayashi_closed(p: Pmf, W: Channel, alpha: float) -> float:
    joint = compose_joint(p, W)
    terms = []
    for y in np.flatnonzero(joint.y_support):
        pi = joint.posteriors[y]
        lse = _logsumexp(alpha * np.log(pi[pi > 0.0]))
        terms.append(np.log(joint.p_y[y]) + lse)
    return _logsumexp(np.array(terms)) / (1.0 - alpha)


def _decomposable_rule_entropy(prior: Pmf, W: Channel, alpha: float,
                               method: Method, cfg: OptimizerConfig) -> float:
    """Decision-rule form shared by the escort-style conditional entropies.

    Optimizes sum_y opt_r sum_x prior(x) W(y|x) r(x)^(1-1/alpha) per
    observation and returns (alpha/(1-alpha)) log of the total.
    """
    beta = 1.0 - 1.0 / alpha
    maximize = alpha > 1.0
    weights = prior.probs[:, None] * W.matrix  # (n_x, n_y)
    total = 0.0
    for y in range(W.n_y):
        w = np.ascontiguousarray(weights[:, y])
        if w.sum() <= 0.0:
            continue
        if method is Method.OPTIMIZE:
            r0 = w / w.sum()
            _, val, _, _ = _kernels.tsallis_eg(
                w, beta, False, r0, maximize, cfg.tolerance, cfg.max_iters, cfg.step_init
            )
        else:
            _, val = oracle_optimize_single(
                None, prior.n, maximize, cfg, batch_objective=qlog_rule_batch(w, beta)
            )
        total += val
    return alpha / (1.0 - alpha) * np.log(total)


def _hayashi_rule_entropy(p: Pmf, W: Channel, alpha: float,
                          method: Method, cfg: OptimizerConfig) -> float:
    """Decision-rule form of the posterior-moment conditional entropy."""
    joint = compose_joint(p, W)
    maximize = alpha > 1.0
    total = 0.0
    for y in np.flatnonzero(joint.y_support):
        pi = np.ascontiguousarray(joint.posteriors[y])
        if method is Method.OPTIMIZE:
            r0 = np.full(p.n, 1.0 / p.n)  # uninformed start, the optimum is not handed in
            _, val, _, _ = _kernels.power_eg(
                pi, alpha, r0, maximize, cfg.tolerance, cfg.max_iters, cfg.step_init
            )
        else:
            _, val = oracle_optimize_single(
                None, p.n, maximize, cfg, batch_objective=power_rule_batch(pi, alpha)
            )
        total += joint.p_y[y] * val
    return np.log(total) / (1.0 - alpha)


def _ac_rule_entropy(p: Pmf, W: Channel, alpha: float,
                     method: Method, cfg: OptimizerConfig) -> float:
    """Decision-rule form of the expected-divergence conditional entropy.

    The objective couples observations, so the optimization runs jointly
    over all per-observation simplices.
    """
    beta = 1.0 - 1.0 / alpha
    maximize = alpha > 1.0
    joint = compose_joint(p, W)
    if method is Method.OPTIMIZE:
        best = None
        rng = np.random.default_rng(cfg.seed)
        inits = [joint.posteriors.copy()]
        inits += [rng.dirichlet(np.ones(p.n), size=W.n_y) for _ in range(cfg.restarts - 1)]
        for R0 in inits:
            _, val, _, _ = _kernels.ac_eg(
                p.probs, W.matrix, beta, np.ascontiguousarray(R0), maximize,
                cfg.tolerance, cfg.max_iters, cfg.step_init,
            )
            if best is None or (maximize and val > best) or (not maximize and val < best):
                best = val
        phi = best
    else:
        _, phi = oracle_optimize_rule(
            None, p.n, W.n_y, maximize, cfg,
            batch_objective=ac_rule_batch(p.probs, W.matrix, beta),
        )
    return alpha / (1.0 - alpha) * phi


def _lp_rule_entropy(p: Pmf, W: Channel, alpha: float,
                     method: Method, cfg: OptimizerConfig) -> float:
    """Decision-rule form of the product-divergence conditional entropy."""
    beta = 1.0 - 1.0 / alpha
    qt = alpha / (2.0 * alpha - 1.0)
    maximize = alpha > 1.0
    pt = tilt(p, qt).probs
    joint = compose_joint(p, W)
    if method is Method.OPTIMIZE:
        best = None
        rng = np.random.default_rng(cfg.seed)
        inits = [joint.posteriors.copy()]
        inits += [rng.dirichlet(np.ones(p.n), size=W.n_y) for _ in range(cfg.restarts - 1)]
        for R0 in inits:
            _, val, _, _ = _kernels.lp_eg(
                pt, W.matrix, beta, qt, np.ascontiguousarray(R0), maximize,
                cfg.tolerance, cfg.max_iters, cfg.step_init,
            )
            if best is None or (maximize and val > best) or (not maximize and val < best):
                best = val
        ln_g = best
    else:
        _, ln_g = oracle_optimize_rule(
            None, p.n, W.n_y, maximize, cfg,
            batch_objective=lp_rule_batch(pt, W.matrix, beta, qt),
        )
    return (2.0 * alpha - 1.0) / (1.0 - alpha) * ln_g


def cond_renyi_entropy(variant, p: Pmf, W: Channel, alpha: float,
                       method="closed_form",
                       cfg: OptimizerConfig = DEFAULT_CONFIG) -> float:
    """Conditional entropy of order alpha for the given variant (nats)."""
    variant = _variant(variant)
    method = _method(method)
    if variant is MiVariant.SHANNON:
        raise UnsupportedVariant("use shannon_measures for the order-1 quantities")
    _check_alpha(alpha, variant)
    if p.labels != W.x_labels:
        raise DimensionMismatch("prior labels do not match channel input labels")
    if abs(alpha - 1.0) <= ALPHA_ONE_ATOL:
        return shannon_measures(p, W).conditional_entropy
    if variant is MiVariant.ARIMOTO:
        if method is Method.CLOSED_FORM:
            return _arimoto_style_closed(p, W, alpha)
        return _decomposable_rule_entropy(p, W, alpha, method, cfg)
    if variant is MiVariant.SIBSON:
        if method is Method.CLOSED_FORM:
            return _arimoto_style_closed(tilt(p, 1.0 / alpha), W, alpha)
        return _decomposable_rule_entropy(tilt(p, 1.0 / alpha), W, alpha, method, cfg)
    if variant is MiVariant.HAYASHI:
        if method is Method.CLOSED_FORM:
            return _hayashi_closed(p, W, alpha)
        return _hayashi_rule_entropy(p, W, alpha, method, cfg)
    if variant is MiVariant.AUGUSTIN_CSISZAR:
        if method is Method.CLOSED_FORM:
            return shannon_entropy(p) - alpha_mi(variant, p, W, alpha, method, cfg)
        return _ac_rule_entropy(p, W, alpha, method, cfg)
    if variant is MiVariant.LAPIDOTH_PFISTER:
        if method is Method.CLOSED_FORM:
            qt = alpha / (2.0 * alpha - 1.0)
            return renyi_entropy(p, qt) - alpha_mi(variant, p, W, alpha, method, cfg)
        return _lp_rule_entropy(p, W, alpha, method, cfg)
    raise UnsupportedVariant(str(variant))


# ----------------------------------------------------------------------
# mutual information
# ----------------------------------------------------------------------

def _clamp_mi(value: float, method: Method, p: Pmf,
              cfg: OptimizerConfig) -> float:
    if method is Method.CLOSED_FORM:
        threshold = 1e-12
    elif method is Method.OPTIMIZE:
        threshold = 1e-6
    else:
        threshold = p.n * cfg.grid_resolution
    if value < -threshold:
        raise NumericalInconsistency(
            f"mutual information {value!r} below -{threshold:g}: rounding cannot explain this"
        )
    return max(value, 0.0)


def _sibson_closed(p: Pmf, W: Channel, alpha: float) -> float:
    with np.errstate(divide="ignore"):
        L = np.log(p.probs)[:, None] + alpha * np.log(W.matrix)
    lnA = np.empty(W.n_y)
    for y in range(W.n_y):
        col = L[:, y]
        col = col[np.isfinite(col)]
        lnA[y] = _logsumexp(col) if col.size else -np.inf
    total = _logsumexp(lnA[np.isfinite(lnA)] / alpha)
    return alpha / (alpha - 1.0) * total


def _sibson_objective(p: Pmf, W: Channel, alpha: float):
    A = p.probs @ W.matrix ** alpha
    live = A > 0.0

    def objective(blocks):
        q = np.maximum(blocks[0], _kernels.EPS)
        return float(np.log((A[live] * q[live] ** (1.0 - alpha)).sum()) / (alpha - 1.0))

    def grad(blocks):
        q = np.maximum(blocks[0], _kernels.EPS)
        S = (A[live] * q[live] ** (1.0 - alpha)).sum()
        g = np.zeros_like(q)
        g[live] = -A[live] * q[live] ** (-alpha) / S
        return [g]

    def batch(grid):
        base = np.maximum(grid[:, live], 1e-30) if alpha > 1.0 else grid[:, live]
        return np.log(base ** (1.0 - alpha) @ A[live]) / (alpha - 1.0)

    return objective, grad, batch


def _ac_objective(p: Pmf, W: Channel, alpha: float):
    Wa = W.matrix ** alpha

    def objective(blocks):
        q = np.maximum(blocks[0], _kernels.EPS)
        S = Wa @ q ** (1.0 - alpha)
        mask = p.probs > 0.0
        return float((p.probs[mask] * np.log(S[mask])).sum() / (alpha - 1.0))

    def grad(blocks):
        q = np.maximum(blocks[0], _kernels.EPS)
        S = Wa @ q ** (1.0 - alpha)
        return [-(p.probs / S) @ (Wa * q[None, :] ** (-alpha))]

    def batch(grid):
        base = np.maximum(grid, 1e-30) if alpha > 1.0 else grid
        T = base ** (1.0 - alpha) @ Wa.T  # (m, n_x)
        with np.errstate(divide="ignore"):
            return np.log(T) @ p.probs / (alpha - 1.0)

    return objective, grad, batch


def alpha_mi(variant, p: Pmf, W: Channel, alpha: float = 1.0,
             method="closed_form",
             cfg: OptimizerConfig = DEFAULT_CONFIG) -> float:
    """Mutual information of order alpha for the given variant (nats).

    ``closed_form`` uses the analytic expression where one exists and
    the dedicated iterative solver otherwise; ``optimize`` recomputes
    through a generic numerical route; ``oracle`` brute-forces a grid
    (small alphabets only).  Results are clamped to [0, inf); negative
    values beyond the method's noise floor raise.
    """
    variant = _variant(variant)
    method = _method(method)
    if p.labels != W.x_labels:
        raise DimensionMismatch("prior labels do not match channel input labels")
    if variant is MiVariant.SHANNON:
        return shannon_measures(p, W).mutual_information
    _check_alpha(alpha, variant)
    if abs(alpha - 1.0) <= ALPHA_ONE_ATOL:
        return shannon_measures(p, W).mutual_information

    if variant is MiVariant.SIBSON:
        if method is Method.CLOSED_FORM:
            value = _sibson_closed(p, W, alpha)
        else:
            objective, grad, batch = _sibson_objective(p, W, alpha)
            if method is Method.OPTIMIZE:
                p_y = p.probs @ W.matrix
                res = eg_optimize(objective, [W.n_y], "min", cfg, grad=grad, inits=[p_y])
                value = res.value
            else:
                _, value = oracle_optimize_single(None, W.n_y, False, cfg,
                                                  batch_objective=batch)
    elif variant is MiVariant.ARIMOTO:
        value = renyi_entropy(p, alpha) - cond_renyi_entropy(variant, p, W, alpha, method, cfg)
    elif variant is MiVariant.HAYASHI:
        value = renyi_entropy(p, alpha) - cond_renyi_entropy(variant, p, W, alpha, method, cfg)
    elif variant is MiVariant.AUGUSTIN_CSISZAR:
        if method is Method.CLOSED_FORM:
            value = augustin_fixed_point(p, W, alpha, cfg).value
        else:
            objective, grad, batch = _ac_objective(p, W, alpha)
            if method is Method.OPTIMIZE:
                p_y = p.probs @ W.matrix
                res = eg_optimize(objective, [W.n_y], "min", cfg, grad=grad, inits=[p_y])
                value = res.value
            else:
                _, value = oracle_optimize_single(None, W.n_y, False, cfg,
                                                  batch_objective=batch)
    elif variant is MiVariant.LAPIDOTH_PFISTER:
        joint = compose_joint(p, W)
        if method is Method.CLOSED_FORM:
            value = lp_alternating(joint, alpha, cfg).value
        elif method is Method.OPTIMIZE:
            Pa = joint.matrix ** alpha

            def objective(blocks):
                qx = np.maximum(blocks[0], _kernels.EPS)
                qy = np.maximum(blocks[1], _kernels.EPS)
                tot = qx ** (1.0 - alpha) @ Pa @ qy ** (1.0 - alpha)
                return float(np.log(tot) / (alpha - 1.0))

            def grad(blocks):
                qx = np.maximum(blocks[0], _kernels.EPS)
                qy = np.maximum(blocks[1], _kernels.EPS)
                ax = qx ** (1.0 - alpha)
                ay = qy ** (1.0 - alpha)
                tot = ax @ Pa @ ay
                gx = -(qx ** (-alpha)) * (Pa @ ay) / tot
                gy = -(qy ** (-alpha)) * (ax @ Pa) / tot
                return [gx, gy]

            res = eg_optimize(objective, [p.n, W.n_y], "min", cfg, grad=grad,
                              inits=[joint.p_x, joint.p_y])
            value = res.value
        else:
            from .optimize import GRID_POINT_BUDGET, _check_oracle_alphabet

            _check_oracle_alphabet(p.n, W.n_y)
            Pa = joint.matrix ** alpha
            gx = simplex_grid(p.n, cfg.grid_resolution)
            gy = simplex_grid(W.n_y, cfg.grid_resolution)
            if gx.shape[0] * gy.shape[0] > GRID_POINT_BUDGET:
                raise OracleTooLarge("double grid too large; coarsen the resolution")
            bx = np.maximum(gx, 1e-30) if alpha > 1.0 else gx
            by = np.maximum(gy, 1e-30) if alpha > 1.0 else gy
            M = bx ** (1.0 - alpha) @ Pa @ (by ** (1.0 - alpha)).T
            # minimizing the signed value flips to maximizing T below order 1
            T_opt = M.min() if alpha > 1.0 else M.max()
            value = float(np.log(T_opt) / (alpha - 1.0))
    else:
        raise UnsupportedVariant(str(variant))
    return _clamp_mi(float(value), method, p, cfg)
