"""Adversarial gain functions, generalized vulnerability, and leakage.

A vulnerability problem is fully captured by the tuple
``(prior, phi, psi, gain)``: the adversary picks one action (a
distribution over secrets) per observation, the per-secret stream of
gains is aggregated by the psi-mean over observations and the phi-mean
over secrets, and the optimizer's value is the (prior or conditional)
vulnerability.  Multiplicative leakage is the log-ratio of conditional
to prior value (flipped for losses).

Direction of every inner aggregate optimization, given the problem
sense and the generator's direction (this is the single dispatch table
the whole module follows):

    =============  ===============  ====================
    problem sense  phi direction    inner optimization
    =============  ===============  ====================
    gain (max V)   increasing       maximize
    gain (max V)   decreasing       minimize
    loss (min H)   increasing       minimize
    loss (min H)   decreasing       maximize
    =============  ===============  ====================

i.e. ``maximize_inner = (sense == "gain") == phi.increasing``.

Closed forms exist for the soft 0-1 score under log/deformed-log
generators (via the generalized Gibbs optimum), for the power score
under a linear generator (proper scoring rule, optimum at the honest
posterior), and for its loss companion under the matching deformed log.
Everything else runs through exponentiated gradient with a brute-force
grid cross-check.  When the two generators differ the objective couples
observations and the optimization runs jointly over all
per-observation simplices, initialized at the posterior family plus the
constant prior-optimal rule (which pins conditional >= prior for gains)
plus seeded random restarts.

A point-mass prior makes every soft 0-1 vulnerability equal one and
every leakage zero; this falls out of the formulas, no special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DegenerateVulnerability,
    DimensionMismatch,
    DomainError,
    InvalidOrder,
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
)
from .qcalc import Aggregator, _apply, q_log
from .renyi import (
    ALPHA_ONE_ATOL,
    MiVariant,
    lp_order_valid,
    renyi_entropy,
    shannon_entropy,
)
from .simplex import Channel, DecisionRule, Pmf, compose_joint, make_pmf, tilt


# ----------------------------------------------------------------------
# gain functions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GainFunction:
    """Score g(x, r) of an action r (a distribution over X) against x."""

    kind: str  # soft01 | power | power_loss | transformed
    sense: str  # "gain" or "loss"
    alpha: float | None = None


def soft01_gain() -> GainFunction:
    """g(x, r) = r(x), the probability assigned to the truth."""
    return GainFunction(kind="soft01", sense="gain")


def power_score_gain(alpha: float) -> GainFunction:
    """alpha r(x)^(alpha-1) + (1-alpha) sum r^alpha; gain above order 1,
    loss below."""
    _check_score_order(alpha)
    return GainFunction(kind="power", sense="gain" if alpha > 1.0 else "loss", alpha=alpha)


def power_loss(alpha: float) -> GainFunction:
    """The power score raised to 1/(1-alpha): a loss for every order."""
    _check_score_order(alpha)
    return GainFunction(kind="power_loss", sense="loss", alpha=alpha)


def transformed_gain(alpha: float) -> GainFunction:
    """q_log of the soft 0-1 score at q = 1/alpha; tends to r(x)-1 as
    alpha grows (alpha = inf is accepted and uses q = 0)."""
    if not (alpha > 0.0):
        raise InvalidOrder(f"alpha must be positive, got {alpha!r}")
    return GainFunction(kind="transformed", sense="gain", alpha=float(alpha))


def _check_score_order(alpha: float):
    if not (alpha > 0.0) or abs(alpha - 1.0) <= ALPHA_ONE_ATOL or not np.isfinite(alpha):
        raise InvalidOrder(f"score order must lie in (0,1) or (1,inf), got {alpha!r}")


def _gain_vector(g: GainFunction, action: np.ndarray) -> np.ndarray:
    """g(x, action) for every x at once."""
    a = np.asarray(action, dtype=np.float64)
    if g.kind == "soft01":
        return a.copy()
    if g.kind == "power":
        al = g.alpha
        with np.errstate(divide="ignore"):
            return al * a ** (al - 1.0) + (1.0 - al) * float((a ** al).sum())
    if g.kind == "power_loss":
        al = g.alpha
        with np.errstate(divide="ignore"):
            f = al * a ** (al - 1.0) + (1.0 - al) * float((a ** al).sum())
        if np.any(f <= 0.0):
            raise DomainError("power loss is defined where the power score is positive")
        return f ** (1.0 / (1.0 - al))
    if g.kind == "transformed":
        q = 0.0 if np.isinf(g.alpha) else 1.0 / g.alpha
        return np.asarray(q_log(a, q), dtype=np.float64)
    raise UnsupportedVariant(f"unknown gain kind {g.kind!r}")


def gain_eval(g: GainFunction, x: str, r: Pmf) -> float:
    """Score of action r against the true symbol x (label-based)."""
    idx = r.labels.index(x)
    return float(_gain_vector(g, r.probs)[idx])


# ----------------------------------------------------------------------
# result and spec containers
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LeakageSpec:
    prior: Pmf
    phi: Aggregator
    psi: Aggregator
    gain: GainFunction
    sense: str  # "gain" (max) or "loss" (min)


@dataclass
class VulnerabilityResult:
    value: float
    rule: DecisionRule | Pmf | None  # action for priors, rule for conditionals
    method: str
    residual: float


def _resolve(sense, g: GainFunction) -> str:
    sense = sense or g.sense
    if sense not in ("gain", "loss"):
        raise UnsupportedVariant(f"sense must be 'gain' or 'loss', got {sense!r}")
    return sense


def _maximize_inner(sense: str, phi: Aggregator) -> bool:
    return (sense == "gain") == phi.increasing


def _lse(a: np.ndarray) -> float:
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.exp(a - m).sum()))


# ----------------------------------------------------------------------
# prior vulnerability
# ----------------------------------------------------------------------

def _prior_closed(p: Pmf, g: GainFunction, phi: Aggregator, sense: str):
    """(value, action) when a closed form applies, else None."""
    if sense != g.sense:
        return None
    probs = p.probs
    if g.kind == "soft01":
        if phi.kind == "log":
            mask = probs > 0.0
            return float(np.exp((probs[mask] * np.log(probs[mask])).sum())), Pmf(p.labels, probs)
        if phi.kind == "q_log" and phi.q is not None and phi.q > 0.0:
            q = phi.q
            lp = np.log(probs[probs > 0.0])
            ln_norm = _lse(lp / q) * q  # log of |p|_{1/q}
            return float(np.exp(ln_norm / (1.0 - q))), tilt(p, 1.0 / q)
        if phi.kind == "linear" and phi.increasing:
            idx = int(np.argmax(probs))
            action = np.zeros_like(probs)
            action[idx] = 1.0
            return float(probs[idx]), Pmf(p.labels, action)
    elif g.kind == "power" and phi.kind == "linear" and phi.increasing:
        return float((probs ** g.alpha).sum()), Pmf(p.labels, probs)
    elif (
        g.kind == "power_loss"
        and phi.kind == "q_log"
        and phi.q is not None
        and abs(phi.q - g.alpha) <= 1e-9
    ):
        al = g.alpha
        lse = _lse(al * np.log(probs[probs > 0.0]))
        return float(np.exp(lse / (1.0 - al))), Pmf(p.labels, probs)
    elif g.kind == "transformed" and phi.kind == "linear" and phi.increasing:
        if np.isinf(g.alpha):
            idx = int(np.argmax(probs))
            action = np.zeros_like(probs)
            action[idx] = 1.0
            return float(probs[idx]) - 1.0, Pmf(p.labels, action)
        from .qcalc import gibbs_optimum

        opt = gibbs_optimum(p, 1.0 / g.alpha)
        return opt.value, opt.argmax
    return None


def _prior_objective(p: Pmf, g: GainFunction, phi: Aggregator):
    mask = p.probs > 0.0

    def aggregate(action: np.ndarray) -> float:
        gv = _gain_vector(g, action)
        fv = _apply(phi.forward, gv)
        return float((p.probs[mask] * fv[mask]).sum())

    return aggregate


def prior_vulnerability(p: Pmf, g: GainFunction, phi: Aggregator, sense=None,
                        method: str = "auto",
                        cfg: OptimizerConfig = DEFAULT_CONFIG) -> VulnerabilityResult:
    """Optimal phi-aggregated gain of a single action against the prior."""
    sense = _resolve(sense, g)
    closed = _prior_closed(p, g, phi, sense)
    if method in ("auto", "closed_form") and closed is not None:
        value, action = closed
        return VulnerabilityResult(value=value, rule=action, method="closed_form", residual=0.0)
    if method == "closed_form":
        raise UnsupportedVariant(
            f"no closed form for gain {g.kind!r} with generator {phi.kind!r}"
        )
    aggregate = _prior_objective(p, g, phi)
    maximize = _maximize_inner(sense, phi)
    if method == "oracle":
        action, agg = oracle_optimize_single(aggregate, p.n, maximize, cfg)
        return VulnerabilityResult(
            value=float(phi.inverse(agg)), rule=Pmf(p.labels, action),
            method="oracle", residual=cfg.grid_resolution,
        )
    res = eg_optimize(lambda blocks: aggregate(blocks[0]), [p.n],
                      "max" if maximize else "min", cfg,
                      inits=[p.probs])
    return VulnerabilityResult(
        value=float(phi.inverse(res.value)), rule=Pmf(p.labels, res.point[0]),
        method="optimize", residual=res.residual,
    )


# ----------------------------------------------------------------------
# conditional vulnerability, phi = psi (per-observation decomposition)
# ----------------------------------------------------------------------

def _rows_to_rule(p: Pmf, W: Channel, rows: np.ndarray) -> DecisionRule:
    return DecisionRule(p.labels, W.y_labels, rows)


def _cond_closed_same(p: Pmf, W: Channel, g: GainFunction, phi: Aggregator, sense: str):
    """(value, rule_rows) for the phi = psi closed forms, else None."""
    if sense != g.sense:
        return None
    joint = compose_joint(p, W)
    weights = joint.matrix  # (n_x, n_y)
    n_x, n_y = weights.shape
    rows = np.full((n_y, n_x), 1.0 / n_x)
    if g.kind == "soft01":
        if phi.kind == "log":
            total = 0.0
            for y in np.flatnonzero(joint.y_support):
                pi = joint.posteriors[y]
                mask = pi > 0.0
                total += joint.p_y[y] * float((pi[mask] * np.log(pi[mask])).sum())
                rows[y] = pi
            return float(np.exp(total)), rows
        if phi.kind == "q_log" and phi.q is not None and phi.q > 0.0:
            q = phi.q
            terms = []
            with np.errstate(divide="ignore"):
                LW = np.log(weights)
            for y in range(n_y):
                col = LW[:, y]
                live = np.isfinite(col)
                if not np.any(live):
                    continue
                terms.append(q * _lse(col[live] / q))
                tilted = np.zeros(n_x)
                lw = col[live] / q
                lw -= lw.max()
                w = np.exp(lw)
                tilted[live] = w / w.sum()
                rows[y] = tilted
            ln_t = _lse(np.array(terms))
            return float(np.exp(ln_t / (1.0 - q))), rows
        if phi.kind == "linear" and phi.increasing:
            total = 0.0
            for y in range(n_y):
                idx = int(np.argmax(weights[:, y]))
                total += weights[idx, y]
                rows[y] = np.zeros(n_x)
                rows[y][idx] = 1.0
            return float(total), rows
    elif g.kind == "power" and phi.kind == "linear" and phi.increasing:
        total = 0.0
        for y in np.flatnonzero(joint.y_support):
            pi = joint.posteriors[y]
            total += joint.p_y[y] * float((pi ** g.alpha).sum())
            rows[y] = pi
        return float(total), rows
    elif (
        g.kind == "power_loss"
        and phi.kind == "q_log"
        and phi.q is not None
        and abs(phi.q - g.alpha) <= 1e-9
    ):
        al = g.alpha
        terms = []
        for y in np.flatnonzero(joint.y_support):
            col = weights[:, y]
            lse = _lse(al * np.log(col[col > 0.0]))
            terms.append((1.0 - al) * np.log(joint.p_y[y]) + lse)
            rows[y] = joint.posteriors[y]
        return float(np.exp(_lse(np.array(terms)) / (1.0 - al))), rows
    return None


def _cond_numeric_same(p: Pmf, W: Channel, g: GainFunction, phi: Aggregator,
                       sense: str, method: str, cfg: OptimizerConfig):
    """Per-observation numerical optimization for phi = psi."""
    joint = compose_joint(p, W)
    weights = joint.matrix
    n_x, n_y = weights.shape
    rows = np.full((n_y, n_x), 1.0 / n_x)
    maximize = _maximize_inner(sense, phi)
    aggregate = 0.0
    worst_resid = 0.0
    known_qlog = g.kind == "soft01" and phi.kind in ("log", "q_log")
    known_power = g.kind in ("power", "power_loss") and (
        (g.kind == "power" and phi.kind == "linear")
        or (g.kind == "power_loss" and phi.kind == "q_log"
            and phi.q is not None and abs(phi.q - g.alpha) <= 1e-9)
    )
    for y in range(n_y):
        w = np.ascontiguousarray(weights[:, y])
        total_w = float(w.sum())
        if total_w <= 0.0:
            continue
        if known_qlog:
            use_log = phi.kind == "log"
            beta = 0.0 if use_log else 1.0 - phi.q
            # phi(g) is affine in r**beta, so the direction flips with q > 1
            tmax = maximize if (use_log or phi.q < 1.0) else not maximize
            if method == "optimize":
                r0 = w / total_w
                r, val, resid, _ = _kernels.tsallis_eg(
                    w, beta, use_log, r0, tmax, cfg.tolerance, cfg.max_iters, cfg.step_init
                )
            else:
                r, val = oracle_optimize_single(
                    None, n_x, tmax, cfg,
                    batch_objective=(lambda grid: np.where(grid > 0, np.log(np.maximum(grid, 1e-300)), -np.inf) @ w)
                    if use_log else qlog_rule_batch(w, beta),
                )
                resid = cfg.grid_resolution
            rows[y] = r
            if use_log:
                aggregate += val
            else:
                aggregate += (val - total_w) / (1.0 - phi.q)
        elif known_power:
            pi = w / total_w
            pmax = g.alpha > 1.0
            if method == "optimize":
                r0 = np.full(n_x, 1.0 / n_x)
                r, val, resid, _ = _kernels.power_eg(
                    pi, g.alpha, r0, pmax, cfg.tolerance, cfg.max_iters, cfg.step_init
                )
            else:
                r, val = oracle_optimize_single(
                    None, n_x, pmax, cfg, batch_objective=power_rule_batch(pi, g.alpha)
                )
                resid = cfg.grid_resolution
            rows[y] = r
            if g.kind == "power":
                aggregate += total_w * val
            else:
                # phi(power_loss) = (power_score - 1)/(1 - alpha), summed with weights
                aggregate += total_w * (val - 1.0) / (1.0 - g.alpha)
        else:
            pi = w / total_w

            def inner(blocks):
                gv = _gain_vector(g, blocks[0])
                fv = _apply(phi.forward, gv)
                mask = pi > 0.0
                return float((pi[mask] * fv[mask]).sum())

            if method == "optimize":
                res = eg_optimize(inner, [n_x], "max" if maximize else "min", cfg,
                                  inits=[pi])
                r, val, resid = res.point[0], res.value, res.residual
            else:
                r, val = oracle_optimize_single(lambda a: inner([a]), n_x, maximize, cfg)
                resid = cfg.grid_resolution
            rows[y] = r
            aggregate += total_w * val
        worst_resid = max(worst_resid, resid)
    return float(phi.inverse(aggregate)), rows, worst_resid


# ----------------------------------------------------------------------
# conditional vulnerability, phi != psi (coupled observations)
# ----------------------------------------------------------------------

def _detect_ac_tuple(g: GainFunction, phi: Aggregator, psi: Aggregator):
    if g.kind != "soft01" or phi.kind != "log" or psi.kind != "q_log":
        return None
    q = psi.q
    if q is None or not (q > 0.0):
        return None
    return 1.0 / q  # alpha


def _detect_lp_tuple(g: GainFunction, phi: Aggregator, psi: Aggregator):
    if g.kind != "soft01" or phi.kind != "q_log" or psi.kind != "q_log":
        return None
    q, qt = psi.q, phi.q
    if q is None or qt is None or not (0.0 < q < 2.0):
        return None
    if abs(qt - 1.0 / (2.0 - q)) > 1e-9:
        return None
    alpha = 1.0 / q
    return alpha if lp_order_valid(alpha) else None


def _joint_eg_inits(p: Pmf, W: Channel, prior_action: np.ndarray,
                    cfg: OptimizerConfig) -> list[np.ndarray]:
    """Posterior family, the constant prior-optimal rule, then seeded draws."""
    joint = compose_joint(p, W)
    rng = np.random.default_rng(cfg.seed)
    inits = [joint.posteriors.copy(), np.tile(prior_action, (W.n_y, 1))]
    inits += [rng.dirichlet(np.ones(p.n), size=W.n_y) for _ in range(cfg.restarts - 1)]
    return [np.ascontiguousarray(R) for R in inits]


def _cond_ac(p: Pmf, W: Channel, alpha: float, method: str, cfg: OptimizerConfig):
    beta = 1.0 - 1.0 / alpha
    coeff = alpha / (alpha - 1.0)
    maximize = alpha > 1.0  # of the inner log-sum objective
    if method in ("auto", "closed_form"):
        fp = augustin_fixed_point(p, W, alpha, cfg)
        value = math.exp(fp.value - shannon_entropy(p))
        return value, None, "closed_form", fp.residual
    if method == "optimize":
        best = None
        best_R = None
        worst = 0.0
        for R0 in _joint_eg_inits(p, W, p.probs, cfg):
            R, val, resid, _ = _kernels.ac_eg(
                p.probs, W.matrix, beta, R0, maximize,
                cfg.tolerance, cfg.max_iters, cfg.step_init,
            )
            if best is None or (maximize and val > best) or (not maximize and val < best):
                best, best_R, worst = val, R, resid
        return math.exp(coeff * best), best_R, "optimize", worst
    R, val = oracle_optimize_rule(
        None, p.n, W.n_y, maximize, cfg,
        batch_objective=ac_rule_batch(p.probs, W.matrix, beta),
    )
    return math.exp(coeff * val), R, "oracle", cfg.grid_resolution


def _cond_lp(p: Pmf, W: Channel, alpha: float, method: str, cfg: OptimizerConfig):
    beta = 1.0 - 1.0 / alpha
    qt = alpha / (2.0 * alpha - 1.0)
    maximize = alpha > 1.0
    if method in ("auto", "closed_form"):
        # the passed prior is the tilted one; undo the tilt for the
        # product-divergence route
        p_orig = tilt(p, 1.0 / qt)
        res = lp_alternating(compose_joint(p_orig, W), alpha, cfg)
        value = math.exp(res.value - renyi_entropy(p_orig, qt))
        return value, None, "closed_form", res.residual
    if method == "optimize":
        prior_action = tilt(p, 1.0 / qt).probs
        best = None
        best_R = None
        worst = 0.0
        for R0 in _joint_eg_inits(p, W, prior_action, cfg):
            R, val, resid, _ = _kernels.lp_eg(
                p.probs, W.matrix, beta, qt, R0, maximize,
                cfg.tolerance, cfg.max_iters, cfg.step_init,
            )
            if best is None or (maximize and val > best) or (not maximize and val < best):
                best, best_R, worst = val, R, resid
        return math.exp(best / (1.0 - qt)), best_R, "optimize", worst
    R, val = oracle_optimize_rule(
        None, p.n, W.n_y, maximize, cfg,
        batch_objective=lp_rule_batch(p.probs, W.matrix, beta, qt),
    )
    return math.exp(val / (1.0 - qt)), R, "oracle", cfg.grid_resolution


def _kn_conditional_value(p: Pmf, W: Channel, g: GainFunction,
                          phi: Aggregator, psi: Aggregator, R: np.ndarray) -> float:
    """The defining doubly-aggregated value of a rule (no optimization)."""
    n_x = p.n
    gv = np.empty((W.n_y, n_x))
    for y in range(W.n_y):
        gv[y] = _gain_vector(g, R[y])
    psi_g = np.empty_like(gv)
    for y in range(W.n_y):
        psi_g[y] = _apply(psi.forward, gv[y])
    inner = np.empty(n_x)
    for x in range(n_x):
        live = W.matrix[x] > 0.0  # avoid 0 * (-inf) at boundary rules
        inner[x] = psi.inverse(float((W.matrix[x, live] * psi_g[live, x]).sum()))
    fv = _apply(phi.forward, inner)
    mask = p.probs > 0.0
    return float(phi.inverse(float((p.probs[mask] * fv[mask]).sum())))


def _cond_generic_mixed(p: Pmf, W: Channel, g: GainFunction, phi: Aggregator,
                        psi: Aggregator, sense: str, method: str,
                        cfg: OptimizerConfig):
    """phi != psi without a recognized tuple: optimize the value directly."""
    maximize = sense == "gain"

    def objective_rows(R: np.ndarray) -> float:
        return _kn_conditional_value(p, W, g, phi, psi, R)

    if method == "oracle":
        R, val = oracle_optimize_rule(objective_rows, p.n, W.n_y, maximize, cfg)
        return val, R, "oracle", cfg.grid_resolution
    prior_act = prior_vulnerability(p, g, phi, sense, "auto", cfg).rule
    inits = _joint_eg_inits(p, W, prior_act.probs, cfg)

    def objective(blocks):
        return objective_rows(np.vstack(blocks))

    best = None
    for R0 in inits:
        res_blocks, val, resid, _ = _eg_blocks_run(objective, R0, maximize, cfg)
        if best is None or (maximize and val > best[1]) or (not maximize and val < best[1]):
            best = (res_blocks, val, resid)
    R, val, resid = best
    return val, R, "optimize", resid


def _eg_blocks_run(objective, R0: np.ndarray, maximize: bool, cfg: OptimizerConfig):
    from .optimize import _eg_run

    blocks0 = [np.ascontiguousarray(R0[y]) for y in range(R0.shape[0])]
    blocks, f, resid, _ = _eg_run(
        lambda bs: objective(bs), None, blocks0, maximize,
        cfg.tolerance, cfg.max_iters, cfg.step_init,
    )
    return np.vstack(blocks), f, resid


def cond_vulnerability(p: Pmf, W: Channel, g: GainFunction, phi: Aggregator,
                       psi: Aggregator, sense=None, method: str = "auto",
                       cfg: OptimizerConfig = DEFAULT_CONFIG) -> VulnerabilityResult:
    """Optimal doubly-aggregated gain of a decision rule.

    With matching generators the problem decomposes per observation;
    otherwise it couples them and runs jointly (see module docstring).
    The identity-based closed routes return ``rule=None``.
    """
    if p.labels != W.x_labels:
        raise DimensionMismatch("prior labels do not match channel input labels")
    sense = _resolve(sense, g)
    if phi.matches(psi):
        closed = _cond_closed_same(p, W, g, phi, sense)
        if method in ("auto", "closed_form") and closed is not None:
            value, rows = closed
            return VulnerabilityResult(value=value, rule=_rows_to_rule(p, W, rows),
                                       method="closed_form", residual=0.0)
        if method == "closed_form":
            raise UnsupportedVariant(
                f"no closed form for gain {g.kind!r} with generator {phi.kind!r}"
            )
        run_method = "optimize" if method == "auto" else method
        value, rows, resid = _cond_numeric_same(p, W, g, phi, sense, run_method, cfg)
        return VulnerabilityResult(value=value, rule=_rows_to_rule(p, W, rows),
                                   method=run_method, residual=resid)

    ac_alpha = _detect_ac_tuple(g, phi, psi)
    if ac_alpha is not None and sense == "gain":
        value, rows, used, resid = _cond_ac(p, W, ac_alpha, method, cfg)
        rule = _rows_to_rule(p, W, rows) if rows is not None else None
        return VulnerabilityResult(value=value, rule=rule, method=used, residual=resid)
    lp_alpha = _detect_lp_tuple(g, phi, psi)
    if lp_alpha is not None and sense == "gain":
        value, rows, used, resid = _cond_lp(p, W, lp_alpha, method, cfg)
        rule = _rows_to_rule(p, W, rows) if rows is not None else None
        return VulnerabilityResult(value=value, rule=rule, method=used, residual=resid)

    if method == "closed_form":
        raise UnsupportedVariant(
            "mismatched generators admit no closed form outside the recognized tuples"
        )
    run_method = "optimize" if method == "auto" else method
    value, rows, used, resid = _cond_generic_mixed(p, W, g, phi, psi, sense, run_method, cfg)
    return VulnerabilityResult(value=value, rule=_rows_to_rule(p, W, rows),
                               method=used, residual=resid)


def posterior_vulnerability_hat(p: Pmf, W: Channel, g: GainFunction,
                                phi: Aggregator, psi: Aggregator, sense=None,
                                cfg: OptimizerConfig = DEFAULT_CONFIG) -> float:
    """psi-mean over observations of the per-posterior optimal phi-mean.

    Agrees with ``cond_vulnerability`` when phi = psi; in general the
    two aggregate in different orders and need not coincide.
    """
    sense = _resolve(sense, g)
    joint = compose_joint(p, W)
    ys = np.flatnonzero(joint.y_support)
    vals = np.empty(ys.size)
    for i, y in enumerate(ys):
        pi = make_pmf(joint.posteriors[y], renormalize=True, labels=p.labels)
        vals[i] = prior_vulnerability(pi, g, phi, sense, "auto", cfg).value
    fv = _apply(psi.forward, vals)
    return float(psi.inverse(float((joint.p_y[ys] * fv).sum())))


# ----------------------------------------------------------------------
# leakage
# ----------------------------------------------------------------------

def g_leakage(spec: LeakageSpec, W: Channel, method: str = "auto",
              cfg: OptimizerConfig = DEFAULT_CONFIG) -> float:
    """Multiplicative leakage in nats: log of conditional over prior for
    gains, log of prior over conditional for losses."""
    prior = prior_vulnerability(spec.prior, spec.gain, spec.phi, spec.sense, method, cfg)
    cond = cond_vulnerability(spec.prior, W, spec.gain, spec.phi, spec.psi,
                              spec.sense, method, cfg)
    vp, vc = prior.value, cond.value
    if not np.isfinite(vp) or vp <= 0.0:
        raise DegenerateVulnerability(f"prior vulnerability {vp!r} cannot anchor a ratio")
    if not np.isfinite(vc) or vc <= 0.0:
        raise DegenerateVulnerability(f"conditional vulnerability {vc!r} is degenerate")
    if spec.sense == "gain":
        return math.log(vc / vp)
    return math.log(vp / vc)


def leakage_spec_for(variant, p: Pmf, alpha: float) -> LeakageSpec:
    """The (prior, phi, psi, gain) tuple whose leakage is the given
    order-alpha mutual information."""
    from .qcalc import log_aggregator, q_log_aggregator

    variant = MiVariant(variant)
    if variant is not MiVariant.SHANNON and abs(alpha - 1.0) <= ALPHA_ONE_ATOL:
        variant = MiVariant.SHANNON  # every variant degenerates to the order-1 tuple
    if variant is MiVariant.SHANNON:
        return LeakageSpec(p, log_aggregator(), log_aggregator(), soft01_gain(), "gain")
    if not (alpha > 0.0) or not np.isfinite(alpha):
        raise InvalidOrder(f"alpha must be positive and finite, got {alpha!r}")
    if variant is MiVariant.ARIMOTO:
        agg = q_log_aggregator(1.0 / alpha)
        return LeakageSpec(p, agg, agg, soft01_gain(), "gain")
    if variant is MiVariant.SIBSON:
        agg = q_log_aggregator(1.0 / alpha)
        return LeakageSpec(tilt(p, 1.0 / alpha), agg, agg, soft01_gain(), "gain")
    if variant is MiVariant.AUGUSTIN_CSISZAR:
        return LeakageSpec(p, log_aggregator(), q_log_aggregator(1.0 / alpha),
                           soft01_gain(), "gain")
    if variant is MiVariant.HAYASHI:
        agg = q_log_aggregator(alpha)
        return LeakageSpec(p, agg, agg, power_loss(alpha), "loss")
    if variant is MiVariant.LAPIDOTH_PFISTER:
        if not lp_order_valid(alpha):
            raise InvalidOrder(
                f"the lapidoth_pfister tuple needs alpha in (1/2,1) or (1,inf), got {alpha!r}"
            )
        qt = alpha / (2.0 * alpha - 1.0)
        return LeakageSpec(tilt(p, qt), q_log_aggregator(qt),
                           q_log_aggregator(1.0 / alpha), soft01_gain(), "gain")
    raise UnsupportedVariant(str(variant))


def alpha_mi_via_leakage(variant, p: Pmf, W: Channel, alpha: float = 1.0,
                         method: str = "auto",
                         cfg: OptimizerConfig = DEFAULT_CONFIG) -> float:
    """Order-alpha mutual information computed through its leakage tuple."""
    spec = leakage_spec_for(variant, p, alpha)
    return g_leakage(spec, W, method, cfg)


# ----------------------------------------------------------------------
# risk aversion
# ----------------------------------------------------------------------

def arrow_pratt(alpha: float, r: float, mode: str = "closed") -> float:
    """Absolute risk aversion -g''/g' of the transformed gain at r.

    Closed form 1/(alpha r); ``finite_diff`` recomputes it from central
    differences of the deformed log with step 1e-4.
    """
    if not (alpha > 0.0) or not np.isfinite(alpha):
        raise InvalidOrder(f"alpha must be positive and finite, got {alpha!r}")
    if not (0.0 < r <= 1.0):
        raise DomainError(f"r must lie in (0, 1], got {r!r}")
    if mode == "closed":
        return 1.0 / (alpha * r)
    if mode != "finite_diff":
        raise UnsupportedVariant(f"mode must be 'closed' or 'finite_diff', got {mode!r}")
    h = 1e-4
    if r < 10.0 * h:
        raise DomainError(f"r={r!r} too close to zero for step {h}")
    q = 1.0 / alpha
    gm, g0, gp = q_log(r - h, q), q_log(r, q), q_log(r + h, q)
    d1 = (gp - gm) / (2.0 * h)
    d2 = (gp - 2.0 * g0 + gm) / (h * h)
    return -d2 / d1
