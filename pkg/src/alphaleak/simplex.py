"""Finite-distribution algebra: pmfs, channels, joints, decision rules.

All values are immutable after construction (arrays are marked
read-only), so they can be shared freely across threads.  Labels are
opaque strings used only at the I/O boundary; every computation is
index-based.

Zero handling convention: ``0**beta == 0`` for every ``beta > 0``, so
tilting never resurrects a zero-probability symbol, and posteriors are
simply absent for zero-mass observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidOrder,
    NegativeWeight,
    NotNormalized,
    ValidationError,
    ZeroTotal,
)

SUM_ATOL = 1e-9
INTERNAL_ATOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _default_labels(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over a finite labelled alphabet."""

    labels: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise ValidationError("probs must be a nonempty vector")
        if len(self.labels) != probs.size:
            raise DimensionMismatch(
                f"{len(self.labels)} labels for {probs.size} probabilities"
            )
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("labels must be distinct")
        if np.any(probs < 0.0):
            raise NegativeWeight(f"negative entry in {probs!r}")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_ATOL:
            raise NotNormalized(f"probabilities sum to {total!r}")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probs", _readonly(probs))

    @property
    def n(self) -> int:
        return self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def prob(self, label: str) -> float:
        return float(self.probs[self.labels.index(label)])

    def as_array(self) -> np.ndarray:
        return self.probs

    def support(self) -> np.ndarray:
        """Indices of symbols with positive mass."""
        return np.flatnonzero(self.probs > 0.0)


def make_pmf(weights, renormalize: bool = False, labels=None) -> Pmf:
    """Build a Pmf from nonnegative weights.

    With ``renormalize`` the weights are scaled by their total; otherwise
    they must already sum to one within 1e-9.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a nonempty vector")
    if np.any(w < 0.0):
        raise NegativeWeight(f"negative weight in {w!r}")
    total = float(w.sum())
    if total <= 0.0:
        raise ZeroTotal("weights sum to zero")
    if renormalize:
        w = w / total
    elif abs(total - 1.0) > SUM_ATOL:
        raise NotNormalized(f"weights sum to {total!r}; pass renormalize=True")
    if labels is None:
        labels = _default_labels("x", w.size)
    return Pmf(tuple(labels), w)


def uniform_pmf(n: int, labels=None) -> Pmf:
    return make_pmf(np.full(n, 1.0 / n), renormalize=True, labels=labels)


def tilt(p: Pmf, beta: float) -> Pmf:
    """Exponential tilt: result(x) proportional to p(x)**beta.

    Computed in log space; zero entries stay zero.
    """
    if not (beta > 0.0) or not np.isfinite(beta):
        raise InvalidOrder(f"tilt exponent must be positive, got {beta!r}")
    probs = p.probs
    out = np.zeros_like(probs)
    mask = probs > 0.0
    lw = beta * np.log(probs[mask])
    lw -= lw.max()
    w = np.exp(lw)
    out[mask] = w / w.sum()
    return Pmf(p.labels, out)


def p_norm(p: Pmf, beta: float) -> float:
    """(sum_x p(x)**beta)**(1/beta), computed in log space."""
    if not (beta > 0.0) or not np.isfinite(beta):
        raise InvalidOrder(f"norm order must be positive, got {beta!r}")
    probs = p.probs[p.probs > 0.0]
    lp = beta * np.log(probs)
    m = lp.max()
    return float(np.exp((m + np.log(np.exp(lp - m).sum())) / beta))


@dataclass(frozen=True)
class Channel:
    """Row-stochastic kernel from X to Y."""

    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValidationError("channel matrix must be two-dimensional")
        if m.shape != (len(self.x_labels), len(self.y_labels)):
            raise DimensionMismatch(
                f"matrix shape {m.shape} vs labels ({len(self.x_labels)}, {len(self.y_labels)})"
            )
        for i, row in enumerate(m):
            if np.any(row < 0.0):
                raise NegativeWeight(f"negative entry in channel row {i}")
            if abs(float(row.sum()) - 1.0) > SUM_ATOL:
                raise NotNormalized(f"channel row {i} sums to {float(row.sum())!r}")
        object.__setattr__(self, "x_labels", tuple(self.x_labels))
        object.__setattr__(self, "y_labels", tuple(self.y_labels))
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def n_x(self) -> int:
        return len(self.x_labels)

    @property
    def n_y(self) -> int:
        return len(self.y_labels)

    def row(self, x: int) -> Pmf:
        return Pmf(self.y_labels, self.matrix[x])


def make_channel(rows, x_labels=None, y_labels=None, renormalize: bool = False) -> Channel:
    m = np.asarray(rows, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError("channel rows must form a matrix")
    if renormalize:
        totals = m.sum(axis=1, keepdims=True)
        if np.any(totals <= 0.0):
            raise ZeroTotal("channel row sums to zero")
        m = m / totals
    if x_labels is None:
        x_labels = _default_labels("x", m.shape[0])
    if y_labels is None:
        y_labels = _default_labels("y", m.shape[1])
    return Channel(tuple(x_labels), tuple(y_labels), m)


class JointDist:
    """Joint distribution with cached marginals and posterior family.

    Posteriors are defined only for observations with positive marginal
    mass; ``posterior(y)`` returns ``None`` elsewhere and downstream sums
    skip those observations.
    """

    def __init__(self, matrix, x_labels=None, y_labels=None):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValidationError("joint matrix must be two-dimensional")
        if np.any(m < 0.0):
            raise NegativeWeight("negative entry in joint matrix")
        total = float(m.sum())
        if abs(total - 1.0) > SUM_ATOL:
            raise NotNormalized(f"joint mass sums to {total!r}")
        self.x_labels = tuple(x_labels) if x_labels is not None else _default_labels("x", m.shape[0])
        self.y_labels = tuple(y_labels) if y_labels is not None else _default_labels("y", m.shape[1])
        if len(self.x_labels) != m.shape[0] or len(self.y_labels) != m.shape[1]:
            raise DimensionMismatch("labels do not match joint matrix shape")
        self.matrix = _readonly(m)
        self.p_x = _readonly(m.sum(axis=1))
        self.p_y = _readonly(m.sum(axis=0))
        y_support = self.p_y > 0.0
        y_support.setflags(write=False)
        self.y_support = y_support
        post = np.zeros((m.shape[1], m.shape[0]))
        for y in np.flatnonzero(self.p_y > 0.0):
            post[y] = m[:, y] / self.p_y[y]
            s = float(post[y].sum())
            if abs(s - 1.0) > SUM_ATOL:
                raise ValidationError(f"posterior for observation {y} sums to {s!r}")
            post[y] /= s
        self.posteriors = _readonly(post)

    @property
    def n_x(self) -> int:
        return len(self.x_labels)

    @property
    def n_y(self) -> int:
        return len(self.y_labels)

    def marginal_x(self) -> Pmf:
        return make_pmf(self.p_x, renormalize=True, labels=self.x_labels)

    def marginal_y(self) -> Pmf:
        return make_pmf(self.p_y, renormalize=True, labels=self.y_labels)

    def posterior(self, y: int) -> Pmf | None:
        if not self.y_support[y]:
            return None
        return Pmf(self.x_labels, self.posteriors[y])

    def decompose(self) -> tuple[Pmf, Channel]:
        """Recover (p_X, channel); rows for zero-mass x default to uniform."""
        n_x, n_y = self.matrix.shape
        rows = np.full((n_x, n_y), 1.0 / n_y)
        for x in np.flatnonzero(self.p_x > 0.0):
            rows[x] = self.matrix[x] / self.p_x[x]
            rows[x] /= rows[x].sum()
        return (
            make_pmf(self.p_x, renormalize=True, labels=self.x_labels),
            Channel(self.x_labels, self.y_labels, rows),
        )


def compose_joint(p: Pmf, W: Channel) -> JointDist:
    """Joint distribution p(x) * W(y|x)."""
    if p.labels != W.x_labels:
        raise DimensionMismatch(
            f"prior labels {p.labels} do not match channel input labels {W.x_labels}"
        )
    return JointDist(p.probs[:, None] * W.matrix, p.labels, W.y_labels)


def joint_from_matrix(matrix, x_labels=None, y_labels=None) -> JointDist:
    return JointDist(matrix, x_labels, y_labels)


@dataclass(frozen=True)
class DecisionRule:
    """One distribution over X per observation y (the adversary's rule)."""

    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    matrix: np.ndarray  # shape (n_y, n_x); row y is the action taken at y

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape != (len(self.y_labels), len(self.x_labels)):
            raise DimensionMismatch(
                f"rule matrix shape {m.shape} vs ({len(self.y_labels)}, {len(self.x_labels)})"
            )
        for y, row in enumerate(m):
            if np.any(row < 0.0):
                raise NegativeWeight(f"negative entry in rule row {y}")
            if abs(float(row.sum()) - 1.0) > SUM_ATOL:
                raise NotNormalized(f"rule row {y} sums to {float(row.sum())!r}")
        object.__setattr__(self, "x_labels", tuple(self.x_labels))
        object.__setattr__(self, "y_labels", tuple(self.y_labels))
        object.__setattr__(self, "matrix", _readonly(m))

    def action(self, y: int) -> Pmf:
        return Pmf(self.x_labels, self.matrix[y])


def constant_rule(action: Pmf, y_labels) -> DecisionRule:
    """Rule that plays the same action at every observation."""
    m = np.tile(action.probs, (len(tuple(y_labels)), 1))
    return DecisionRule(action.labels, tuple(y_labels), m)
