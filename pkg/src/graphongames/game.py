"""Payoff parametrizations for linear-quadratic network games.

A game couples a compact interval strategy set, a box of admissible
parameter vectors, and a map from the parameter vector to the per-agent
heterogeneity pair (standalone marginal return, aggregate effect).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ParameterOutOfBox
from .graphon import Graphon

# Relative width of the band near each strategy bound inside which an
# equilibrium value counts as touching the bound.
INTERIOR_REL_TOL = 1e-9


@dataclass
class StrategySet:
    """A compact interval of admissible scalar strategies."""

    lower: float
    upper: float

    def __post_init__(self):
        self.lower = float(self.lower)
        self.upper = float(self.upper)
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("strategy bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError("strategy set needs lower < upper")

    @property
    def s_max(self) -> float:
        return max(abs(self.lower), abs(self.upper))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def clamp(self, s):
        return np.clip(s, self.lower, self.upper)

    def is_interior(self, values, rel_tol: float = INTERIOR_REL_TOL) -> bool:
        """True iff every value keeps a distance > rel_tol * width from
        both bounds."""
        vals = np.asarray(values, dtype=float)
        band = rel_tol * self.width
        return bool(
            np.all(vals - self.lower > band) and np.all(self.upper - vals > band)
        )


@dataclass
class ParameterBox:
    """Axis-aligned box of admissible nonnegative parameter vectors."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if np.any(lo < 0.0):
            raise ValueError("parameter box must lie in the nonnegative orthant")
        if not np.all(lo < hi):
            raise ValueError("box needs lower < upper in every coordinate")
        self.lower = lo
        self.upper = hi

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, eta) -> bool:
        e = np.asarray(eta, dtype=float)
        return bool(np.all(e >= self.lower) and np.all(e <= self.upper))

    def contains_interior(self, eta) -> bool:
        e = np.asarray(eta, dtype=float)
        return bool(np.all(e > self.lower) and np.all(e < self.upper))

    def clamp(self, eta) -> np.ndarray:
        return np.clip(np.asarray(eta, dtype=float), self.lower, self.upper)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lower, self.upper))))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))


class GameSpec:
    """Base class for payoff parametrizations; see the two variants below."""

    strategy_set: StrategySet
    xi: ParameterBox

    @property
    def n_params(self) -> int:
        return self.xi.dim

    def aggregate_coefficient(self, eta) -> float:
        """Largest magnitude of the coefficient multiplying the local
        aggregate, for this particular parameter vector."""
        raise NotImplementedError

    def aggregate_mask(self) -> np.ndarray:
        """Boolean mask of the parameter coordinates that multiply the
        local aggregate (and hence enter the spectral condition)."""
        raise NotImplementedError

    def theta_profile(self, eta, points, pi=None):
        """Heterogeneity arrays (theta1, theta2) at given agent positions."""
        raise NotImplementedError


@dataclass
class LQHomogeneous(GameSpec):
    """Two unknown parameters shared by every agent: eta = (standalone
    marginal return, aggregate effect)."""

    strategy_set: StrategySet
    xi: ParameterBox

    def __post_init__(self):
        if self.xi.dim != 2:
            raise ValueError("homogeneous game takes a 2-d parameter box")

    def aggregate_coefficient(self, eta) -> float:
        return abs(float(np.asarray(eta, dtype=float)[1]))

    def aggregate_mask(self) -> np.ndarray:
        return np.array([False, True])

    def theta_profile(self, eta, points, pi=None):
        e = _check_in_box(self.xi, eta)
        n = np.asarray(points, dtype=float).size
        return np.full(n, e[0]), np.full(n, e[1])


@dataclass
class LQSBM(GameSpec):
    """Known homogeneous standalone return theta1 > 0; one unknown aggregate
    effect per community, eta in R_+^K. Requires nonnegative strategies."""

    theta1: float
    strategy_set: StrategySet
    xi: ParameterBox

    def __post_init__(self):
        self.theta1 = float(self.theta1)
        if self.theta1 <= 0.0:
            raise ValueError("theta1 must be positive")
        if self.strategy_set.lower < 0.0:
            raise ValueError("community game requires a nonnegative strategy set")

    def aggregate_coefficient(self, eta) -> float:
        return float(np.max(np.abs(np.asarray(eta, dtype=float))))

    def aggregate_mask(self) -> np.ndarray:
        return np.ones(self.xi.dim, dtype=bool)

    def theta_profile(self, eta, points, pi=None):
        if pi is None:
            raise ValueError("community weights are required for this game")
        e = _check_in_box(self.xi, eta)
        pi = np.asarray(pi, dtype=float)
        if pi.size != e.size:
            raise ValueError("eta and community weights disagree in length")
        pts = np.asarray(points, dtype=float)
        bounds = np.concatenate([[0.0], np.cumsum(pi)])
        bounds[-1] = 1.0
        idx = np.clip(
            np.searchsorted(bounds, pts, side="right") - 1, 0, pi.size - 1
        )
        return np.full(pts.size, self.theta1), e[idx]


def _check_in_box(xi: ParameterBox, eta) -> np.ndarray:
    e = np.asarray(eta, dtype=float)
    if e.shape != (xi.dim,):
        raise ParameterOutOfBox(
            f"expected a parameter vector of length {xi.dim}, got shape {e.shape}"
        )
    if not xi.contains(e):
        raise ParameterOutOfBox(f"parameter {e.tolist()} outside the box")
    return e


def lq_payoff(s: float, z: float, theta) -> float:
    """Quadratic payoff -s^2/2 + (theta1 + theta2 z) s."""
    return -0.5 * s * s + (theta[0] + theta[1] * z) * s


def best_response(z: float, theta, strategy_set: StrategySet) -> float:
    """Maximizer of the quadratic payoff clamped to the strategy interval."""
    return float(strategy_set.clamp(theta[0] + theta[1] * z))


def theta_of_eta(spec: GameSpec, eta, x: float, pi=None):
    """Heterogeneity pair (theta1, theta2) of the agent at position x."""
    t1, t2 = spec.theta_profile(eta, np.asarray([x], dtype=float), pi=pi)
    return float(t1[0]), float(t2[0])


def contraction_margin(spec: GameSpec, g: Graphon, eta=None) -> float:
    """1 minus lambda_max times the largest aggregate coefficient.

    With ``eta`` given, the margin at that parameter; otherwise the worst
    case over the corners of the parameter box, which certifies existence
    and uniqueness of the equilibrium for every admissible parameter. May
    be negative; callers decide what to do with a nonpositive margin.
    """
    lam = g.lambda_max()
    if eta is not None:
        coef = spec.aggregate_coefficient(eta)
    else:
        coef = max(spec.aggregate_coefficient(c) for c in spec.xi.corners())
    return 1.0 - lam * coef
