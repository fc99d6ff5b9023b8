"""Least-squares parameter estimation from an observed equilibrium.

The estimator minimizes J(eta) = || observed - s_eta ||_{L2}^2 over a box
of admissible parameters, where s_eta is the model equilibrium at eta. J,
its gradient and its Hessian are all exact integrals of step functions; the
Hessian splits into a gradient outer-product term and a residual-weighted
curvature term and is exposed for diagnostics only.

Optimization is projected gradient descent with monotone Armijo
backtracking, run from a deterministic multistart set (the box center plus
a Halton grid), so the estimate is a pure function of the observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import InfeasibleParameterSet, NoStart, NotInterior
from .functionspace import (
    PiecewiseConstantFn,
    cell_integrals,
    integrate_product,
    l2_distance,
)
from .game import GameSpec, contraction_margin
from .graphon import Graphon
from .equilibrium import (
    equilibrium_gradient,
    equilibrium_second_derivatives,
    gradient_values,
    solve_values,
)


@dataclass
class EstimateOptions:
    """Optimizer knobs. Defaults keep estimation deterministic and well
    inside the resolvent's domain."""

    starts: int = 8              # Halton points, in addition to the box center
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo_c: float = 1e-4
    gtol: float = 1e-9
    max_iter: int = 5000
    margin_buffer: float = 1e-6  # keep the contraction margin at least this
    tie_tol: float = 1e-12
    backtrack_cap: int = 60


@dataclass
class EstimationResult:
    eta_hat: np.ndarray
    objective: float
    gradient_norm: float
    hessian_min_eig: float
    starts: int
    iterations_total: int
    converged: bool


@dataclass
class HessianInfo:
    matrix: np.ndarray
    min_eigenvalue: float


def model_equilibrium_fn(g: Graphon, spec: GameSpec, eta) -> PiecewiseConstantFn:
    """Model equilibrium profile at eta as a step function."""
    s, _ = solve_values(g, spec, eta)
    return PiecewiseConstantFn(g.cell_boundaries(), s)


def objective(observed: PiecewiseConstantFn, g: Graphon, spec: GameSpec,
              eta) -> float:
    """J(eta): squared L2 distance between the observation and the model
    equilibrium, exact on the merged partition."""
    return l2_distance(observed, model_equilibrium_fn(g, spec, eta)) ** 2


def objective_gradient(observed: PiecewiseConstantFn, g: Graphon,
                       spec: GameSpec, eta) -> np.ndarray:
    """Analytic gradient of J: component i is
    -2 * integral of (observed - s_eta) * d s_eta / d eta_i.
    Valid only at interior equilibria."""
    grads = equilibrium_gradient(g, spec, eta)
    residual = observed - model_equilibrium_fn(g, spec, eta)
    return np.array([-2.0 * integrate_product(residual, gi) for gi in grads])


def hessian(observed: PiecewiseConstantFn, g: Graphon, spec: GameSpec,
            eta) -> HessianInfo:
    """Analytic Hessian of J and its minimum eigenvalue.

    H = 2 T1 - 2 T2 where T1 integrates the gradient outer product and T2
    integrates the residual against the second derivatives; T2 vanishes at
    zero residual, leaving the positive semidefinite 2 T1.
    """
    grads = equilibrium_gradient(g, spec, eta)
    seconds = equilibrium_second_derivatives(g, spec, eta)
    residual = observed - model_equilibrium_fn(g, spec, eta)
    n = len(grads)
    h = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            t1 = integrate_product(grads[i], grads[j])
            t2 = integrate_product(residual, seconds[i][j])
            h[i, j] = h[j, i] = 2.0 * (t1 - t2)
    return HessianInfo(matrix=h, min_eigenvalue=float(np.linalg.eigvalsh(h).min()))


class _MomentObjective:
    """Exact J, its gradient, and cancellation-safe J differences via
    per-cell moments of the observation.

    Since both the observation and the model equilibrium are step functions
    and the model lives on the kernel's natural partition with weights w,
    J(eta) = int obs^2 - 2 sum_i a_i s_i + sum_i w_i s_i^2 with
    a_i = int_{cell i} obs. Algebraically identical to the merged-partition
    integral, but one O(n_obs) pass up front instead of per evaluation.

    Line searches compare J at nearby points, where the closed form above
    loses everything to cancellation; :meth:`delta` evaluates the difference
    in the factored form (s' - s) . (-2 a + w (s' + s)), whose rounding
    error shrinks with the step.
    """

    def __init__(self, observed: PiecewiseConstantFn, g: Graphon, spec: GameSpec):
        self.g = g
        self.spec = spec
        bounds = g.cell_boundaries()
        self.weights = g.cell_weights()
        self.obs_cell = cell_integrals(observed, bounds)
        self.obs_sq = integrate_product(observed, observed)

    def solve(self, eta) -> np.ndarray:
        s, _ = solve_values(self.g, self.spec, eta)
        return s

    def value_of(self, s: np.ndarray) -> float:
        # J is a squared distance; cancellation noise near the optimum can
        # round the closed form below zero, so clamp.
        return max(
            float(
                self.obs_sq - 2.0 * np.dot(self.obs_cell, s)
                + np.dot(self.weights, s * s)
            ),
            0.0,
        )

    def solve_with_grad(self, eta):
        s, _, grad = gradient_values(self.g, self.spec, eta)
        cell_residual = self.obs_cell - self.weights * s
        return s, -2.0 * (grad.T @ cell_residual)

    def delta(self, s_new: np.ndarray, s_old: np.ndarray) -> float:
        """J at s_new minus J at s_old, exact up to rounding of the step."""
        ds = s_new - s_old
        return float(
            np.dot(ds, self.weights * (s_new + s_old) - 2.0 * self.obs_cell)
        )


def _projected_descent(problem: _MomentObjective, x0, lo, hi,
                       opts: EstimateOptions):
    """Monotone projected gradient descent with Armijo backtracking.

    The trial step is seeded with a Barzilai-Borwein length from the
    previous accepted step (first iteration uses ``initial_step``), then
    shrunk until the Armijo condition J(proj(x - t g)) - J(x) <= c g.(y - x)
    holds, with the left side evaluated by the cancellation-safe difference.
    Accepted steps never increase J.
    """
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    s, grad = problem.solve_with_grad(x)
    step = opts.initial_step
    iters = 0
    for iters in range(1, opts.max_iter + 1):
        pg = x - np.clip(x - grad, lo, hi)
        pgnorm = float(np.linalg.norm(pg))
        if pgnorm <= opts.gtol:
            return x, problem.value_of(s), pgnorm, iters - 1
        t = step
        accepted = False
        for _ in range(opts.backtrack_cap):
            y = np.clip(x - t * grad, lo, hi)
            d = y - x
            gdot = float(grad @ d)
            if gdot >= 0.0:  # projection left no descent direction
                return x, problem.value_of(s), pgnorm, iters - 1
            s_y = problem.solve(y)
            if problem.delta(s_y, s) <= opts.armijo_c * gdot:
                accepted = True
                break
            t *= opts.shrink
        if not accepted:
            return x, problem.value_of(s), pgnorm, iters - 1
        _, grad_new = problem.solve_with_grad(y)
        sk = y - x
        yk = grad_new - grad
        sy = float(sk @ yk)
        step = float(sk @ sk) / sy if sy > 1e-300 else opts.initial_step
        step = min(max(step, 1e-10), 1e10)
        x, s, grad = y, s_y, grad_new
    pg = x - np.clip(x - grad, lo, hi)
    return x, problem.value_of(s), float(np.linalg.norm(pg)), iters


def _start_points(lo, hi, count: int) -> np.ndarray:
    """Deterministic multistart set: box center plus an unscrambled Halton
    grid scaled into the box."""
    pts = [0.5 * (lo + hi)]
    if count > 0:
        halton = qmc.Halton(d=lo.size, scramble=False).random(count)
        pts.extend(lo + halton * (hi - lo))
    return np.array(pts)


def estimate(observed: PiecewiseConstantFn, g: Graphon, spec: GameSpec,
             options: EstimateOptions | None = None) -> EstimationResult:
    """Minimize J over the parameter box and return the best run.

    Every corner of the box must satisfy the spectral condition. Candidate
    parameters are additionally capped so the contraction margin stays at
    least ``margin_buffer``; line search therefore never requests an
    equilibrium outside the resolvent's domain. Runs are ranked by final J;
    ties within ``tie_tol`` go to the lexicographically smallest parameter.
    """
    opts = options if options is not None else EstimateOptions()
    margin = contraction_margin(spec, g)
    if margin <= 0.0:
        raise InfeasibleParameterSet(
            f"a corner of the parameter box leaves contraction margin {margin}"
        )
    lo = spec.xi.lower.copy()
    hi = spec.xi.upper.copy()
    lam = g.lambda_max()
    if lam > 0.0:
        cap = (1.0 - opts.margin_buffer) / lam
        mask = spec.aggregate_mask()
        hi[mask] = np.minimum(hi[mask], cap)
    if np.any(hi < lo):
        raise NoStart("margin cap empties the parameter box")

    problem = _MomentObjective(observed, g, spec)
    best = None  # (J, eta tuple, eta array, pgnorm)
    total_iters = 0
    starts = _start_points(lo, hi, opts.starts)
    for x0 in starts:
        x, fx, pgnorm, iters = _projected_descent(problem, x0, lo, hi, opts)
        total_iters += iters
        key = tuple(x)
        if (
            best is None
            or fx < best[0] - opts.tie_tol
            or (abs(fx - best[0]) <= opts.tie_tol and key < best[1])
        ):
            best = (fx, key, x, pgnorm)

    fx, _, eta_hat, pgnorm = best
    try:
        min_eig = hessian(observed, g, spec, eta_hat).min_eigenvalue
    except NotInterior:
        min_eig = float("nan")
    return EstimationResult(
        eta_hat=eta_hat,
        objective=fx,
        gradient_norm=pgnorm,
        hessian_min_eig=min_eig,
        starts=len(starts),
        iterations_total=total_iters,
        converged=pgnorm <= opts.gtol,
    )
