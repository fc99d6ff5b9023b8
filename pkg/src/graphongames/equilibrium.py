"""Nash equilibrium solvers for graphon games.

Two routes are provided for every linear-quadratic instance and must agree:

* a generic projected best-response fixed-point iteration, valid whenever
  the best-response map is a contraction, and
* direct resolvent solves on the kernel's natural partition, valid in the
  interior regime where no strategy bound binds.

First and second derivatives of the equilibrium with respect to the unknown
parameters come from resolvent identities (one extra linear solve per
coordinate), not truncated series, so they are exact at machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergence,
    NotAContraction,
    NotInterior,
    SingularSystem,
    SpectralConditionViolated,
)
from .functionspace import PiecewiseConstantFn
from .game import GameSpec, LQHomogeneous, LQSBM, StrategySet, contraction_margin
from .graphon import Graphon, SBMGraphon

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass
class GraphonEquilibrium:
    """Equilibrium of a graphon game.

    ``strategy`` is the equilibrium profile, ``aggregate`` its image under
    the graphon operator. ``interior`` records whether every strategy value
    keeps a relative distance of 1e-9 from both strategy bounds; derivative
    formulas are only valid in that regime. ``residual`` is the sup-norm
    defect of the fixed-point equation at the returned profile.
    """

    strategy: PiecewiseConstantFn
    aggregate: PiecewiseConstantFn
    interior: bool
    iterations: int
    residual: float


@dataclass
class BlockEquilibrium:
    """Equilibrium of a community game, one value per community."""

    values: np.ndarray
    aggregates: np.ndarray

    def to_piecewise(self, pi) -> PiecewiseConstantFn:
        bounds = np.concatenate([[0.0], np.cumsum(np.asarray(pi, dtype=float))])
        bounds[-1] = 1.0
        return PiecewiseConstantFn(bounds, self.values)


def _check_spectral(coef: float, lam: float):
    if coef * lam >= 1.0:
        raise SpectralConditionViolated(
            f"aggregate coefficient {coef} times lambda_max {lam} is >= 1"
        )


def _require_sbm(g: Graphon) -> SBMGraphon:
    if not isinstance(g, SBMGraphon):
        raise TypeError(
            "a community game needs a block kernel carrying the communities"
        )
    return g


def solve_lq_sbm(q, pi, theta1: float, eta) -> BlockEquilibrium:
    """Interior equilibrium of the community game by a dense K x K solve:
    values = theta1 * (I - diag(eta) Q diag(pi))^{-1} 1."""
    q = np.asarray(q, dtype=float)
    pi = np.asarray(pi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    m = q * pi[None, :]
    root = np.sqrt(pi)
    lam = float(np.linalg.eigvalsh(q * np.outer(root, root)).max())
    _check_spectral(float(np.max(np.abs(eta))), lam)
    v = np.eye(q.shape[0]) - eta[:, None] * m
    try:
        values = np.linalg.solve(v, np.full(q.shape[0], float(theta1)))
    except np.linalg.LinAlgError as exc:  # unreachable under the spectral check
        raise SingularSystem(str(exc)) from exc
    return BlockEquilibrium(values=values, aggregates=m @ values)


def _homogeneous_resolvent(g: Graphon, eta2: float):
    """LU-ready system matrix I - eta2 * A on the natural partition."""
    a = g.operator_matrix()
    return np.eye(a.shape[0]) - eta2 * a, a


def solve_lq_homogeneous(g: Graphon, eta,
                         strategy_set: StrategySet | None = None) -> GraphonEquilibrium:
    """Interior equilibrium of the homogeneous game by a direct linear solve
    on the kernel's natural partition.

    The profile is the resolvent image (I - eta2 W)^{-1} eta1 * 1, the
    scaled Bonacich centrality of each agent position. Intended for interior
    regimes; pass ``strategy_set`` to have the interior flag and residual
    checked against actual bounds.
    """
    eta = np.asarray(eta, dtype=float)
    _check_spectral(abs(float(eta[1])), g.lambda_max())
    system, a = _homogeneous_resolvent(g, float(eta[1]))
    n = a.shape[0]
    s = np.linalg.solve(system, np.full(n, float(eta[0])))
    z = a @ s
    bounds = g.cell_boundaries()
    target = eta[0] + eta[1] * z
    if strategy_set is not None:
        interior = strategy_set.is_interior(s)
        residual = float(np.max(np.abs(s - strategy_set.clamp(target))))
    else:
        interior = True
        residual = float(np.max(np.abs(s - target)))
    return GraphonEquilibrium(
        strategy=PiecewiseConstantFn(bounds, s),
        aggregate=PiecewiseConstantFn(bounds, z),
        interior=interior,
        iterations=0,
        residual=residual,
    )


def solve_best_response(g: Graphon, br, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER,
                        strategy_set: StrategySet | None = None) -> GraphonEquilibrium:
    """Generic best-response iteration on the kernel's natural partition.

    ``br(z, mids)`` maps the per-cell aggregate array and the cell midpoints
    to the per-cell best responses. The caller is responsible for supplying
    a contractive map; the iteration starts from the zero profile and stops
    when the sup-norm change drops below ``tol``.
    """
    bounds = g.cell_boundaries()
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    a = g.operator_matrix()
    s = np.zeros(a.shape[0])
    for it in range(1, max_iter + 1):
        s_new = np.asarray(br(a @ s, mids), dtype=float)
        delta = float(np.max(np.abs(s_new - s)))
        s = s_new
        if delta <= tol:
            break
    else:
        raise NoConvergence(
            f"best-response iteration did not reach tol={tol} in "
            f"{max_iter} iterations"
        )
    z = a @ s
    residual = float(np.max(np.abs(np.asarray(br(z, mids), dtype=float) - s)))
    interior = strategy_set.is_interior(s) if strategy_set is not None else True
    return GraphonEquilibrium(
        strategy=PiecewiseConstantFn(bounds, s),
        aggregate=PiecewiseConstantFn(bounds, z),
        interior=interior,
        iterations=it,
        residual=residual,
    )


def solve_fixed_point(g: Graphon, spec: GameSpec, eta,
                      tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> GraphonEquilibrium:
    """Projected best-response fixed point of a linear-quadratic game.

    Iterates s <- clamp(theta1 + theta2 * (W s)) from the zero profile until
    the sup-norm change is at most ``tol``. Requires a positive contraction
    margin at ``eta``; under that margin the map is a contraction and the
    unique equilibrium is reached from any start.
    """
    margin = contraction_margin(spec, g, eta=eta)
    if margin <= 0.0:
        raise NotAContraction(
            f"contraction margin {margin} is not positive at eta={np.asarray(eta).tolist()}"
        )
    pi = _require_sbm(g).pi if isinstance(spec, LQSBM) else None
    bounds = g.cell_boundaries()
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    th1, th2 = spec.theta_profile(eta, mids, pi=pi)
    lo, hi = spec.strategy_set.lower, spec.strategy_set.upper

    def br(z, _mids):
        return np.clip(th1 + th2 * z, lo, hi)

    eq = solve_best_response(
        g, br, tol=tol, max_iter=max_iter, strategy_set=spec.strategy_set
    )
    return eq


# Array-level closed forms on the natural partition. These are the
# workhorses behind the estimator and the finite-difference checks: they
# solve the unconstrained (interior) system without box or interiority
# checks, which the public wrappers add.

def solve_values(g: Graphon, spec: GameSpec, eta):
    """(strategy values, aggregate values) of the interior equilibrium on
    the kernel's natural partition."""
    eta = np.asarray(eta, dtype=float)
    if isinstance(spec, LQHomogeneous):
        _check_spectral(abs(float(eta[1])), g.lambda_max())
        system, a = _homogeneous_resolvent(g, float(eta[1]))
        s = np.linalg.solve(system, np.full(a.shape[0], float(eta[0])))
        return s, a @ s
    if not isinstance(spec, LQSBM):
        raise TypeError(f"unsupported game spec {type(spec).__name__}")
    sbm = _require_sbm(g)
    block = solve_lq_sbm(sbm.q, sbm.pi, spec.theta1, eta)
    return block.values, block.aggregates


def gradient_values(g: Graphon, spec: GameSpec, eta):
    """(strategy, aggregate, gradient) arrays; gradient has one column per
    parameter coordinate."""
    eta = np.asarray(eta, dtype=float)
    if isinstance(spec, LQHomogeneous):
        _check_spectral(abs(float(eta[1])), g.lambda_max())
        system, a = _homogeneous_resolvent(g, float(eta[1]))
        n = a.shape[0]
        s = np.linalg.solve(system, np.full(n, float(eta[0])))
        z = a @ s
        rhs = np.column_stack([np.ones(n), z])
        grad = np.linalg.solve(system, rhs)
        return s, z, grad
    if not isinstance(spec, LQSBM):
        raise TypeError(f"unsupported game spec {type(spec).__name__}")
    sbm = _require_sbm(g)
    m = sbm.q * sbm.pi[None, :]
    _check_spectral(float(np.max(np.abs(eta))), sbm.lambda_max())
    v = np.eye(m.shape[0]) - eta[:, None] * m
    c = np.linalg.inv(v)
    s = spec.theta1 * c.sum(axis=1)
    z = m @ s
    # d s / d eta_i = z_i * column i of V^{-1}
    grad = c * z[None, :]
    return s, z, grad


def second_derivative_values(g: Graphon, spec: GameSpec, eta):
    """(strategy, aggregate, gradient, hessian) arrays; hessian has shape
    (n_params, n_params, n_cells) and is exactly symmetric in its first two
    axes."""
    eta = np.asarray(eta, dtype=float)
    if isinstance(spec, LQHomogeneous):
        _check_spectral(abs(float(eta[1])), g.lambda_max())
        system, a = _homogeneous_resolvent(g, float(eta[1]))
        n = a.shape[0]
        s = np.linalg.solve(system, np.full(n, float(eta[0])))
        z = a @ s
        grad = np.linalg.solve(system, np.column_stack([np.ones(n), z]))
        second = np.linalg.solve(system, a @ grad)
        hess = np.zeros((2, 2, n))
        hess[0, 1] = hess[1, 0] = second[:, 0]
        hess[1, 1] = 2.0 * second[:, 1]
        return s, z, grad, hess
    if not isinstance(spec, LQSBM):
        raise TypeError(f"unsupported game spec {type(spec).__name__}")
    sbm = _require_sbm(g)
    m = sbm.q * sbm.pi[None, :]
    _check_spectral(float(np.max(np.abs(eta))), sbm.lambda_max())
    k = m.shape[0]
    v = np.eye(k) - eta[:, None] * m
    c = np.linalg.inv(v)
    s = spec.theta1 * c.sum(axis=1)
    z = m @ s
    grad = c * z[None, :]
    mc = m @ c
    hess = np.zeros((k, k, k))
    for i in range(k):
        for j in range(i, k):
            entry = z[j] * mc[i, j] * c[:, i] + z[i] * mc[j, i] * c[:, j]
            hess[i, j] = entry
            hess[j, i] = entry
    return s, z, grad, hess


def _interior_or_raise(spec: GameSpec, s: np.ndarray):
    if not spec.strategy_set.is_interior(s):
        raise NotInterior(
            "equilibrium touches a strategy bound; derivative formulas "
            "are not valid there"
        )


def equilibrium_gradient(g: Graphon, spec: GameSpec, eta) -> list[PiecewiseConstantFn]:
    """Per-coordinate derivative of the equilibrium profile in the unknown
    parameters, one step function per coordinate.

    Homogeneous game: d/d eta1 = (I - eta2 W)^{-1} 1 and d/d eta2 =
    (I - eta2 W)^{-1} W s. Community game: d/d eta_i = V^{-1} B_i s with
    V = I - diag(eta) Q diag(pi) and B_i the i-th row selector of
    Q diag(pi). Refuses at non-interior equilibria.
    """
    s, _, grad = gradient_values(g, spec, eta)
    _interior_or_raise(spec, s)
    bounds = g.cell_boundaries()
    return [PiecewiseConstantFn(bounds, grad[:, i]) for i in range(grad.shape[1])]


def equilibrium_second_derivatives(g: Graphon, spec: GameSpec,
                                   eta) -> list[list[PiecewiseConstantFn]]:
    """Symmetric matrix of second derivatives of the equilibrium profile,
    entry (i, j) a step function. Entries (i, j) and (j, i) are the same
    object. Refuses at non-interior equilibria."""
    s, _, _, hess = second_derivative_values(g, spec, eta)
    _interior_or_raise(spec, s)
    bounds = g.cell_boundaries()
    n = hess.shape[0]
    out: list[list[PiecewiseConstantFn | None]] = [
        [None] * n for _ in range(n)
    ]
    for i in range(n):
        for j in range(i, n):
            fn = PiecewiseConstantFn(bounds, hess[i, j])
            out[i][j] = fn
            out[j][i] = fn
    return out
