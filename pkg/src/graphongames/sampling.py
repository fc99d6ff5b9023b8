"""Random network generation from a kernel and finite-game equilibria.

Randomness contract
-------------------
All draws come from numpy's counter-based Philox generator keyed by a
``SeedSequence``. For a given seed the draw order is fixed:

1. the N agent labels, as one uniform block, then sorted ascending;
2. the N(N-1)/2 edge uniforms, as one block, consumed in row-major
   upper-triangle order (pairs (0,1), (0,2), ..., (N-2,N-1)).

This makes a sampled network a pure function of (kernel, N, seed),
bit-identical across platforms and thread counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotAContraction
from .functionspace import PiecewiseConstantFn, interpolate_equilibrium
from .game import GameSpec, LQSBM
from .graphon import Graphon, power_iteration_max_eig

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass
class SampledNetwork:
    """A 0-1 network drawn from a kernel.

    ``labels`` are the sorted agent positions in [0, 1]; ``adjacency`` is
    the symmetric hollow 0-1 matrix; ``seed`` is the integer the generator
    was keyed with (None for networks read back from files).
    """

    labels: np.ndarray
    adjacency: np.ndarray
    seed: int | None

    @property
    def n_agents(self) -> int:
        return self.labels.size


@dataclass
class NetworkEquilibrium:
    """Equilibrium of a finite network game."""

    strategies: np.ndarray
    aggregates: np.ndarray
    interior: bool
    iterations: int
    residual: float


def sample_network(g: Graphon, n: int, seed: int) -> SampledNetwork:
    """Draw an n-agent network: uniform labels, then an edge between each
    pair (i, j), i < j, with probability W(t_i, t_j)."""
    if n < 1:
        raise ValueError("need at least one agent")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    labels = np.sort(rng.random(n))
    probs = g.pairwise(labels, labels)
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(iu.size)
    edges = (draws < probs[iu, ju]).astype(np.int8)
    adjacency = np.zeros((n, n), dtype=np.int8)
    adjacency[iu, ju] = edges
    adjacency[ju, iu] = edges
    return SampledNetwork(labels=labels, adjacency=adjacency, seed=int(seed))


def _network_thetas(net: SampledNetwork, spec: GameSpec, eta, pi):
    if isinstance(spec, LQSBM) and pi is None:
        raise ValueError("community weights are required for this game")
    return spec.theta_profile(eta, net.labels, pi=pi)


def network_spectral_radius(net: SampledNetwork, rtol: float = 1e-8) -> float:
    """Largest eigenvalue of the scaled adjacency P/N, by power iteration."""
    p = net.adjacency.astype(float)
    return power_iteration_max_eig(p, rtol=rtol) / net.n_agents


def solve_network_game(net: SampledNetwork, spec: GameSpec, eta,
                       tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER,
                       pi=None, method: str = "iterate") -> NetworkEquilibrium:
    """Equilibrium of the finite game on a sampled network.

    Agent i's heterogeneity is the game's pair at position t_i. With
    ``method="iterate"`` the projected best response
    s <- clamp(theta1 + theta2 * (P s) / N) is iterated from zero to
    sup-norm tolerance ``tol``; with ``method="direct"`` the interior linear
    system (I - diag(theta2) P / N) s = theta1 is solved instead. The two
    agree (to 10 * tol) whenever no strategy bound binds.
    """
    th1, th2 = _network_thetas(net, spec, eta, pi)
    n = net.n_agents
    radius = network_spectral_radius(net)
    margin = 1.0 - float(np.max(np.abs(th2))) * radius
    if margin <= 0.0:
        raise NotAContraction(
            f"scaled network spectral radius leaves margin {margin}"
        )
    p = net.adjacency.astype(float)
    lo, hi = spec.strategy_set.lower, spec.strategy_set.upper
    if method == "direct":
        system = np.eye(n) - (th2[:, None] / n) * p
        s = np.linalg.solve(system, th1)
        iterations = 0
    elif method == "iterate":
        s = np.zeros(n)
        for iterations in range(1, max_iter + 1):
            s_new = np.clip(th1 + th2 * (p @ s) / n, lo, hi)
            delta = float(np.max(np.abs(s_new - s)))
            s = s_new
            if delta <= tol:
                break
        else:
            raise NoConvergence(
                f"network best-response iteration did not reach tol={tol}"
            )
    else:
        raise ValueError(f"unknown method {method!r}")
    z = p @ s / n
    residual = float(np.max(np.abs(s - np.clip(th1 + th2 * z, lo, hi))))
    return NetworkEquilibrium(
        strategies=s,
        aggregates=z,
        interior=spec.strategy_set.is_interior(s),
        iterations=iterations,
        residual=residual,
    )


def observe(net: SampledNetwork, eq: NetworkEquilibrium) -> PiecewiseConstantFn:
    """The observation a planner works with: the equilibrium vector embedded
    as a step function on the regular grid, agents in label-sorted order."""
    return interpolate_equilibrium(eq.strategies)


def write_network(net: SampledNetwork, edges_path, labels_path) -> None:
    """Export for debugging and cross-implementation comparison: an edge
    list ("i j" per line, 0-indexed, i < j) and one label per line."""
    iu, ju = np.triu_indices(net.n_agents, k=1)
    mask = net.adjacency[iu, ju] > 0
    with open(edges_path, "w", newline="\n") as fh:
        for i, j in zip(iu[mask], ju[mask]):
            fh.write(f"{i} {j}\n")
    with open(labels_path, "w", newline="\n") as fh:
        for t in net.labels:
            fh.write(f"{t:.17g}\n")


def read_network(edges_path, labels_path) -> SampledNetwork:
    labels = np.atleast_1d(np.loadtxt(labels_path, dtype=float))
    n = labels.size
    adjacency = np.zeros((n, n), dtype=np.int8)
    with open(edges_path) as fh:
        text = fh.read().split()
    if text:
        pairs = np.array(text, dtype=int).reshape(-1, 2)
        adjacency[pairs[:, 0], pairs[:, 1]] = 1
        adjacency[pairs[:, 1], pairs[:, 0]] = 1
    return SampledNetwork(labels=labels, adjacency=adjacency, seed=None)
