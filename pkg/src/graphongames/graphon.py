"""Interaction kernels on [0, 1]^2 and their integral operators.

Three kernel families are supported: a constant kernel, a block kernel with
K communities (intensity matrix Q, community weights pi), and a kernel given
by an M x M matrix on the uniform grid. All three are piecewise constant on
a product partition, so applying the integral operator to a step function is
exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, OutOfDomain
from .functionspace import PiecewiseConstantFn, cell_integrals


def power_iteration_max_eig(matrix, rtol: float = 1e-10,
                            max_iter: int = 100_000) -> float:
    """Largest eigenvalue of a symmetric nonnegative matrix.

    Power iteration starting from the constant vector, which always overlaps
    the leading eigenvector of a nonnegative kernel. The Rayleigh quotient is
    the eigenvalue estimate; iteration stops when its relative change drops
    below ``rtol``. If the iteration stalls (only plausible when the extreme
    eigenvalues tie in magnitude) the matrix is shifted once by trace/n,
    which keeps eigenvectors and breaks the tie upward; the shift is removed
    from the returned value.
    """
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = float(v @ (a @ v))
    shift = 0.0
    stall_iter = max_iter // 2
    for it in range(1, max_iter + 1):
        w = a @ v + shift * v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam_new = float(v @ (a @ v))
        if abs(lam_new - lam) <= rtol * max(abs(lam_new), 1e-30):
            return lam_new
        lam = lam_new
        if it == stall_iter and shift == 0.0:
            shift = float(np.trace(a)) / n
    raise NoConvergence(
        f"power iteration did not converge within {max_iter} iterations"
    )


class Graphon:
    """Base class: a symmetric measurable kernel W on [0, 1]^2 taking values
    in [0, 1], piecewise constant on the product of a cell partition with
    itself.

    Subclasses provide :meth:`cell_boundaries` (the partition) and
    :meth:`kernel_matrix` (the per-cell-pair kernel values); everything else
    is shared. Instances are treated as immutable.
    """

    def cell_boundaries(self) -> np.ndarray:
        raise NotImplementedError

    def kernel_matrix(self) -> np.ndarray:
        raise NotImplementedError

    def cell_weights(self) -> np.ndarray:
        return np.diff(self.cell_boundaries())

    def operator_matrix(self) -> np.ndarray:
        """Matrix of the integral operator acting on step functions aligned
        with the cell partition: row i is sum_j K_ij * weight_j * f_j."""
        return self.kernel_matrix() * self.cell_weights()[None, :]

    def cell_index(self, x) -> np.ndarray:
        """Cell of each point. Cells are half-open [left, right) with the
        final cell closed, so x = 1 belongs to the last cell."""
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0.0) or np.any(xs > 1.0):
            raise OutOfDomain("kernel argument outside [0, 1]")
        bounds = self.cell_boundaries()
        idx = np.searchsorted(bounds, xs, side="right") - 1
        return np.clip(idx, 0, bounds.size - 2)

    def __call__(self, x, y):
        """Kernel value W(x, y)."""
        val = self.kernel_matrix()[self.cell_index(x), self.cell_index(y)]
        return float(val) if np.ndim(val) == 0 else val

    def pairwise(self, xs, ys) -> np.ndarray:
        """Matrix of kernel values W(xs_i, ys_j)."""
        i = np.atleast_1d(self.cell_index(xs))
        j = np.atleast_1d(self.cell_index(ys))
        return self.kernel_matrix()[i[:, None], j[None, :]]

    def apply(self, f: PiecewiseConstantFn) -> PiecewiseConstantFn:
        """Image of f under the integral operator, x -> integral of
        W(x, y) f(y) dy. Exact for any step function f."""
        bounds = self.cell_boundaries()
        ints = cell_integrals(f, bounds)
        return PiecewiseConstantFn(bounds, self.kernel_matrix() @ ints)

    def lambda_max(self) -> float:
        """Largest eigenvalue of the integral operator.

        Computed on the symmetrized cell matrix sqrt(w_i) K_ij sqrt(w_j),
        which shares the operator's spectrum.
        """
        root_w = np.sqrt(self.cell_weights())
        sym = self.kernel_matrix() * np.outer(root_w, root_w)
        return power_iteration_max_eig(sym)

    def sup_degree(self) -> float:
        """Essential supremum over x of the degree integral of W(x, y) dy."""
        return float(self.operator_matrix().sum(axis=1).max())

    def validate(self) -> list[str]:
        """Check structural invariants; returns a list of violations
        (empty when the kernel is valid). Never raises."""
        problems = []
        k = self.kernel_matrix()
        if not np.array_equal(k, k.T):
            problems.append("asymmetric kernel matrix")
        if k.size and (k.min() < 0.0 or k.max() > 1.0):
            problems.append("kernel values outside [0, 1]")
        return problems


@dataclass
class ConstantGraphon(Graphon):
    """W(x, y) = value everywhere."""

    value: float

    def __post_init__(self):
        self.value = float(self.value)

    def cell_boundaries(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def kernel_matrix(self) -> np.ndarray:
        return np.array([[self.value]])

    def lambda_max(self) -> float:
        return self.value

    def sup_degree(self) -> float:
        return self.value


@dataclass
class SBMGraphon(Graphon):
    """Block kernel: W(x, y) = Q_ij for x in community i, y in community j.

    Community k occupies the interval [sum_{l<k} pi_l, sum_{l<=k} pi_l),
    half-open except for the final community, which is closed at 1.
    """

    q: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("intensity matrix must be square")
        if pi.ndim != 1 or pi.size != q.shape[0]:
            raise ValueError("community weights must match the matrix size")
        self.q = q
        self.pi = pi

    @property
    def n_communities(self) -> int:
        return self.pi.size

    def cell_boundaries(self) -> np.ndarray:
        bounds = np.concatenate([[0.0], np.cumsum(self.pi)])
        bounds[-1] = 1.0
        return bounds

    def cell_weights(self) -> np.ndarray:
        return self.pi

    def kernel_matrix(self) -> np.ndarray:
        return self.q

    def lambda_max(self) -> float:
        # The operator spectrum equals that of Q diag(pi); use the similar
        # symmetric matrix sqrt(pi) Q sqrt(pi) and a dense eigensolve.
        root = np.sqrt(self.pi)
        return float(np.linalg.eigvalsh(self.q * np.outer(root, root)).max())

    def validate(self) -> list[str]:
        problems = super().validate()
        if np.any(self.pi <= 0.0):
            problems.append("community weights must be positive")
        if abs(self.pi.sum() - 1.0) > 1e-12:
            problems.append(
                f"community weights are not a simplex (sum = {self.pi.sum()!r})"
            )
        return problems


@dataclass
class GridGraphon(Graphon):
    """Kernel given by an M x M matrix of values on the uniform M-cell grid."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("grid kernel matrix must be square")
        self.matrix = m

    @property
    def resolution(self) -> int:
        return self.matrix.shape[0]

    def cell_boundaries(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution + 1)

    def kernel_matrix(self) -> np.ndarray:
        return self.matrix

    @classmethod
    def from_csv(cls, path) -> "GridGraphon":
        """Load an M x M comma-separated matrix of kernel values."""
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))

    @classmethod
    def from_kernel(cls, graphon: Graphon, resolution: int = 1000) -> "GridGraphon":
        """Rasterize another kernel by sampling at cell centers. Exact when
        the grid refines the source kernel's partition."""
        centers = (np.arange(resolution) + 0.5) / resolution
        return cls(graphon.pairwise(centers, centers))
