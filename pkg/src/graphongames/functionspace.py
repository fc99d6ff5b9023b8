"""Piecewise-constant functions on [0, 1] with exact integration.

Every function this library manipulates (block equilibria, interpolated
network equilibria, local aggregates) is a step function, so L2 distances
and inner products are computed exactly on the merged partition of the two
operands instead of by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyVector, MalformedPartition, OutOfDomain

# Absolute tolerance for coalescing near-duplicate breakpoints when merging
# partitions; guards against floating-point duplication when, for example,
# community boundaries coincide with grid points.
MERGE_TOL = 1e-12


@dataclass
class PiecewiseConstantFn:
    """A right-continuous step function on [0, 1].

    ``values[j]`` is the value on ``[breakpoints[j], breakpoints[j+1])``.
    The point x = 1 takes the last interval's value; this measure-zero
    convention has no effect on integrals and is fixed for determinism.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise MalformedPartition("need at least two breakpoints")
        if not np.all(np.isfinite(bp)):
            raise MalformedPartition("breakpoints must be finite")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise MalformedPartition(
                f"partition must span [0, 1], got [{bp[0]}, {bp[-1]}]"
            )
        if not np.all(np.diff(bp) > 0.0):
            raise MalformedPartition("breakpoints must be strictly increasing")
        if vals.ndim != 1 or vals.size != bp.size - 1:
            raise MalformedPartition(
                f"expected {bp.size - 1} values, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise MalformedPartition("values must be finite")
        self.breakpoints = bp
        self.values = vals

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstantFn":
        return cls(np.array([0.0, 1.0]), np.array([float(value)]))

    @property
    def n_pieces(self) -> int:
        return self.values.size

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0.0) or np.any(xs > 1.0):
            raise OutOfDomain("evaluation point outside [0, 1]")
        idx = np.searchsorted(self.breakpoints, xs, side="right") - 1
        idx = np.clip(idx, 0, self.values.size - 1)
        out = self.values[idx]
        return float(out) if out.ndim == 0 else out

    def resample(self, breakpoints: np.ndarray) -> np.ndarray:
        """Values of this function on the cells of a refining partition.

        Cells are identified by their midpoints, so the result is exact
        whenever ``breakpoints`` refines this function's partition up to
        ``MERGE_TOL``.
        """
        mids = 0.5 * (breakpoints[:-1] + breakpoints[1:])
        idx = np.searchsorted(self.breakpoints, mids, side="right") - 1
        return self.values[np.clip(idx, 0, self.values.size - 1)]

    def integral(self) -> float:
        """Exact value of the integral over [0, 1]."""
        return float(np.dot(np.diff(self.breakpoints), self.values))

    def l2_norm(self) -> float:
        return float(
            np.sqrt(np.dot(np.diff(self.breakpoints), self.values**2))
        )

    # Pointwise arithmetic on the merged partition. Scalars broadcast.

    def _combine(self, other, op) -> "PiecewiseConstantFn":
        if isinstance(other, PiecewiseConstantFn):
            grid = merge_breakpoints(self, other)
            return PiecewiseConstantFn(
                grid, op(self.resample(grid), other.resample(grid))
            )
        return PiecewiseConstantFn(
            self.breakpoints, op(self.values, float(other))
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    def __radd__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return (-self)._combine(other, np.add)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    def __rmul__(self, other):
        return self._combine(other, np.multiply)

    def __neg__(self):
        return PiecewiseConstantFn(self.breakpoints, -self.values)


def make_piecewise(breakpoints, values) -> PiecewiseConstantFn:
    """Validated construction of a step function from raw sequences."""
    return PiecewiseConstantFn(breakpoints, values)


def interpolate_equilibrium(s) -> PiecewiseConstantFn:
    """Embed a length-N strategy vector as a step function on the regular
    grid {i/N}, assigning each entry equal weight 1/N."""
    vals = np.asarray(s, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise EmptyVector("need at least one strategy entry")
    return PiecewiseConstantFn(np.linspace(0.0, 1.0, vals.size + 1), vals)


def _merge_sorted(points: np.ndarray) -> np.ndarray:
    """Coalesce near-duplicates (within MERGE_TOL) in a sorted point set and
    pin the endpoints to exactly 0 and 1."""
    keep = np.empty(points.size, dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(points) > MERGE_TOL
    merged = points[keep].copy()
    merged[0] = 0.0
    merged[-1] = 1.0
    return merged


def merge_breakpoints(f: PiecewiseConstantFn, g: PiecewiseConstantFn) -> np.ndarray:
    """Common refinement of two partitions."""
    return _merge_sorted(np.union1d(f.breakpoints, g.breakpoints))


def integrate_product(f: PiecewiseConstantFn, g: PiecewiseConstantFn) -> float:
    """Exact inner product: the integral of f(x) g(x) over [0, 1]."""
    grid = merge_breakpoints(f, g)
    return float(
        np.dot(np.diff(grid) * f.resample(grid), g.resample(grid))
    )


def l2_distance(f: PiecewiseConstantFn, g: PiecewiseConstantFn) -> float:
    """Exact L2 distance sqrt(integral of (f - g)^2)."""
    grid = merge_breakpoints(f, g)
    diff = f.resample(grid) - g.resample(grid)
    return float(np.sqrt(np.dot(np.diff(grid), diff * diff)))


def sup_distance(f: PiecewiseConstantFn, g: PiecewiseConstantFn) -> float:
    """Sup-norm distance, exact for step functions."""
    grid = merge_breakpoints(f, g)
    return float(np.max(np.abs(f.resample(grid) - g.resample(grid))))


def cell_integrals(f: PiecewiseConstantFn, boundaries: np.ndarray) -> np.ndarray:
    """Exact integrals of f over each cell of a partition of [0, 1].

    ``boundaries`` must be an increasing array starting at 0 and ending at 1;
    it need not be related to f's own breakpoints.
    """
    grid = _merge_sorted(np.union1d(f.breakpoints, boundaries))
    widths = np.diff(grid)
    vals = f.resample(grid)
    mids = 0.5 * (grid[:-1] + grid[1:])
    idx = np.searchsorted(boundaries, mids, side="right") - 1
    idx = np.clip(idx, 0, boundaries.size - 2)
    return np.bincount(idx, weights=widths * vals, minlength=boundaries.size - 1)
