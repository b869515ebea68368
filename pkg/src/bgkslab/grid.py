"""Spatial discretization of the slab (0, 1) and gridded temperature profiles."""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_NODES = 64
DEFAULT_GRADING = 2.0


def _graded_map(xi, grading):
    """Symmetric endpoint-graded map of [0,1] onto itself, exponent >= 1."""
    xi = np.asarray(xi, dtype=float)
    lo = 0.5 * (2.0 * xi) ** grading
    hi = 1.0 - 0.5 * (2.0 * (1.0 - xi)) ** grading
    return np.where(xi <= 0.5, lo, hi)


@dataclass(frozen=True)
class SpatialGrid:
    """Interior nodes with cell edges and single-cell quadrature weights.

    Nodes are the graded images of uniform cell midpoints; weights are the
    graded cell widths, so they are positive and sum to one exactly.  The
    grading exponent concentrates cells at both walls, where the density and
    temperature develop square-root/log structure.
    """

    nodes: np.ndarray
    weights: np.ndarray
    edges: np.ndarray = field(repr=False)
    refinement: float = DEFAULT_GRADING

    def __post_init__(self):
        n = len(self.nodes)
        if n < 4:
            raise ValueError("grid needs at least 4 nodes")
        if not (np.all(np.diff(self.nodes) > 0.0)
                and self.nodes[0] > 0.0 and self.nodes[-1] < 1.0):
            raise ValueError("nodes must be strictly increasing inside (0, 1)")
        if not np.all(self.weights > 0.0):
            raise ValueError("weights must be positive")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    @classmethod
    def graded(cls, n=DEFAULT_NODES, grading=DEFAULT_GRADING):
        if grading < 1.0:
            raise ValueError("grading exponent must be >= 1")
        edges = _graded_map(np.arange(n + 1) / n, grading)
        edges[0], edges[-1] = 0.0, 1.0
        nodes = _graded_map((np.arange(n) + 0.5) / n, grading)
        return cls(nodes=nodes, weights=np.diff(edges), edges=edges,
                   refinement=float(grading))

    @property
    def n(self):
        return len(self.nodes)


def hat_pairs(nodes, y):
    """Piecewise-linear interpolation stencil at query points y.

    Returns (idx, w) with shape (len(y), 2): values(y) = sum_k w[:,k] *
    node_values[idx[:,k]].  Outside [nodes[0], nodes[-1]] the end value is
    held constant (same convention as numpy.interp), which keeps all stencil
    weights nonnegative.
    """
    y = np.asarray(y, dtype=float)
    n = len(nodes)
    j = np.clip(np.searchsorted(nodes, y) - 1, 0, n - 2)
    x0, x1 = nodes[j], nodes[j + 1]
    t = np.clip((y - x0) / (x1 - x0), 0.0, 1.0)
    idx = np.stack([j, j + 1], axis=-1)
    w = np.stack([1.0 - t, t], axis=-1)
    return idx, w


def hat_values(nodes, values, y):
    """Evaluate the piecewise-linear interpolant (constant beyond the ends)."""
    return np.interp(np.asarray(y, dtype=float), nodes, values)


@dataclass(frozen=True)
class TemperatureProfile:
    """A temperature field T(x) sampled on a grid, linearly interpolated."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.grid.n:
            raise ValueError("profile length does not match grid")
        if not np.all(self.values > 0.0):
            raise ValueError("temperatures must be positive")

    def __call__(self, y):
        return hat_values(self.grid.nodes, self.values, y)

    @classmethod
    def constant(cls, grid, value):
        return cls(grid=grid, values=np.full(grid.n, float(value)))

    def within_band(self, t_lo, t_hi, slack=0.0):
        """Whether all node values lie in [t_lo - slack, t_hi + slack]."""
        return bool(np.all(self.values >= t_lo - slack)
                    and np.all(self.values <= t_hi + slack))

    def clipped(self, t_lo, t_hi):
        """Profile clamped into [t_lo, t_hi], plus the count of clipped nodes."""
        clipped = np.clip(self.values, t_lo, t_hi)
        n_clipped = int(np.sum(clipped != self.values))
        return TemperatureProfile(grid=self.grid, values=clipped), n_clipped
