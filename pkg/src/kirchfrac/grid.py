"""Uniform grids over a truncation box and continuous piecewise-(multi)linear fields.

The physical domain Omega is an axis-aligned box, optionally restricted to a
union of its grid cells via ``mask``.  The grid covers a larger box B that
contains Omega; nodal fields in X_0 vanish at every node that is not strictly
inside Omega.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class DomainSpec:
    """Omega (box or union of cells) and the truncation box B around it.

    Parameters
    ----------
    lower, upper : corners of the bounding box of Omega.
    cells : number of grid cells across Omega, per axis.
    dilation : B is Omega dilated about its center by at least this factor,
        rounded outward to whole cells.
    mask : optional flattened (C-order) boolean tuple over the cells of the
        bounding box; ``True`` marks cells belonging to Omega.
    """

    lower: tuple
    upper: tuple
    cells: tuple
    dilation: float = 2.0
    mask: tuple | None = None

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        cells = tuple(int(v) for v in np.atleast_1d(self.cells))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "cells", cells)
        if not (len(lower) == len(upper) == len(cells)):
            raise ValueError("lower, upper and cells must have the same length")
        if len(lower) not in (1, 2):
            raise ValueError("only N = 1 or N = 2 is supported")
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise ValueError("Omega must be a nonempty box (upper > lower)")
        if any(c < 1 for c in cells):
            raise ValueError("need at least one cell per axis")
        if not self.dilation > 1.0:
            raise ValueError("B must strictly contain Omega (dilation > 1)")
        if self.mask is not None:
            m = tuple(bool(v) for v in np.asarray(self.mask).ravel())
            if len(m) != math.prod(cells):
                raise ValueError("mask must have one entry per cell of Omega's bounding box")
            if not any(m):
                raise ValueError("Omega must be nonempty")
            object.__setattr__(self, "mask", m)

    @classmethod
    def interval(cls, a=0.0, b=1.0, cells=16, dilation=2.0):
        return cls((a,), (b,), (cells,), dilation)

    @classmethod
    def square(cls, a=0.0, b=1.0, cells=4, dilation=2.0):
        return cls((a, a), (b, b), (cells, cells), dilation)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @cached_property
    def h(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / np.array(self.cells)

    @cached_property
    def pad(self) -> np.ndarray:
        extra = np.array(self.cells) * (self.dilation - 1.0) / 2.0
        return np.maximum(1, np.ceil(extra - 1e-9)).astype(int)

    @cached_property
    def box_lower(self) -> np.ndarray:
        return np.array(self.lower) - self.pad * self.h

    @cached_property
    def box_upper(self) -> np.ndarray:
        return np.array(self.upper) + self.pad * self.h

    @cached_property
    def box_cells(self) -> tuple:
        return tuple(int(c) for c in np.array(self.cells) + 2 * self.pad)

    @cached_property
    def node_shape(self) -> tuple:
        return tuple(c + 1 for c in self.box_cells)

    @property
    def n_nodes(self) -> int:
        return math.prod(self.node_shape)

    @cached_property
    def axes(self) -> list:
        return [lo + h * np.arange(n) for lo, h, n in zip(self.box_lower, self.h, self.node_shape)]

    @cached_property
    def node_coords(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, N), C-order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def cell_in_omega(self) -> np.ndarray:
        """Boolean array of shape box_cells marking cells inside Omega."""
        inside = np.zeros(self.box_cells, dtype=bool)
        sl = tuple(slice(p, p + c) for p, c in zip(self.pad, self.cells))
        if self.mask is None:
            inside[sl] = True
        else:
            inside[sl] = np.array(self.mask, dtype=bool).reshape(self.cells)
        return inside

    @cached_property
    def cell_corners(self) -> np.ndarray:
        """Lower corners of all cells of B, shape (n_cells, N), C-order."""
        idx = np.indices(self.box_cells).reshape(self.dim, -1).T
        return self.box_lower + idx * self.h

    @cached_property
    def cell_index(self) -> np.ndarray:
        """Integer multi-indices of all cells of B, shape (n_cells, N)."""
        return np.indices(self.box_cells).reshape(self.dim, -1).T

    def _node_cell_count(self):
        # number of Omega cells adjacent to each node
        count = np.zeros(self.node_shape, dtype=int)
        inside = self.cell_in_omega.astype(int)
        for shift in np.ndindex(*(2,) * self.dim):
            sl = tuple(slice(s, s + c) for s, c in zip(shift, self.box_cells))
            count[sl] += inside
        return count

    @cached_property
    def free_mask(self) -> np.ndarray:
        """Nodes whose whole support lies in Omega (the X_0 degrees of freedom)."""
        return self._node_cell_count() == 2 ** self.dim

    @cached_property
    def closure_mask(self) -> np.ndarray:
        """Nodes of the closure of Omega."""
        return self._node_cell_count() > 0

    @cached_property
    def free_index(self) -> np.ndarray:
        return np.flatnonzero(self.free_mask.ravel())

    @property
    def n_free(self) -> int:
        return int(self.free_index.size)

    @cached_property
    def omega_measure(self) -> float:
        return float(self.cell_in_omega.sum() * np.prod(self.h))

    @cached_property
    def truncation_gap(self) -> float:
        """Lower bound on dist(Omega, boundary of B)."""
        return float(np.min(self.pad * self.h))

    def locate(self, points):
        """Multilinear interpolation stencil for points in B.

        Returns ``(nodes, weights)`` each of shape (n, 2**N); ``nodes`` are flat
        node indices.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        rel = (pts - self.box_lower) / self.h
        cell = np.clip(np.floor(rel).astype(int), 0, np.array(self.box_cells) - 1)
        t = rel - cell
        n = pts.shape[0]
        corners = list(np.ndindex(*(2,) * self.dim))
        nodes = np.zeros((n, len(corners)), dtype=np.int64)
        weights = np.ones((n, len(corners)))
        for k, corner in enumerate(corners):
            flat = np.zeros(n, dtype=np.int64)
            for d in range(self.dim):
                idx = cell[:, d] + corner[d]
                flat = flat * self.node_shape[d] + idx
                weights[:, k] *= t[:, d] if corner[d] else 1.0 - t[:, d]
            nodes[:, k] = flat
        return nodes, weights

    def interpolation_matrix(self, points, free_only=False):
        """Sparse matrix mapping nodal values to values at ``points``."""
        nodes, weights = self.locate(points)
        rows = np.repeat(np.arange(nodes.shape[0]), nodes.shape[1])
        cols = nodes.ravel()
        data = weights.ravel()
        if free_only:
            cols, rows, data = self._restrict_to_free(cols, rows, data)
            ncols = self.n_free
        else:
            ncols = self.n_nodes
        return sp.csr_matrix((data, (rows, cols)), shape=(nodes.shape[0], ncols))

    def _restrict_to_free(self, cols, rows, data):
        lookup = np.full(self.n_nodes, -1, dtype=np.int64)
        lookup[self.free_index] = np.arange(self.n_free)
        mapped = lookup[cols]
        keep = mapped >= 0
        return mapped[keep], rows[keep], data[keep]


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """Nodal values of a continuous piecewise-(multi)linear function on the grid of B.

    With ``extended_by_zero`` (the X_0 case) every node not strictly inside
    Omega carries the value 0.  Otherwise the field is an arbitrary function on
    the closure of Omega, used for Lebesgue-space quantities only.
    """

    domain: DomainSpec
    values: np.ndarray
    extended_by_zero: bool = True

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.issubdtype(vals.dtype, np.floating):
            vals = vals.astype(float)
        vals = vals.reshape(self.domain.node_shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        outside = ~(self.domain.free_mask if self.extended_by_zero else self.domain.closure_mask)
        if np.any(vals[outside] != 0):
            raise ValueError("field must vanish at nodes outside Omega")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, domain, extended_by_zero=True):
        return cls(domain, np.zeros(domain.node_shape), extended_by_zero)

    @classmethod
    def from_free(cls, domain, free_values):
        free_values = np.asarray(free_values)
        vals = np.zeros(domain.n_nodes, dtype=np.result_type(free_values.dtype, float))
        vals[domain.free_index] = free_values
        return cls(domain, vals, True)

    @classmethod
    def from_function(cls, domain, func, extended_by_zero=True):
        """Nodal interpolant of ``func(points) -> values`` (points of shape (n, N))."""
        keep = domain.free_mask if extended_by_zero else domain.closure_mask
        vals = np.zeros(domain.n_nodes)
        pts = domain.node_coords[keep.ravel()]
        vals[keep.ravel()] = np.asarray(func(pts), dtype=float).reshape(-1)
        return cls(domain, vals, extended_by_zero)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @property
    def free(self) -> np.ndarray:
        return self.flat[self.domain.free_index]

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def astype(self, dtype):
        return DiscreteField(self.domain, self.values.astype(dtype), self.extended_by_zero)

    def scaled(self, c):
        return DiscreteField(self.domain, c * self.values, self.extended_by_zero)

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scaled(1.0 / c)

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other):
        return DiscreteField(self.domain, self.values + other.values,
                             self.extended_by_zero and other.extended_by_zero)

    def __sub__(self, other):
        return self + (-other)


def random_field(domain, rng, kind="hats", n_hats=3, amplitude=1.0):
    """Random X_0 field.

    ``kind="hats"`` sums a few tent functions with random centers, widths and
    signs; ``kind="nodal"`` draws independent nodal values in [-amplitude, amplitude].
    """
    if kind == "nodal":
        return DiscreteField.from_free(domain, rng.uniform(-amplitude, amplitude, domain.n_free))
    lo = np.array(domain.lower)
    hi = np.array(domain.upper)
    width_max = hi - lo
    centers = rng.uniform(lo, hi, size=(n_hats, domain.dim))
    widths = rng.uniform(0.15, 0.6, size=(n_hats, domain.dim)) * width_max
    amps = rng.uniform(-amplitude, amplitude, size=n_hats)

    def f(pts):
        out = np.zeros(pts.shape[0])
        for c, w, a in zip(centers, widths, amps):
            out += a * np.prod(np.clip(1.0 - np.abs(pts - c) / w, 0.0, None), axis=-1)
        return out

    u = DiscreteField.from_function(domain, f)
    if u.is_zero():
        return random_field(domain, rng, "nodal", amplitude=amplitude)
    return u
