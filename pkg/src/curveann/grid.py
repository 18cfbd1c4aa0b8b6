"""Uniform grid discretization: snapping, lattice keys, and ball enumeration.

The grid origin is the coordinate origin and the edge length is derived from
the approximation parameters: ``eps*r/sqrt(d)`` for the min-max metric and
``eps*r/((2*m_norm)**(1/p) * sqrt(d))`` for finite p.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import DimensionMismatch

# Lattice coordinates are kept within signed-64-bit-safe territory.
_COORD_LIMIT = 2**62


@dataclass(frozen=True)
class GridSpec:
    edge: float
    epsilon: float
    r: float
    d: int
    m_norm: int
    p: float

    def __post_init__(self):
        if self.edge <= 0:
            raise ValueError("grid edge must be positive")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.d < 1 or self.m_norm < 1:
            raise ValueError("d and m_norm must be >= 1")

    @classmethod
    def create(cls, epsilon, r, d, p=geometry.DFD, m_norm=1):
        p = geometry.check_p(p)
        if p == geometry.DFD:
            edge = epsilon * r / math.sqrt(d)
        else:
            edge = epsilon * r / ((2 * m_norm) ** (1.0 / p) * math.sqrt(d))
        return cls(edge=edge, epsilon=epsilon, r=r, d=d, m_norm=m_norm, p=p)


def snap_point(x, grid):
    """Nearest lattice point, per coordinate, rounding half toward +inf."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (grid.d,):
        raise DimensionMismatch(f"point has shape {x.shape}, grid is {grid.d}-dim")
    out = []
    for c in x:
        if abs(c) > grid.edge * _COORD_LIMIT:
            raise ValueError("coordinate too large for this grid edge")
        out.append(math.floor(c / grid.edge + 0.5))
    return tuple(out)


def snap_curve(C, grid):
    """Per-vertex snap; returns a lattice curve key (tuple of lattice points)."""
    pts = C.points if isinstance(C, geometry.Curve) else geometry.as_points(C)
    return tuple(snap_point(v, grid) for v in pts)


def lattice_to_point(z, grid):
    """Physical position of a lattice point."""
    return np.asarray(z, dtype=float) * grid.edge


def key_to_points(key, grid):
    """Physical (m, d) array for a lattice curve key."""
    return np.asarray(key, dtype=float) * grid.edge


def grid_points_in_ball(center, radius, grid):
    """All lattice points within Euclidean ``radius`` of ``center``.

    Scans the bounding box with per-axis pruning on the remaining squared
    budget; output is in lexicographic order.
    """
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.shape != (grid.d,):
        raise DimensionMismatch(f"center has shape {c.shape}, grid is {grid.d}-dim")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    edge = grid.edge
    out = []
    point = [0] * grid.d

    def rec(axis, budget):
        cc = c[axis]
        half = math.sqrt(budget)
        lo = math.ceil((cc - half) / edge)
        hi = math.floor((cc + half) / edge)
        last = axis == grid.d - 1
        for z in range(lo, hi + 1):
            delta = z * edge - cc
            rem = budget - delta * delta
            if rem < 0:
                continue
            point[axis] = z
            if last:
                out.append(tuple(point))
            else:
                rec(axis + 1, rem)

    rec(0, radius * radius)
    return out
