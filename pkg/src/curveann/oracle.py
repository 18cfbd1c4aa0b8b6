"""Brute-force baselines for tests and benchmarking.

Everything here is a deliberately slow linear scan or exhaustive
enumeration built on the distance kernels alone; nothing is shared with the
index, grid, or candidate machinery it is used to check.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import CapacityExceeded

_BRUTE_GUARD = 10**6


@dataclass(frozen=True)
class OracleAnswer:
    nearest_id: str
    nearest_distance: float
    within: tuple  # ids within the probed radius, in input order


def linear_scan_nn(curves, Q, p=geometry.DFD, radius=None):
    """Exact nearest neighbor by full DP distance per curve.

    Ties break toward the earlier-indexed curve. ``radius`` additionally
    collects all ids within that distance.
    """
    if not curves:
        raise ValueError("empty dataset")
    best_id, best_dist = None, None
    within = []
    for c in curves:
        dist = geometry.distance(c, Q, p)
        if best_dist is None or dist < best_dist:
            best_id, best_dist = c.id, dist
        if radius is not None and dist <= radius:
            within.append(c.id)
    return OracleAnswer(best_id, best_dist, tuple(within))


def count_within(curves, Q, p, radius):
    """Number of curves within ``radius`` of the query."""
    return sum(1 for c in curves if geometry.distance(c, Q, p) <= radius)


def brute_candidates(anchor, pool, out_len, radius, p, grid):
    """Cartesian-product enumeration of candidate keys, filtered exactly."""
    if len(pool) ** out_len > _BRUTE_GUARD:
        raise CapacityExceeded(f"{len(pool)}^{out_len} tuples exceed the oracle guard")
    anchor_pts = anchor.points if isinstance(anchor, geometry.Curve) else geometry.as_points(anchor)
    out = set()
    for key in itertools.product(pool, repeat=out_len):
        pts = np.asarray(key, dtype=float) * grid.edge
        if geometry.distance(anchor_pts, pts, p) <= radius:
            out.add(key)
    return out


def exact_meb(points):
    """Exact minimum enclosing ball (Welzl), d <= 3 only."""
    pts = geometry.as_points(points)
    d = pts.shape[1]
    if d > 3:
        raise ValueError("exact_meb supports d <= 3 only")
    unique = np.unique(pts, axis=0)
    center, radius = _welzl(list(unique), [], d)
    # report the tight radius over the actual input
    radius = float(np.sqrt(((pts - center) ** 2).sum(axis=1).max()))
    return center, radius


def _circumball(R):
    if not R:
        return None, -1.0
    p0 = R[0]
    if len(R) == 1:
        return p0.astype(float), 0.0
    M = np.asarray(R[1:], dtype=float) - p0
    G = 2.0 * (M @ M.T)
    h = (M * M).sum(axis=1)
    try:
        lam = np.linalg.solve(G, h)
    except np.linalg.LinAlgError:
        lam, *_ = np.linalg.lstsq(G, h, rcond=None)
    center = p0 + lam @ M
    radius = float(np.linalg.norm(center - p0))
    return center, radius


def _welzl(P, R, d):
    if not P or len(R) == d + 1:
        return _circumball(R)
    p = P[0]
    center, radius = _welzl(P[1:], R, d)
    if center is not None and np.linalg.norm(p - center) <= radius * (1 + 1e-12) + 1e-12:
        return center, radius
    return _welzl(P[1:], R + [p], d)
