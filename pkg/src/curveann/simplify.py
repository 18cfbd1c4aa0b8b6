"""Greedy minimum-vertex curve simplification under the min-max metric.

A simplification is built by repeatedly covering the longest feasible prefix
of the remaining curve with one ball: a doubling probe finds the scale, a
binary search pins the exact prefix, and an approximate minimum enclosing
ball (AMEB) provides the covering test. The AMEB dichotomy is what makes the
greedy certificate work: if even the (1+eps)-approximate ball exceeds
(1+eps)*r, the exact minimum enclosing ball exceeds r.
"""

import math

import numpy as np

from . import geometry


def approx_meb(points, eps):
    """Approximate minimum enclosing ball, radius <= (1+eps) * optimum.

    Iterative farthest-point scheme: starting from the first input point,
    for ceil(1/eps^2) rounds move the center 1/(i+1) of the way toward the
    farthest point. The returned radius is the exact farthest distance from
    the final center, so the ball always encloses the input.
    """
    pts = geometry.as_points(points)
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    center = pts[0].astype(float).copy()
    if len(pts) > 1:
        # first fraction is 1, so the walk starts at an input point; the
        # remaining ceil(1/eps^2) - 1 shrinking steps give the (1+eps) bound
        for i in range(math.ceil(1.0 / (eps * eps))):
            far = pts[np.argmax(((pts - center) ** 2).sum(axis=1))]
            center += (far - center) / (i + 1)
    radius = float(np.sqrt(((pts - center) ** 2).sum(axis=1).max()))
    return center, radius


def cover_prefix(points, r, eps, meb=approx_meb):
    """Longest certified coverable prefix of ``points``.

    Returns ``(center, s)`` with all of ``points[:s]`` within (1+eps)*r of
    ``center``; if ``s < len(points)``, the exact minimum enclosing ball of
    ``points[:s+1]`` has radius > r. ``meb`` may be swapped for an exact
    oracle (with eps = 0) in tests.
    """
    pts = geometry.as_points(points)
    if r <= 0:
        raise ValueError("r must be positive")
    n = len(pts)
    threshold = (1 + eps) * r

    def coverable(s):
        center, radius = meb(pts[:s], eps) if eps > 0 else meb(pts[:s])
        return (radius <= threshold), center

    lo, lo_center = 1, pts[0].astype(float)
    size = 1
    hi = None
    while True:
        size = min(2 * size, n)
        ok, center = coverable(size)
        if ok:
            lo, lo_center = size, center
            if size == n:
                return lo_center, n
        else:
            hi = size
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, center = coverable(mid)
        if ok:
            lo, lo_center = mid, center
        else:
            hi = mid
    return lo_center, lo


def simplify_curve(points, k, r, eps=1.0, meb=approx_meb):
    """Greedy simplification with at most ``k`` vertices, or None.

    On success the result Pi satisfies d(C, Pi) <= (1+eps)*r under the
    min-max metric (each covered run aligns to its center). A None result
    certifies that every curve with k points lies at distance > r from C:
    the greedy prefix covers are maximal under the AMEB dichotomy.

    ``k=None`` returns the full greedy cover regardless of length.
    """
    pts = geometry.as_points(points)
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    centers = []
    start = 0
    while start < len(pts):
        center, s = cover_prefix(pts[start:], r, eps, meb=meb)
        centers.append(center)
        start += s
        if k is not None and len(centers) > k:
            return None
    return np.asarray(centers)
