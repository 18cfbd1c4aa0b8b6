"""Approximate near-neighbor search and range counting for polygonal curves.

A grid-bucketing structure: every input curve contributes the full set of
nearby grid curves to a dictionary, so a query is answered by snapping its
vertices to the grid and performing a single lookup. Supports the min-max
(discrete Frechet) metric, min-sum (DTW), and the general finite-p family,
plus a short-query variant via greedy curve simplification.
"""

from .errors import (
    CapacityExceeded,
    CorruptFile,
    CurveAnnError,
    DimensionMismatch,
    FormatError,
    InvalidAlignment,
    ModeMismatch,
    ParseError,
    UnsupportedLength,
)
from .geometry import DFD, DTW, Curve, alignment_cost, distance, enumerate_alignments, parse_metric
from .grid import GridSpec, grid_points_in_ball, snap_curve, snap_point
from .candidates import CandidateRequest, enumerate_candidates, vertex_pool
from .dictionary import HashedDictionary, PrefixTreeDictionary, make_dictionary
from .simplify import approx_meb, cover_prefix, simplify_curve
from .index import CurveIndex, QueryResult

__all__ = [
    "CapacityExceeded",
    "CorruptFile",
    "CurveAnnError",
    "DimensionMismatch",
    "FormatError",
    "InvalidAlignment",
    "ModeMismatch",
    "ParseError",
    "UnsupportedLength",
    "DFD",
    "DTW",
    "Curve",
    "alignment_cost",
    "distance",
    "enumerate_alignments",
    "parse_metric",
    "GridSpec",
    "grid_points_in_ball",
    "snap_curve",
    "snap_point",
    "CandidateRequest",
    "enumerate_candidates",
    "vertex_pool",
    "HashedDictionary",
    "PrefixTreeDictionary",
    "make_dictionary",
    "approx_meb",
    "cover_prefix",
    "simplify_curve",
    "CurveIndex",
    "QueryResult",
]

__version__ = "0.1.0"
