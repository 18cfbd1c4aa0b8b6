"""The assembled near-neighbor / range-counting structure for curves.

``CurveIndex`` follows the estimator convention: constructor takes plain
parameters, ``fit`` ingests the curves and freezes the structure, ``query``
/ ``predict`` / ``count`` answer in one dictionary lookup each.

Modes:

* ``nn``    -- near-neighbor: each stored key remembers the first input
               curve whose candidate set produced it.
* ``count`` -- range counting: each stored key counts the input curves
               whose candidate sets produced it.
* ``asym``  -- near-neighbor for short queries of fixed length k: inputs
               are first simplified, candidates are generated within 4r of
               the simplification and filtered to (1 + eps/2) r of the
               original curve.
"""

import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import candidates as candmod
from . import dictionary as dictmod
from . import geometry
from . import grid as gridmod
from . import simplify as simpmod
from .errors import (
    CorruptFile,
    DimensionMismatch,
    FormatError,
    ModeMismatch,
    UnsupportedLength,
)

_REGISTRY_MAGIC = b"REGY"


@dataclass(frozen=True)
class QueryResult:
    match: Optional[str]
    guarantee: float

    @property
    def found(self):
        return self.match is not None


class CurveIndex:
    """Approximate near-neighbor / range-counting index for curves."""

    def __init__(
        self,
        epsilon=1.0,
        r=1.0,
        metric=geometry.DFD,
        mode="nn",
        k=None,
        backend="hash",
        query_lengths=None,
        max_candidates=candmod.DEFAULT_MAX_CANDIDATES,
        threads=1,
    ):
        self.epsilon = epsilon
        self.r = r
        self.metric = metric
        self.mode = mode
        self.k = k
        self.backend = backend
        self.query_lengths = query_lengths
        self.max_candidates = max_candidates
        self.threads = threads

    # -- estimator plumbing -------------------------------------------------

    _PARAM_NAMES = (
        "epsilon", "r", "metric", "mode", "k", "backend",
        "query_lengths", "max_candidates", "threads",
    )

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._PARAM_NAMES}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._PARAM_NAMES:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    @property
    def guarantee(self):
        return (1 + self.epsilon) * self.r

    def _validated(self):
        p = geometry.parse_metric(self.metric)
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.mode not in ("nn", "count", "asym"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "asym":
            if p != geometry.DFD:
                raise ValueError("the asymmetric mode is defined for the min-max metric only")
            if self.k is None or self.k < 1:
                raise ValueError("the asymmetric mode requires k >= 1")
        return p

    # -- build --------------------------------------------------------------

    def fit(self, curves):
        """Build the structure over ``curves`` (a sequence of Curve)."""
        p = self._validated()
        curves = list(curves)
        if not curves:
            raise ValueError("at least one input curve is required")
        dims = {c.dim for c in curves}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed input dimensions {sorted(dims)}")
        ids = [c.id for c in curves]
        if len(set(ids)) != len(ids):
            raise ValueError("curve ids must be unique")
        d = dims.pop()

        self._p = p
        self._d = d
        self.registry_ = {c.id: c for c in curves}
        self._order = list(ids)
        self.simplifications_ = {}
        self.stats_ = {"lookups": 0, "candidates": {}, "dict_sizes": {}, "skipped": []}

        lengths = self._build_lengths(curves)
        self.grids_ = {L: self._grid_for(L) for L in lengths}
        dict_mode = dictmod.MODE_COUNT if self.mode == "count" else dictmod.MODE_NN
        self.dicts_ = {
            L: dictmod.make_dictionary(self.backend, dict_mode, out_len=L, d=d)
            for L in lengths
        }
        self.owners_ = {L: {} for L in lengths} if dict_mode == dictmod.MODE_NN else None

        t0 = time.perf_counter()
        if self.mode == "asym":
            for c in curves:
                pi = simpmod.simplify_curve(c.points, self.k, self.r, eps=1.0)
                if pi is None:
                    self.stats_["skipped"].append(c.id)
                else:
                    self.simplifications_[c.id] = pi

        jobs = [(c, L) for c in curves for L in lengths]
        results = self._enumerate_many(jobs)
        for (c, L), keys in zip(jobs, results):
            if keys is None:
                continue
            self.stats_["candidates"].setdefault(c.id, {})[L] = len(keys)
            self._fold(L, c.id, keys)
        for L in lengths:
            self.stats_["dict_sizes"][L] = len(self.dicts_[L])
        self.stats_["build_seconds"] = time.perf_counter() - t0
        return self

    def _build_lengths(self, curves):
        if self.mode == "asym":
            return [self.k]
        if self.query_lengths is not None:
            lengths = sorted(set(self.query_lengths))
            if any(L < 1 for L in lengths):
                raise ValueError("query lengths must be >= 1")
            return lengths
        if self._p == geometry.DFD:
            return sorted({len(c) for c in curves})
        return [max(len(c) for c in curves)]

    def _grid_for(self, L):
        return gridmod.GridSpec.create(self.epsilon, self.r, self._d, self._p, m_norm=L)

    def _request(self, curve, L):
        """Candidate request for one input curve at query length L, or None."""
        if self.mode == "asym":
            pi = self.simplifications_.get(curve.id)
            if pi is None:
                return None
            return candmod.CandidateRequest(
                anchor=geometry.Curve(curve.id, pi),
                out_len=L,
                enum_radius=4 * self.r,
                grid=self.grids_[L],
                p=self._p,
                filter_curve=curve,
                filter_radius=(1 + self.epsilon / 2) * self.r,
                max_candidates=self.max_candidates,
            )
        return candmod.CandidateRequest(
            anchor=curve,
            out_len=L,
            enum_radius=(1 + self.epsilon / 2) * self.r,
            grid=self.grids_[L],
            p=self._p,
            max_candidates=self.max_candidates,
        )

    def _enumerate_one(self, job):
        curve, L = job
        req = self._request(curve, L)
        if req is None:
            return None
        return candmod.enumerate_candidates(req)

    def _enumerate_many(self, jobs):
        if self.threads and self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(self._enumerate_one, jobs))
        return [self._enumerate_one(job) for job in jobs]

    def _fold(self, L, curve_id, keys):
        dct = self.dicts_[L]
        if self.mode == "count":
            for key in keys:
                dct.increment(key)
        else:
            owners = self.owners_[L]
            for key in keys:
                dct.insert_first_wins(key, curve_id)
                owners.setdefault(key, []).append(curve_id)

    # -- queries ------------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "dicts_"):
            raise RuntimeError("index is not fitted; call fit() first")

    def _snap(self, Q):
        L = len(Q)
        if L not in self.dicts_:
            raise UnsupportedLength(
                f"query length {L} not supported (built for {sorted(self.dicts_)})"
            )
        if Q.dim != self._d:
            raise DimensionMismatch(f"query dimension {Q.dim} != index dimension {self._d}")
        return L, gridmod.snap_curve(Q, self.grids_[L])

    def query(self, Q):
        """One snap and one dictionary lookup; never a false positive."""
        self._check_fitted()
        if self.mode == "count":
            raise ModeMismatch("query() is for near-neighbor modes; use count()")
        L, key = self._snap(Q)
        self.stats_["lookups"] += 1
        return QueryResult(self.dicts_[L].lookup(key), self.guarantee)

    def predict(self, queries):
        return [self.query(Q) for Q in queries]

    def count(self, Q):
        """Stored count at the snapped key; sandwiched between the exact
        counts at radius r and (1 + eps) r."""
        self._check_fitted()
        if self.mode != "count":
            raise ModeMismatch("count() requires the counting mode")
        L, key = self._snap(Q)
        self.stats_["lookups"] += 1
        return self.dicts_[L].lookup(key) or 0

    # -- dynamic updates ----------------------------------------------------

    def insert_curve(self, curve):
        """Add one curve: enumerate its candidate sets and fold them in."""
        self._check_fitted()
        self._ensure_owners()
        if curve.id in self.registry_:
            raise ValueError(f"duplicate curve id {curve.id!r}")
        if curve.dim != self._d:
            raise DimensionMismatch("curve dimension mismatch")
        if self.mode == "asym":
            pi = simpmod.simplify_curve(curve.points, self.k, self.r, eps=1.0)
            if pi is None:
                self.stats_["skipped"].append(curve.id)
            else:
                self.simplifications_[curve.id] = pi
        self.registry_[curve.id] = curve
        self._order.append(curve.id)
        for L in self.dicts_:
            keys = self._enumerate_one((curve, L))
            if keys is not None:
                self._fold(L, curve.id, keys)

    def delete_curve(self, curve_id):
        """Remove one curve, re-deriving its candidate contributions."""
        self._check_fitted()
        self._ensure_owners()
        curve = self.registry_.get(curve_id)
        if curve is None:
            raise KeyError(f"unknown curve id {curve_id!r}")
        for L in self.dicts_:
            keys = self._enumerate_one((curve, L))
            if keys is None:
                continue
            dct = self.dicts_[L]
            if self.mode == "count":
                for key in keys:
                    dct.decrement(key)
            else:
                owners = self.owners_[L]
                for key in keys:
                    lst = owners[key]
                    lst.remove(curve_id)
                    if not lst:
                        del owners[key]
                        dct.remove(key)
                    elif dct.lookup(key) == curve_id:
                        dct.replace(key, lst[0])
        del self.registry_[curve_id]
        self._order.remove(curve_id)
        self.simplifications_.pop(curve_id, None)
        if curve_id in self.stats_["skipped"]:
            self.stats_["skipped"].remove(curve_id)

    # -- persistence --------------------------------------------------------

    def save(self, path):
        """Write all dictionary blocks plus the input-curve registry."""
        self._check_fitted()
        mode_name = {
            "nn": dictmod.MODE_NN,
            "count": dictmod.MODE_COUNT,
            "asym": dictmod.MODE_ASYM,
        }[self.mode]
        with open(path, "wb") as f:
            for L in sorted(self.dicts_):
                header = dictmod.DictHeader(
                    mode=mode_name,
                    p=self._p,
                    epsilon=self.epsilon,
                    r=self.r,
                    d=self._d,
                    out_len=L,
                    edge=self.grids_[L].edge,
                )
                dictmod.write_block(f, header, self.dicts_[L])
            f.write(_REGISTRY_MAGIC)
            f.write(struct.pack("<Q", len(self._order)))
            for cid in self._order:
                curve = self.registry_[cid]
                raw = cid.encode("utf-8")
                f.write(struct.pack("<I", len(raw)) + raw)
                f.write(struct.pack("<II", len(curve), curve.dim))
                f.write(
                    np.ascontiguousarray(curve.points, dtype="<f8").tobytes()
                )

    @classmethod
    def load(cls, path, backend="hash", expect=None):
        """Load a persisted index; ``expect`` may pin epsilon/r/metric."""
        blocks = []
        with open(path, "rb") as f:
            while True:
                peek = f.read(4)
                if len(peek) < 4:
                    raise CorruptFile("missing registry section")
                if peek == _REGISTRY_MAGIC:
                    break
                if peek != dictmod.MAGIC:
                    raise FormatError(f"bad magic {peek!r}")
                f.seek(-4, 1)
                blocks.append(dictmod.read_block(f, backend))
            (n,) = struct.unpack("<Q", dictmod._read_exact(f, 8))
            order = []
            registry = {}
            for _ in range(n):
                (idlen,) = struct.unpack("<I", dictmod._read_exact(f, 4))
                cid = dictmod._read_exact(f, idlen).decode("utf-8")
                m, d = struct.unpack("<II", dictmod._read_exact(f, 8))
                pts = np.frombuffer(
                    dictmod._read_exact(f, 8 * m * d), dtype="<f8"
                ).reshape(m, d)
                order.append(cid)
                registry[cid] = geometry.Curve(cid, pts)
        if not blocks:
            raise FormatError("no dictionary blocks in file")
        h0 = blocks[0][0]
        for h, _ in blocks[1:]:
            if (h.mode, h.p, h.epsilon, h.r, h.d) != (h0.mode, h0.p, h0.epsilon, h0.r, h0.d):
                raise FormatError("inconsistent block headers")
        mode = {"nn": "nn", "count": "count", "asym": "asym"}[h0.mode]
        if expect is not None:
            for name, attr in (("epsilon", "epsilon"), ("r", "r")):
                if name in expect and not math.isclose(expect[name], getattr(h0, attr)):
                    raise FormatError(f"index {name}={getattr(h0, attr)} != expected {expect[name]}")
            if "metric" in expect and geometry.parse_metric(expect["metric"]) != h0.p:
                raise FormatError("metric mismatch between index file and request")

        idx = cls(
            epsilon=h0.epsilon,
            r=h0.r,
            metric=h0.p,
            mode=mode,
            k=h0.out_len if mode == "asym" else None,
            backend=backend,
        )
        idx._p = h0.p
        idx._d = h0.d
        idx.registry_ = registry
        idx._order = order
        idx.simplifications_ = {}
        idx.grids_ = {}
        idx.dicts_ = {}
        for h, dct in blocks:
            idx.grids_[h.out_len] = gridmod.GridSpec(
                edge=h.edge, epsilon=h.epsilon, r=h.r, d=h.d,
                m_norm=h.out_len if h.p != geometry.DFD else 1, p=h.p,
            )
            idx.dicts_[h.out_len] = dct
        idx.owners_ = None if mode == "count" else {L: None for L in idx.dicts_}
        idx.stats_ = {
            "lookups": 0,
            "candidates": {},
            "dict_sizes": {L: len(dct) for L, dct in idx.dicts_.items()},
            "skipped": [],
        }
        return idx

    def _ensure_owners(self):
        """Recompute owner lists after a load (needed for deletions)."""
        if self.owners_ is None:
            return
        if all(v is not None for v in self.owners_.values()):
            return
        if self.mode == "asym":
            for cid in self._order:
                c = self.registry_[cid]
                pi = simpmod.simplify_curve(c.points, self.k, self.r, eps=1.0)
                if pi is not None:
                    self.simplifications_[cid] = pi
                elif cid not in self.stats_["skipped"]:
                    self.stats_["skipped"].append(cid)
        for L in self.dicts_:
            owners = {}
            for cid in self._order:
                keys = self._enumerate_one((self.registry_[cid], L))
                if keys is None:
                    continue
                for key in keys:
                    owners.setdefault(key, []).append(cid)
            self.owners_[L] = owners
