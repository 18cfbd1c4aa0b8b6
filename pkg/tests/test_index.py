import math

import numpy as np
import pytest

from curveann import CurveIndex, geometry, grid, oracle
from curveann.errors import DimensionMismatch, ModeMismatch, UnsupportedLength

Curve = geometry.Curve


def walk(rng, m, d, r=1.0, spread=4.0):
    start = rng.uniform(-spread * r, spread * r, size=d)
    if m == 1:
        return start[None]
    steps = rng.uniform(-1.5 * r, 1.5 * r, size=(m - 1, d))
    return np.vstack([start, start + np.cumsum(steps, axis=0)])


def dataset(rng, n, m, d, r=1.0):
    return [Curve(f"c{i}", walk(rng, m, d, r)) for i in range(n)]


def test_build_example_single_point_curve():
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit([Curve("only", [[0.0]])])
    dct = idx.dicts_[1]
    assert sorted(k for k, _ in dct.items()) == [((-1,),), ((0,),), ((1,),)]
    assert all(payload == "only" for _, payload in dct.items())


def test_first_wins_on_identical_curves():
    curves = [Curve("first", [[0.0], [1.0]]), Curve("second", [[0.0], [1.0]])]
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit(curves)
    assert all(payload == "first" for _, payload in idx.dicts_[2].items())


def test_counting_on_identical_curves():
    curves = [Curve("a", [[0.0], [1.0]]), Curve("b", [[0.0], [1.0]])]
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, mode="count").fit(curves)
    assert all(payload == 2 for _, payload in idx.dicts_[2].items())
    assert idx.count(Curve("q", [[0.0], [1.0]])) == 2


def test_query_examples():
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit([Curve("only", [[0.0]])])
    assert idx.query(Curve("q", [[0.3]])).match == "only"
    assert not idx.query(Curve("q", [[2.6]])).found
    res = idx.query(Curve("q", [[0.0]]))
    assert res.found and res.guarantee == 2.0


def test_count_soundness_directions():
    curves = [Curve("near", [[0.5]]), Curve("far", [[40.0]])]
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, mode="count").fit(curves)
    assert idx.count(Curve("q", [[0.0]])) == 1
    assert idx.count(Curve("q", [[20.0]])) == 0


def test_mode_and_length_errors():
    idx = CurveIndex(epsilon=1.0, r=1.0).fit([Curve("a", [[0.0], [1.0]])])
    with pytest.raises(ModeMismatch):
        idx.count(Curve("q", [[0.0], [1.0]]))
    with pytest.raises(UnsupportedLength):
        idx.query(Curve("q", [[0.0], [1.0], [2.0]]))
    with pytest.raises(DimensionMismatch):
        idx.query(Curve("q", [[0.0, 0.0], [1.0, 1.0]]))


def test_param_validation():
    with pytest.raises(ValueError):
        CurveIndex(epsilon=0.0).fit([Curve("a", [[0.0]])])
    with pytest.raises(ValueError):
        CurveIndex(r=-1.0).fit([Curve("a", [[0.0]])])
    with pytest.raises(ValueError):
        CurveIndex(mode="asym", metric=1.0, k=2).fit([Curve("a", [[0.0]])])
    with pytest.raises(ValueError):
        CurveIndex(mode="asym", metric=math.inf).fit([Curve("a", [[0.0]])])


def test_get_set_params():
    idx = CurveIndex(epsilon=0.5, r=2.0)
    params = idx.get_params()
    assert params["epsilon"] == 0.5 and params["r"] == 2.0
    idx.set_params(epsilon=1.0)
    assert idx.epsilon == 1.0
    with pytest.raises(ValueError):
        idx.set_params(bogus=1)


def test_every_stored_key_satisfies_the_predicate():
    rng = np.random.default_rng(71)
    curves = dataset(rng, 6, 3, 1)
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit(curves)
    g = idx.grids_[3]
    threshold = 1.5  # (1 + eps/2) r
    for key, payload in idx.dicts_[3].items():
        pts = grid.key_to_points(key, g)
        assert geometry.distance(idx.registry_[payload].points, pts, math.inf) <= threshold


@pytest.mark.parametrize("p", [math.inf, 1.0, 2.0])
def test_end_to_end_vs_oracle(p):
    """Completeness and soundness against the linear-scan oracle."""
    rng = np.random.default_rng(72)
    r, eps = 1.0, 1.0
    curves = dataset(rng, 12, 3, 1, r)
    idx = CurveIndex(epsilon=eps, r=r, metric=p).fit(curves)
    for j in range(120):
        if j % 2 == 0:
            base = curves[int(rng.integers(len(curves)))].points
            q = Curve(f"q{j}", base + rng.uniform(-0.2, 0.2, size=base.shape))
        else:
            q = Curve(f"q{j}", rng.uniform(-30, 30, size=(3, 1)))
        res = idx.query(q)
        truth = oracle.linear_scan_nn(curves, q, p)
        if truth.nearest_distance <= r:
            assert res.found, f"missed a true neighbor at {truth.nearest_distance}"
        if res.found:
            assert geometry.distance(idx.registry_[res.match].points, q.points, p) <= (1 + eps) * r + 1e-9


def test_counting_sandwich_vs_oracle():
    rng = np.random.default_rng(73)
    r, eps = 1.0, 1.0
    curves = dataset(rng, 12, 2, 1, r)
    idx = CurveIndex(epsilon=eps, r=r, metric=1.0, mode="count").fit(curves)
    for j in range(100):
        base = curves[int(rng.integers(len(curves)))].points
        q = Curve(f"q{j}", base + rng.uniform(-0.6, 0.6, size=base.shape))
        got = idx.count(q)
        lo = oracle.count_within(curves, q, 1.0, r)
        hi = oracle.count_within(curves, q, 1.0, (1 + eps) * r)
        assert lo <= got <= hi


def test_multiple_query_lengths_for_dfd():
    rng = np.random.default_rng(74)
    curves = [Curve("s", walk(rng, 2, 1)), Curve("l", walk(rng, 4, 1))]
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit(curves)
    assert sorted(idx.dicts_) == [2, 4]
    assert idx.query(Curve("q", curves[0].points)).found
    assert idx.query(Curve("q", curves[1].points)).found


def test_explicit_query_lengths():
    rng = np.random.default_rng(75)
    curves = dataset(rng, 4, 3, 1)
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, query_lengths=[1, 2, 3]).fit(curves)
    assert sorted(idx.dicts_) == [1, 2, 3]
    # a short query hits when it stays near one input curve
    q = Curve("q", curves[0].points[:2])
    res = idx.query(q)
    if res.found:
        assert geometry.distance(idx.registry_[res.match].points, q.points, math.inf) <= 2.0 + 1e-9


def test_asymmetric_mode():
    pts = np.array([[0.0], [0.1], [0.2], [5.0], [5.1], [5.2]])
    curves = [Curve("good", pts), Curve("far", pts + 100.0)]
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, mode="asym", k=2).fit(curves)
    for cid, pi in idx.simplifications_.items():
        assert geometry.distance(idx.registry_[cid].points, pi, math.inf) <= 2.0
    res = idx.query(Curve("q", [[0.05], [5.05]]))
    assert res.match == "good"


def test_asymmetric_skips_unsimplifiable_curves():
    spread = np.arange(0.0, 24.0, 3.0).reshape(-1, 1)
    tight = np.zeros((8, 1))
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, mode="asym", k=2).fit(
        [Curve("wide", spread), Curve("tight", tight)]
    )
    assert idx.stats_["skipped"] == ["wide"]
    assert idx.query(Curve("q", [[0.0], [0.0]])).match == "tight"


def test_one_lookup_per_query():
    rng = np.random.default_rng(76)
    curves = dataset(rng, 5, 2, 1)
    idx = CurveIndex(epsilon=1.0, r=1.0).fit(curves)
    before = idx.stats_["lookups"]
    for j in range(25):
        idx.query(Curve(f"q{j}", rng.uniform(-5, 5, size=(2, 1))))
    assert idx.stats_["lookups"] == before + 25


def test_insert_then_delete_restores_empty():
    idx = CurveIndex(epsilon=1.0, r=1.0).fit([Curve("seed", [[50.0]])])
    idx.delete_curve("seed")
    assert len(idx.dicts_[1]) == 0
    idx.insert_curve(Curve("a", [[0.0]]))
    assert idx.query(Curve("q", [[0.0]])).match == "a"
    idx.delete_curve("a")
    assert len(idx.dicts_[1]) == 0


def test_counting_insert_twice_delete_once():
    base = Curve("a", [[0.0], [1.0]])
    idx = CurveIndex(epsilon=1.0, r=1.0, mode="count").fit([base])
    single = dict(idx.dicts_[2].items())
    idx.insert_curve(Curve("b", [[0.0], [1.0]]))
    idx.delete_curve("b")
    assert dict(idx.dicts_[2].items()) == single


def test_delete_reassigns_overlapping_keys():
    a = Curve("a", [[0.0], [1.0]])
    b = Curve("b", [[0.1], [1.1]])
    idx = CurveIndex(epsilon=1.0, r=1.0).fit([a, b])
    idx.delete_curve("a")
    rebuilt = CurveIndex(epsilon=1.0, r=1.0).fit([b])
    assert dict(idx.dicts_[2].items()) == dict(rebuilt.dicts_[2].items())


def test_dynamic_interleaving_matches_fresh_build():
    """Counting mode: arbitrary insert/delete order equals a fresh build."""
    rng = np.random.default_rng(77)
    pool = dataset(rng, 8, 2, 1)
    idx = CurveIndex(epsilon=1.0, r=1.0, mode="count").fit(pool[:4])
    idx.insert_curve(pool[4])
    idx.delete_curve("c1")
    idx.insert_curve(pool[5])
    idx.delete_curve("c4")
    survivors = [pool[0], pool[2], pool[3], pool[5]]
    fresh = CurveIndex(epsilon=1.0, r=1.0, mode="count").fit(survivors)
    assert dict(idx.dicts_[2].items()) == dict(fresh.dicts_[2].items())


def test_dynamic_nn_payloads_stay_valid():
    rng = np.random.default_rng(78)
    pool = dataset(rng, 8, 2, 1)
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit(pool[:5])
    idx.delete_curve("c2")
    idx.insert_curve(pool[6])
    g = idx.grids_[2]
    for key, payload in idx.dicts_[2].items():
        pts = grid.key_to_points(key, g)
        assert geometry.distance(idx.registry_[payload].points, pts, math.inf) <= 1.5 + 1e-12


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(79)
    curves = dataset(rng, 6, 3, 2)
    idx = CurveIndex(epsilon=0.5, r=1.0, metric=math.inf).fit(curves)
    path = tmp_path / "idx.annc"
    idx.save(path)
    loaded = CurveIndex.load(path)
    assert sorted(loaded.dicts_) == sorted(idx.dicts_)
    for L in idx.dicts_:
        assert loaded.dicts_[L].items() == idx.dicts_[L].items()
    assert set(loaded.registry_) == set(idx.registry_)
    q = Curve("q", curves[0].points)
    assert loaded.query(q).match == idx.query(q).match


def test_load_with_param_expectations(tmp_path):
    idx = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf).fit([Curve("a", [[0.0]])])
    path = tmp_path / "idx.annc"
    idx.save(path)
    CurveIndex.load(path, expect={"epsilon": 1.0, "r": 1.0, "metric": "dfd"})
    from curveann.errors import FormatError

    with pytest.raises(FormatError):
        CurveIndex.load(path, expect={"epsilon": 0.5})
    with pytest.raises(FormatError):
        CurveIndex.load(path, expect={"metric": "dtw"})


def test_dynamic_updates_after_load(tmp_path):
    rng = np.random.default_rng(80)
    curves = dataset(rng, 4, 2, 1)
    idx = CurveIndex(epsilon=1.0, r=1.0).fit(curves)
    path = tmp_path / "idx.annc"
    idx.save(path)
    loaded = CurveIndex.load(path)
    loaded.delete_curve("c0")
    loaded.insert_curve(Curve("new", walk(rng, 2, 1)))
    fresh = CurveIndex(epsilon=1.0, r=1.0).fit(
        [curves[1], curves[2], curves[3], loaded.registry_["new"]]
    )
    got = {k for k, _ in loaded.dicts_[2].items()}
    want = {k for k, _ in fresh.dicts_[2].items()}
    assert got == want


def test_parallel_build_matches_serial():
    rng = np.random.default_rng(81)
    curves = dataset(rng, 8, 3, 1)
    serial = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, threads=1).fit(curves)
    parallel = CurveIndex(epsilon=1.0, r=1.0, metric=math.inf, threads=4).fit(curves)
    assert serial.dicts_[3].items() == parallel.dicts_[3].items()
