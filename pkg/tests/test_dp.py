import math

import numpy as np
import pytest

from breathseg.dp import boundaries_to_track, candidate_range, segment, SegmentationResult
from breathseg.errors import InfeasibleError
from breathseg.preprocess import EnergySignal
from breathseg.triangle import triangle_cost, triangle_template

from oracles import exhaustive_segmentation


def _ed(values, rate=10.0):
    return EnergySignal(np.asarray(values, dtype=float), rate, 0.1, 1 / rate)


def test_candidate_range_examples():
    assert candidate_range(1, 10, 0.3, 100) == range(7, 14)
    assert candidate_range(3, 10, 0.3, 25) == range(21, 25)
    assert candidate_range(1, 10, 0.99, 5) == range(1, 5)
    assert len(candidate_range(5, 10, 0.3, 20)) == 0


def _two_triangles():
    x = [triangle_template(0, 3, 6, 4.0, k) for k in range(6)]
    x += [triangle_template(6, 9, 12, 2.0, k) for k in range(6, 13)]
    return x


def test_exact_two_triangle_train():
    res = segment(_ed(_two_triangles()), P=2, d=6, delta=0.3)
    assert res.boundaries_frames == (0, 6, 12)
    assert res.total_cost == pytest.approx(0.0, abs=1e-20)


def test_single_phase():
    x = np.random.default_rng(1).uniform(0, 1, 17)
    res = segment(_ed(x), P=1, d=17, delta=0.3)
    assert res.boundaries_frames == (0, 16)
    assert res.total_cost == pytest.approx(triangle_cost(x, 0, 16))


def _instances(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        P = int(rng.integers(1, 4))
        M = int(rng.integers(2 * P + 2, 31))
        x = rng.uniform(0, 1, M + 1)
        yield x, P, (M + 1) / P


@pytest.mark.parametrize("case", list(enumerate(_instances(25, 7))), ids=lambda c: f"case{c[0]}")
def test_matches_exhaustive(case):
    _, (x, P, d) = case
    expected = exhaustive_segmentation(list(x), P, d, 0.3)
    if expected is None:
        with pytest.raises(InfeasibleError):
            segment(_ed(x), P, d, 0.3)
        return
    res = segment(_ed(x), P, d, 0.3)
    assert res.boundaries_frames == expected[0]
    assert res.total_cost == pytest.approx(expected[1], rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_path_properties(seed):
    rng = np.random.default_rng(seed)
    P = int(rng.integers(2, 7))
    d = float(rng.uniform(5, 15))
    M = int(round(P * d)) - 1
    x = rng.uniform(0, 3, M + 1)
    res, tables = segment(_ed(x), P, d, 0.3, return_tables=True)
    b = res.boundaries_frames
    assert b[0] == 0 and b[-1] == M and len(b) == P + 1
    assert all(q - p >= 2 for p, q in zip(b[:-1], b[1:]))
    acc = [tables.O[k][b[k]] for k in range(1, P + 1)]
    assert all(a2 >= a1 for a1, a2 in zip(acc[:-1], acc[1:]))
    assert acc[-1] == pytest.approx(res.total_cost, rel=1e-9)
    recomputed = math.fsum(triangle_cost(x, p, q) for p, q in zip(b[:-1], b[1:]))
    assert recomputed == pytest.approx(res.total_cost, rel=1e-9)
    for k in range(2, P + 1):
        for pred in tables.I[k].values():
            assert pred in candidate_range(k - 1, d, 0.3, M)
    assert segment(_ed(x), P, d, 0.3) == res


def test_infeasible_geometry():
    with pytest.raises(InfeasibleError, match="phase"):
        segment(_ed(np.ones(5)), P=3, d=2, delta=0.3)
    with pytest.raises(InfeasibleError, match="phase 2"):
        # only n_2 = 3 is admissible, leaving one frame for the last phase
        segment(_ed(np.ones(5)), P=2, d=4, delta=0.1)
    with pytest.raises(InfeasibleError, match="phase 1"):
        segment(_ed(np.ones(40)), P=4, d=1.5, delta=0.3)


def test_track_conversion():
    res = SegmentationResult((0, 5, 10), 10.0, 0.0, 2, 5.0, 0.3)
    track = boundaries_to_track(res, "inhale")
    assert [(p.start_s, p.end_s, p.label) for p in track.phases] == [
        (0.0, 0.5, "inhale"),
        (0.5, 1.0, "exhale"),
    ]
    one = boundaries_to_track(SegmentationResult((0, 9), 10.0, 0.0, 1, 9.0, 0.3))
    assert len(one) == 1
    three = boundaries_to_track(SegmentationResult((0, 5, 10, 15), 10.0, 0.0, 3, 5.0, 0.3), "exhale")
    assert [p.label for p in three.phases] == ["exhale", "inhale", "exhale"]
