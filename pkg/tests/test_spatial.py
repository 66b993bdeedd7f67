import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmls.spatial import build_index, gather_all, gather_neighbors

from oracles import brute_force_neighbors


def test_single_point():
    idx = build_index([[1.0, 2.0, 3.0]])
    nb = gather_neighbors(idx, 0, 1.0, 10)
    assert list(nb.indices) == [0]
    assert nb.distances[0] == 0.0


def test_cube_corners():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    idx = build_index(corners)
    for i in range(8):
        nb = gather_neighbors(idx, i, 1.0, 100)
        assert len(nb) == 4
        assert nb.indices[0] == i
        expected = brute_force_neighbors(corners, i, 1.0, 100)
        np.testing.assert_array_equal(nb.indices, expected)


def test_coincident_points_tie_break():
    pts = np.zeros((10, 3))
    idx = build_index(pts)
    np.testing.assert_array_equal(gather_neighbors(idx, 0, 1.0, 4).indices, [0, 1, 2, 3])
    # the center stays in its own neighborhood even when lower indices tie with it
    np.testing.assert_array_equal(gather_neighbors(idx, 7, 1.0, 4).indices, [7, 0, 1, 2])


def test_cap_keeps_nearest(rng):
    pts = rng.normal(size=(200, 3)) * 0.01
    idx = build_index(pts)
    nb = gather_neighbors(idx, 0, 10.0, 100)
    assert len(nb) == 100
    d = np.linalg.norm(pts - pts[0], axis=1)
    others = np.argsort(d[1:], kind="stable")[:99] + 1
    assert set(nb.indices[1:].tolist()) == set(others.tolist())
    assert np.all(np.diff(nb.distances) >= 0)


def test_isolated_vertex():
    pts = np.array([[0, 0, 0], [5, 0, 0], [5, 1, 0]], dtype=float)
    nb = gather_neighbors(build_index(pts), 0, 2.0, 100)
    assert list(nb.indices) == [0]


def test_boundary_distance_included():
    pts = np.array([[0, 0, 0], [0.5, 0, 0], [0.5000001, 0, 0]])
    nb = gather_neighbors(build_index(pts), 0, 0.5, 10)
    assert list(nb.indices) == [0, 1]


def test_random_cloud_matches_linear_scan(rng):
    pts = rng.uniform(size=(1000, 3))
    idx = build_index(pts)
    for _ in range(40):
        i = int(rng.integers(1000))
        R = float(rng.uniform(0.02, 0.3))
        m = int(rng.integers(1, 80))
        got = gather_neighbors(idx, i, R, m)
        np.testing.assert_array_equal(got.indices, brute_force_neighbors(pts, i, R, m))


def test_gather_all_equals_single_queries(rng):
    pts = rng.uniform(size=(300, 3))
    idx = build_index(pts)
    table = gather_all(idx, 0.15, 12)
    for r in range(0, 300, 7):
        np.testing.assert_array_equal(table.row(r).indices, gather_neighbors(idx, r, 0.15, 12).indices)


def test_workers_do_not_change_result(rng):
    pts = rng.uniform(size=(2000, 3))
    idx = build_index(pts)
    a = gather_all(idx, 0.1, 30, workers=1)
    b = gather_all(idx, 0.1, 30, workers=4)
    np.testing.assert_array_equal(a.offsets, b.offsets)
    np.testing.assert_array_equal(a.indices, b.indices)


def test_errors():
    with pytest.raises(ValueError):
        build_index(np.zeros((0, 3)))
    idx = build_index(np.zeros((2, 3)))
    with pytest.raises(IndexError):
        gather_neighbors(idx, 5, 1.0, 3)
    with pytest.raises(ValueError):
        gather_neighbors(idx, 0, 0.0, 3)
    with pytest.raises(ValueError):
        gather_neighbors(idx, 0, 1.0, 0)


def test_independent_of_insertion_order(rng):
    pts = rng.uniform(size=(400, 3))
    perm = rng.permutation(400)
    a = gather_neighbors(build_index(pts), 0, 0.2, 50)
    inv = np.argsort(perm)
    b = gather_neighbors(build_index(pts[perm]), int(inv[0]), 0.2, 50)
    assert set(a.indices.tolist()) == set(perm[b.indices].tolist())


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), r1=st.floats(0.01, 0.5), dr=st.floats(0.0, 0.5),
       m=st.integers(1, 60))
def test_monotone_in_radius(seed, r1, dr, m):
    pts = np.random.default_rng(seed).uniform(size=(150, 3))
    idx = build_index(pts)
    small = gather_neighbors(idx, 0, r1, m)
    large = gather_neighbors(idx, 0, r1 + dr, m)
    if len(small) < m:
        assert set(small.indices.tolist()) <= set(large.indices.tolist())
    again = gather_neighbors(idx, 0, r1, m)
    np.testing.assert_array_equal(small.indices, again.indices)
