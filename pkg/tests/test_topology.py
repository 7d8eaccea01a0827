import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tceer.topology import (Position, Topology, deploy, distance, dump_topology, load_topology,
                            one_hop_neighbors)

coord = st.floats(0, 200, allow_nan=False)
point = st.tuples(coord, coord)


def test_deploy_default_field_in_bounds():
    topo = deploy(50, 200, 200, (100, 100), seed=7)
    assert topo.n == 50
    for p in topo.nodes:
        assert 0 <= p.x <= 200 and 0 <= p.y <= 200


def test_deploy_single_node():
    topo = deploy(1, 200, 200, (0, 0), seed=0)
    assert topo.n == 1
    assert topo.base_station == Position(0.0, 0.0)


def test_deploy_replays_identically():
    a = deploy(50, 200, 200, (100, 100), seed=7)
    b = deploy(50, 200, 200, (100, 100), seed=7)
    assert repr(a.nodes) == repr(b.nodes)
    assert deploy(50, 200, 200, (100, 100), seed=8).nodes != a.nodes


def test_deploy_rejects_bad_arguments():
    import pytest
    with pytest.raises(ValueError):
        deploy(0, 200, 200, (0, 0), seed=1)
    with pytest.raises(ValueError):
        deploy(3, 0, 200, (0, 0), seed=1)


def test_distance_examples():
    assert distance((0, 0), (3, 4)) == 5.0
    assert distance((7.5, 2.25), (7.5, 2.25)) == 0.0
    assert abs(distance((0, 0), (1, 1)) - math.sqrt(2)) <= 1e-12


def _pair(gap):
    return Topology((Position(0, 0), Position(gap, 0)), Position(100, 100), 50.0, 200, 200)


def test_pair_within_range_are_mutual_neighbours():
    topo = _pair(10)
    assert one_hop_neighbors(topo, 0) == {1}
    assert one_hop_neighbors(topo, 1) == {0}


def test_pair_out_of_range_has_no_neighbours():
    topo = _pair(60)
    assert one_hop_neighbors(topo, 0) == set()
    assert one_hop_neighbors(topo, 1) == set()


def test_range_boundary_is_inclusive():
    assert one_hop_neighbors(_pair(50), 0) == {1}


def test_node_24_neighbours_match_brute_force():
    topo = deploy(50, 200, 200, (100, 100), seed=7)
    me = topo.nodes[24]
    brute = set()
    for j in range(50):
        if j != 24 and math.sqrt((me.x - topo.nodes[j].x) ** 2 + (me.y - topo.nodes[j].y) ** 2) <= 50:
            brute.add(j)
    assert one_hop_neighbors(topo, 24) == brute
    assert set(topo.neighbor_lists()[24].tolist()) == brute


def test_dump_and_load_round_trip(tmp_path):
    topo = deploy(12, 150, 80, (10, 20), seed=3, radio_range=35)
    path = tmp_path / "t.txt"
    dump_topology(topo, path)
    assert load_topology(path) == topo


def test_load_rejects_missing_header(tmp_path):
    import pytest
    path = tmp_path / "t.txt"
    path.write_text("0,1,2\n")
    with pytest.raises(ValueError):
        load_topology(path)


@given(st.lists(point, min_size=1, max_size=25), st.floats(1, 120))
def test_neighbour_relation_is_symmetric(points, rng_range):
    topo = Topology(tuple(Position(*p) for p in points), Position(100, 100), rng_range, 200, 200)
    nbs = [one_hop_neighbors(topo, i) for i in range(topo.n)]
    for i, nb in enumerate(nbs):
        assert i not in nb
        for j in nb:
            assert i in nbs[j]
    lists = topo.neighbor_lists()
    assert [set(x.tolist()) for x in lists] == nbs


@given(point, point, point)
def test_triangle_inequality(a, b, c):
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9
    assert distance(a, b) == distance(b, a)


@settings(max_examples=30)
@given(st.integers(1, 60), st.floats(1, 500), st.floats(1, 500), st.integers(0, 2**32 - 1))
def test_deploy_is_pure_and_in_bounds(n, w, h, seed):
    a = deploy(n, w, h, (0, 0), seed=seed)
    assert a == deploy(n, w, h, (0, 0), seed=seed)
    xy = a.coords()
    assert np.all((xy[:, 0] >= 0) & (xy[:, 0] <= w) & (xy[:, 1] >= 0) & (xy[:, 1] <= h))
