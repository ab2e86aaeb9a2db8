import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import path_graph
from drw_pubsub.errors import ParameterError, ParseError
from drw_pubsub.topology import (
    connected_component,
    dump_edge_list,
    dump_positions,
    from_edges,
    from_positions,
    generate_unit_disk,
    load_edge_list,
    neighborhood_of_set,
    neighbors,
)
import oracles


def test_single_node():
    t = generate_unit_disk(1, 0.5, 123)
    assert t.n == 1 and t.edge_count == 0


def test_forced_positions_within_radius():
    t = from_positions([(0, 0), (0, 0.3)], 0.5)
    assert t.edges() == [(0, 1)]


def test_unit_disk_matches_pairwise_scan():
    t = generate_unit_disk(100, 0.15, 42)
    expected = oracles.unit_disk_edges(t.positions, 0.15)
    assert set(t.edges()) == expected
    assert t.edge_count == len(expected)


@pytest.mark.parametrize("n,radius", [(0, 0.1), (-3, 0.1), (10, 0.0), (10, 1.5), (10, -0.2)])
def test_generate_rejects_bad_parameters(n, radius):
    with pytest.raises(ParameterError):
        generate_unit_disk(n, radius, 0)


def test_generation_is_deterministic():
    a = generate_unit_disk(300, 0.1, 9)
    b = generate_unit_disk(300, 0.1, 9)
    assert a.adjacency == b.adjacency
    assert np.array_equal(a.positions, b.positions)
    c = generate_unit_disk(300, 0.1, 10)
    assert not np.array_equal(a.positions, c.positions)


def test_positions_do_not_depend_on_radius():
    a = generate_unit_disk(200, 0.05, 3)
    b = generate_unit_disk(200, 0.12, 3)
    assert np.array_equal(a.positions, b.positions)
    assert set(a.edges()) <= set(b.edges())


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 120), radius=st.floats(0.01, 1.0), seed=st.integers(0, 2**63))
def test_generated_topology_invariants(n, radius, seed):
    t = generate_unit_disk(n, radius, seed)
    assert ((t.positions >= 0) & (t.positions <= 1)).all()
    for a in range(n):
        assert a not in t.adjacency[a]
        for b in t.adjacency[a]:
            assert a in t.adjacency[b]
    assert set(t.edges()) == oracles.unit_disk_edges(t.positions, radius)


def test_load_path_graph():
    t = load_edge_list("0 1\n1 2")
    assert t.n == 3
    assert t.edges() == [(0, 1), (1, 2)]
    assert t.positions is None


def test_load_collapses_symmetric_duplicates():
    t = load_edge_list("0 1\n1 0\n")
    assert t.edges() == [(0, 1)]


def test_load_rejects_self_loop_with_line_number():
    with pytest.raises(ParseError, match="line 2"):
        load_edge_list("0 1\n0 0\n")


@pytest.mark.parametrize("text", ["0 1 2", "a b", "0", "0 -1", "1.5 2"])
def test_load_rejects_malformed_lines(text):
    with pytest.raises(ParseError, match="line 1"):
        load_edge_list(text)


def test_load_comments_and_node_count_hint():
    t = load_edge_list("# nodes 5\n# a comment\n0 1\n\n3 2\n")
    assert t.n == 5
    assert neighbors(t, 4) == frozenset()
    with pytest.raises(ParseError, match="line 2"):
        load_edge_list("# nodes 3\n0 3\n")


def test_edge_list_round_trip_with_positions():
    t = generate_unit_disk(60, 0.2, 5)
    u = load_edge_list(dump_edge_list(t), dump_positions(t))
    assert u.adjacency == t.adjacency
    assert np.array_equal(u.positions, t.positions)


def test_position_file_errors():
    with pytest.raises(ParseError, match="line 1"):
        load_edge_list("0 1", "0 0.5 1.5\n1 0 0\n")
    with pytest.raises(ParseError, match="no position"):
        load_edge_list("0 1", "0 0.5 0.5\n")


def test_neighbors(triangle):
    assert neighbors(triangle, 0) == {1, 2}
    iso = from_edges(2, [])
    assert neighbors(iso, 1) == set()
    with pytest.raises(ParameterError):
        neighbors(triangle, 3)


def test_neighbors_match_distance_filter():
    t = generate_unit_disk(100, 0.15, 1)
    for a in range(t.n):
        expect = {b for b in range(t.n) if b != a and np.hypot(*(t.positions[a] - t.positions[b])) <= 0.15}
        assert neighbors(t, a) == expect


def test_neighborhood_of_set_keeps_members():
    t = path_graph(4)
    assert neighborhood_of_set(t, {0, 1}) == {0, 1, 2}
    assert neighborhood_of_set(t, set()) == set()
    assert neighborhood_of_set(t, {2}) == neighbors(t, 2)


def test_neighborhood_of_set_matches_union_oracle():
    t = generate_unit_disk(150, 0.12, 8)
    gen = np.random.default_rng(0)
    adj = [set(s) for s in t.adjacency]
    for _ in range(20):
        s = set(int(x) for x in gen.choice(t.n, 5, replace=False))
        assert neighborhood_of_set(t, s) == oracles.union_of_neighbors(adj, s)
    with pytest.raises(ParameterError):
        neighborhood_of_set(t, {t.n})


def test_connected_component_small():
    tri = from_edges(3, [(0, 1), (1, 2), (2, 0)])
    assert connected_component(tri, 0) == {0, 1, 2}
    two = from_edges(4, [(0, 1), (2, 3)])
    assert connected_component(two, 0) == {0, 1}


def test_connected_component_matches_union_find():
    t = generate_unit_disk(200, 0.12, 7)
    roots = oracles.union_find_components(t.n, t.edges())
    for a in range(0, t.n, 7):
        assert connected_component(t, a) == {b for b in range(t.n) if roots[b] == roots[a]}
