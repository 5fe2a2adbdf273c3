import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from detent.errors import (
    BadFamily,
    BadParams,
    DegreeBoundExceeded,
    FormatError,
    InvalidVertex,
    NonpositiveWeight,
    SelfLoop,
)
from detent.graph import (
    ball,
    build_graph,
    empty_graph,
    format_graph,
    generate_family,
    incidence_matrix,
    line_graph,
    parse_graph,
    read_graph,
    write_graph,
)


def test_build_rejects_bad_input():
    with pytest.raises(SelfLoop):
        build_graph([(0, 0)], 2)
    with pytest.raises(NonpositiveWeight):
        build_graph([(0, 1, 0.0)], 2)
    with pytest.raises(DegreeBoundExceeded):
        build_graph([(0, 1), (0, 2), (0, 3)], 2)
    with pytest.raises(InvalidVertex):
        build_graph([(0, 5)], 2, vertex_count=3)


def test_parallel_edges_kept():
    g = build_graph([(0, 1), (1, 0)], 2)
    assert g.edge_count == 2
    assert g.degrees.tolist() == [2, 2]
    assert g.edges[1].u == 1  # listed orientation


@pytest.mark.parametrize(
    "name,args,nv,ne",
    [
        ("cycle", (5,), 5, 5),
        ("path", (4,), 4, 3),
        ("complete", (4,), 4, 6),
        ("torus2d", (3, 4), 12, 24),
        ("doubled_star", (3,), 4, 6),
        ("hypercube", (3,), 8, 12),
    ],
)
def test_family_sizes(name, args, nv, ne):
    g = generate_family(name, *args)
    assert (g.vertex_count, g.edge_count) == (nv, ne)
    assert all(u < v for u, v, _ in g.edges)
    assert g.is_connected()


def test_family_errors():
    with pytest.raises(BadFamily):
        generate_family("petersen", 10)
    with pytest.raises(BadParams):
        generate_family("cycle", 2)
    with pytest.raises(BadParams):
        generate_family("random_regular", 7, 3, seed=1)


def test_random_regular_seeded():
    a = generate_family("random_regular", 20, 3, seed=4)
    b = generate_family("random_regular", 20, 3, seed=4)
    assert a == b
    assert set(a.degrees.tolist()) == {3}


def test_doubled_star_has_8_trees():
    g = generate_family("doubled_star", 3)
    h = nx.MultiGraph()
    h.add_edges_from((u, v) for u, v, _ in g.edges)
    assert round(nx.number_of_spanning_trees(h)) == 8


def test_torus_distances_match_networkx():
    g = generate_family("torus2d", 5)
    h = nx.Graph([(u, v) for u, v, _ in g.edges])
    ref = dict(nx.all_pairs_shortest_path_length(h))
    for i in range(g.vertex_count):
        assert [ref[i][j] for j in range(g.vertex_count)] == g.all_distances[i].tolist()


def test_unreachable_is_minus_one():
    g = empty_graph(3)
    assert g.distances_from(0).tolist() == [0, -1, -1]
    assert not g.is_connected()


def test_ball_order_and_radius():
    g = generate_family("cycle", 10)
    b = ball(g, 3, 2)
    assert b.vertex_map[0] == 3
    assert sorted(b.vertex_map) == [1, 2, 3, 4, 5]
    assert list(b.distances) == sorted(b.distances)
    assert b.graph.edge_count == 4
    full = ball(g, 0, 100)
    assert full.size == 10


def test_line_graph_of_star_is_triangle():
    g = generate_family("path", 3)
    lg, emap = line_graph(g)
    assert lg.vertex_count == 2 and lg.edge_count == 1
    k4 = generate_family("complete", 4)
    lk, _ = line_graph(k4)
    assert set(lk.degrees.tolist()) == {4}


def test_incidence_signs():
    g = build_graph([(0, 1, 4.0)], 1)
    a = incidence_matrix(g, weighted=True)
    assert a[:, 0].tolist() == [-2.0, 2.0]
    lap = a @ a.T
    np.testing.assert_allclose(lap, g.laplacian())


def test_text_round_trip(tmp_path):
    g = build_graph([(0, 1, 0.1), (2, 1, 3.0), (0, 2)], 2)
    write_graph(tmp_path / "g.txt", g)
    assert read_graph(tmp_path / "g.txt") == g
    assert parse_graph("# comment\n" + format_graph(g)) == g


@pytest.mark.parametrize(
    "text,offset",
    [
        ("graf 2 1\n0 1\n", 0),
        ("graph 2 1\n0 x\n", 10),
        ("graph 2 1\n0 1\n1 0\n", 14),
        ("graph 2 1\n0 1 -1\n", 10),
    ],
)
def test_parse_errors_report_offset(text, offset):
    with pytest.raises(FormatError) as exc:
        parse_graph(text)
    assert exc.value.offset == offset


def test_missing_file_is_format_error(tmp_path):
    with pytest.raises(OSError):
        read_graph(tmp_path / "nope")


@st.composite
def small_graphs(draw):
    n = draw(st.integers(2, 7))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1]),
                          max_size=12))
    weights = draw(st.lists(st.floats(0.1, 10.0), min_size=len(pairs), max_size=len(pairs)))
    return n, [(u, v, w) for (u, v), w in zip(pairs, weights)]


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_round_trip_property(data):
    n, edges = data
    g = build_graph(edges, degree_bound=max(1, 2 * len(edges)), vertex_count=n)
    assert parse_graph(format_graph(g)) == g
    assert int(g.degrees.sum()) == 2 * g.edge_count
    assert math.isclose(float(g.weighted_degrees.sum()), 2 * sum(w for _, _, w in edges))
