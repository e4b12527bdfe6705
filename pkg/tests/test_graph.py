import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_two_colorings
from pvbqc.errors import InvalidEdge, InvalidParams, InvalidVertex, NotTwoColorable
from pvbqc.graph import ColoredGraph, build_colored_graph, dump_graph, load_graph, neighbors, parse_graph_spec, standard_graph

C6_EDGES = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1)]


def test_path_coloring():
    g = build_colored_graph(3, [(1, 2), (2, 3)])
    assert g.s1 == {1, 3} and g.s2 == {2}


def test_triangle_rejected():
    with pytest.raises(NotTwoColorable):
        build_colored_graph(3, [(1, 2), (2, 3), (1, 3)])


def test_six_cycle_matches_brute_force():
    g = build_colored_graph(6, C6_EDGES)
    assert (g.s1, g.s2) == ({1, 3, 5}, {2, 4, 6})
    assert (g.s1, g.s2) in brute_two_colorings(6, C6_EDGES)


@pytest.mark.parametrize("edges", [[(1, 1)], [(0, 2)], [(1, 4)], [(1, 2), (2, 1)]])
def test_invalid_edges(edges):
    with pytest.raises(InvalidEdge):
        build_colored_graph(3, edges)


def test_neighbors():
    c6 = standard_graph("even_cycle", 6)
    assert neighbors(c6, 1) == {2, 6}
    assert neighbors(standard_graph("path", 3), 2) == {1, 3}
    assert neighbors(build_colored_graph(2, []), 2) == frozenset()
    with pytest.raises(InvalidVertex):
        neighbors(c6, 7)


def test_standard_graphs():
    assert standard_graph("path", 3) == build_colored_graph(3, [(1, 2), (2, 3)])
    assert standard_graph("even_cycle", 6) == build_colored_graph(6, C6_EDGES)
    grid = standard_graph("grid", 2, 3)
    assert grid.n == 6 and len(grid.edges) == 7
    # checkerboard: (r + c) parity
    parity = {r * 3 + c + 1: (r + c) % 2 for r in range(2) for c in range(3)}
    assert {v for v in grid.s1} in ({v for v, p in parity.items() if p == 0}, {v for v, p in parity.items() if p == 1})
    assert (grid.s1, grid.s2) in brute_two_colorings(6, grid.edges)
    with pytest.raises(InvalidParams):
        standard_graph("even_cycle", 5)
    with pytest.raises(InvalidParams):
        standard_graph("star", 4)


def test_tie_break_and_disconnected():
    # two isolated edges: each component's root side goes to s1
    g = build_colored_graph(4, [(1, 2), (3, 4)])
    assert g.s1 == {1, 3}
    # single vertex with no edges
    assert build_colored_graph(1, []).s1 == {1}


def test_parse_and_file_roundtrip(tmp_path):
    assert parse_graph_spec("grid:2x3") == standard_graph("grid", 2, 3)
    assert parse_graph_spec("cycle:6") == standard_graph("even_cycle", 6)
    path = tmp_path / "g.json"
    dump_graph(standard_graph("path", 4), path)
    assert load_graph(path) == standard_graph("path", 4)
    # a coloring stored in the file is ignored
    rec = {"n": 3, "edges": [[1, 2], [2, 3]], "s1": [2], "s2": [1, 3]}
    path.write_text(json.dumps(rec))
    assert parse_graph_spec(str(path)).s1 == {1, 3}


@st.composite
def bipartite_graphs(draw):
    n = draw(st.integers(1, 10))
    side = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    cross = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if side[i - 1] != side[j - 1]]
    edges = draw(st.lists(st.sampled_from(cross), unique=True)) if cross else []
    return n, edges


@given(bipartite_graphs())
@settings(max_examples=200, deadline=None)
def test_random_bipartite_always_colors(case):
    n, edges = case
    g = build_colored_graph(n, edges)
    assert g.s1 | g.s2 == set(range(1, n + 1)) and not g.s1 & g.s2
    for i, j in edges:
        assert g.color(i) != g.color(j)
        assert j in neighbors(g, i) and i in neighbors(g, j)
    assert build_colored_graph(n, list(reversed(edges))) == g


@given(bipartite_graphs(), st.data())
@settings(max_examples=100, deadline=None)
def test_any_triangle_fails(case, data):
    n, edges = case
    a, b, c = n + 1, n + 2, n + 3
    perm = data.draw(st.permutations([(a, b), (b, c), (a, c)]))
    with pytest.raises(NotTwoColorable):
        build_colored_graph(n + 3, edges + list(perm))


def test_record_roundtrip():
    g = standard_graph("grid", 2, 3)
    assert ColoredGraph.from_record(json.loads(json.dumps(g.to_record()))) == g
