import io
import random

import pytest

from discfreq.graph import (
    FAMILIES,
    Graph,
    GraphFormatError,
    ball,
    default_rho,
    dumps,
    generate,
    load_graph,
    loads,
)


def test_cycle_generator_shape():
    g = generate("cycle", n=12)
    assert (g.n, g.m, g.d_max) == (12, 12, 2)
    assert all(g.degree(v) == 2 for v in range(12))


def test_grid_generator_degrees():
    g = generate("grid", w=8, h=8)
    assert g.n == 64 and g.m == 2 * 8 * 7 and g.d_max == 4
    degrees = sorted(g.degree(v) for v in range(g.n))
    assert degrees.count(2) == 4 and degrees.count(3) == 24 and degrees.count(4) == 36


def test_triangles_and_tree():
    t = generate("disjoint_triangles", m=5)
    assert (t.n, t.m) == (15, 15)
    b = generate("binary_tree", n=7)
    assert b.m == 6 and b.neighbours(0) == (1, 2)


def test_capped_complete_graph_respects_degree_bound():
    g = generate("complete_graph_capped", n=4, d_max=5)
    assert g.d_max == 5 and g.m == 6
    with pytest.raises(ValueError):
        generate("complete_graph_capped", n=10, d_max=3)


@pytest.mark.parametrize("kwargs", [{"family": "grid", "w": 0, "h": 3}, {"family": "cycle", "n": 2},
                                    {"family": "nope", "n": 3}, {"family": "grid", "w": 3, "h": 3, "d_max": 3}])
def test_generator_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        generate(**kwargs)


@pytest.mark.parametrize("family", FAMILIES)
def test_text_round_trip(family):
    kw = {"grid": {"w": 3, "h": 4}, "disjoint_triangles": {"m": 3}, "complete_graph_capped": {"n": 4, "d_max": 3}}
    g = generate(family, **kw.get(family, {"n": 9}))
    assert loads(dumps(g)) == g
    assert load_graph(io.StringIO(dumps(g))) == g


def test_parser_reports_line_numbers():
    with pytest.raises(GraphFormatError) as err:
        loads("3 2 2\n0: 1\n1: 0 2\n2: 0\n")
    assert err.value.line is not None
    with pytest.raises(GraphFormatError, match="self-loop"):
        loads("2 2 1\n0: 0 1\n1: 0\n")
    with pytest.raises(GraphFormatError, match="degree"):
        loads("4 1 2\n0: 1 2\n1: 0\n2: 0\n3:\n")


def test_parser_ignores_comments_and_relabels_sparse_ids():
    g = loads("# comment\n\n3 1 1\n10: 20\n20: 10\n30:\n")
    assert g.n == 3 and g.m == 1 and g.neighbours(0) == (1,)


def test_graph_constructor_validation():
    with pytest.raises(ValueError):
        Graph([[1], []])  # asymmetric
    with pytest.raises(ValueError):
        Graph([[1, 1], [0, 0]])  # parallel edge
    with pytest.raises(IndexError):
        Graph([[]]).neighbours(1)


def test_counters_charge_each_call():
    g = generate("path", n=4)
    g.neighbours(1)
    g.neighbours(1)
    g.degree(0)
    g.sample_vertex(random.Random(0))
    assert g.counter.snapshot() == {"neighbour_queries": 2, "degree_queries": 1, "vertex_samples": 1}
    g.counter.reset()
    assert g.counter.neighbour_queries == 0


def test_ball_expands_only_interior_vertices():
    g = generate("path", n=10)
    g.counter.reset()
    assert ball(g, 5, 2) == {3, 4, 5, 6, 7}
    assert g.counter.neighbour_queries == 3
    assert ball(g, 0, 0) == {0}


def test_default_rho():
    assert default_rho("cycle", 0.5) == 2
    assert default_rho("grid", 0.5) == 16
    assert default_rho("disjoint_triangles", 0.01) == 3
    with pytest.raises(ValueError):
        default_rho("complete_graph_capped", 0.5)
