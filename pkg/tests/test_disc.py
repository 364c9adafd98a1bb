import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discfreq.canonical import canonical_bytes
from discfreq.disc import (
    DiscKey,
    DiscTooLargeError,
    FrequencyVector,
    RootedDisc,
    canonical_key,
    disc_type_count_bound,
    enumerate_disc_types,
    exact_frequency_vector,
    extract_disc,
    l1_distance,
)
from discfreq.graph import Graph, generate


def _key(n, edges, root=0):
    return canonical_key(RootedDisc.from_edges(n, edges, root))


def test_path_and_cycle_vectors():
    p5 = exact_frequency_vector(generate("path", n=5), 1)
    c8 = exact_frequency_vector(generate("cycle", n=8), 1)
    assert sorted(p5.entries.values()) == [Fraction(2, 5), Fraction(3, 5)]
    assert list(c8.entries.values()) == [1]
    assert l1_distance(p5, c8) == Fraction(4, 5)


def test_radius_zero_is_single_type():
    assert list(exact_frequency_vector(generate("grid", w=3, h=5), 0).entries.values()) == [1]


def test_root_matters():
    # path a-b-c rooted at an end vs at the middle
    assert _key(3, [(0, 1), (1, 2)], root=0) != _key(3, [(0, 1), (1, 2)], root=1)


def test_depth_k_edges_are_kept():
    tri = generate("disjoint_triangles", m=1)
    disc = extract_disc(tri, 0, 1)
    assert disc.vertex_count == 3 and sum(map(len, disc.adjacency)) == 6


def test_extract_within_allowed_set():
    g = generate("cycle", n=6)
    disc = extract_disc(g, 0, 2, allowed={0, 1, 2})
    assert disc.vertex_count == 3 and disc.origin == (0, 1, 2)
    with pytest.raises(ValueError):
        extract_disc(g, 3, 1, allowed={0})


def test_extract_charges_ball_reads():
    g = generate("grid", w=5, h=5)
    g.counter.reset()
    extract_disc(g, 12, 1)
    assert g.counter.neighbour_queries == 5


def test_size_cap():
    g = generate("cycle", n=40)
    with pytest.raises(DiscTooLargeError):
        canonical_key(extract_disc(g, 0, 10), cap=10)


def test_enumerated_type_counts():
    assert len(enumerate_disc_types(1, 5, max_vertices=2)) == 2
    assert len(enumerate_disc_types(2, 2, max_vertices=5)) > 4
    assert len(enumerate_disc_types(3, 0)) == 1
    # isolated root, one neighbour, two independent neighbours, triangle
    assert len(enumerate_disc_types(2, 1)) == 4
    with pytest.raises(ValueError):
        enumerate_disc_types(4, 2)


def test_type_count_bound_is_an_upper_bound():
    for d, k in [(1, 3), (2, 1), (3, 1)]:
        bound = disc_type_count_bound(d, k)
        assert bound is not None
        if 1 + d * sum((d - 1) ** i for i in range(k)) <= 6:
            assert len(enumerate_disc_types(d, k)) <= bound
    assert disc_type_count_bound(4, 3) is None


def test_frequency_vector_validation_and_json():
    a, b = DiscKey(b"\x00\x01"), DiscKey(b"\x00\x02\x80")
    with pytest.raises(ValueError):
        FrequencyVector({a: Fraction(1, 2)})
    with pytest.raises(ValueError):
        FrequencyVector({a: 1.5, b: -0.5})
    fv = FrequencyVector({a: Fraction(1, 3), b: Fraction(2, 3)})
    assert FrequencyVector.from_json_dict(fv.to_json_dict()) == fv
    assert fv[DiscKey(b"\xff")] == 0
    assert l1_distance(fv, fv) == 0


def _random_connected(rng, m, p):
    edges = {(rng.randrange(i), i) for i in range(1, m)}
    edges |= {(i, j) for i, j in itertools.combinations(range(m), 2) if rng.random() < p}
    return sorted(edges)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 9), st.floats(0, 0.6), st.integers(0, 2 ** 32))
def test_key_invariant_under_relabelling(m, p, seed):
    rng = random.Random(seed)
    edges = _random_connected(rng, m, p)
    root = rng.randrange(m)
    perm = list(range(m))
    rng.shuffle(perm)
    relabelled = [(perm[u], perm[w]) for u, w in edges]
    assert _key(m, edges, root) == _key(m, relabelled, perm[root])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_disc_of_graph_equals_disc_of_relabelled_graph(seed):
    rng = random.Random(seed)
    n = rng.randrange(2, 14)
    edges = [e for e in _random_connected(rng, n, 0.15)]
    g = Graph.from_edges(n, edges)
    perm = list(range(n))
    rng.shuffle(perm)
    h = Graph.from_edges(n, [(perm[u], perm[w]) for u, w in edges])
    k = rng.randrange(0, 3)
    assert exact_frequency_vector(g, k) == exact_frequency_vector(h, k)


def test_canonical_bytes_encodes_vertex_count():
    key = _key(4, [(0, 1), (0, 2), (0, 3)])
    assert key.vertex_count == 4
    assert canonical_bytes(((),), (0,)) == b"\x00\x01"
