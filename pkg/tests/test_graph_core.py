import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import SMALL
from hkperc.errors import BudgetExceededError, InvalidVertexError
from hkperc.families import hypercube, middle_layer, odd
from hkperc.graph_core import Traversal, ball, distance_within, sphere
from hkperc.oracle import distance_matrix


def test_ball_layers_of_hypercube():
    q = hypercube(4)
    b = ball(q, 0, 2)
    assert [len(layer) for layer in b.layers] == [1, 4, 6]
    assert b.size() == 11
    assert sorted(b.vertices().tolist()) == sorted(v for v in range(16) if bin(v).count("1") <= 2)


def test_sphere_radius_zero_is_center():
    assert sphere(hypercube(3), 5, 0).tolist() == [5]


def test_distance_within_examples():
    o = odd(3)
    # {1,2} and {1,3} share the common neighbour {4,5}
    assert distance_within(o, o.parse("{1,2}"), o.parse("{1,3}"), 5) == 2
    assert distance_within(hypercube(5), 0, 31, 4) is None
    assert distance_within(hypercube(5), 0, 31, 5) == 5


def test_budget_exceeded():
    with pytest.raises(BudgetExceededError):
        ball(hypercube(10), 0, 3, budget=100)


def test_invalid_vertex():
    with pytest.raises(InvalidVertexError):
        hypercube(3).neighbours(8)
    with pytest.raises(InvalidVertexError):
        hypercube(3).neighbours(-1)
    with pytest.raises(ValueError):
        ball(hypercube(3), 0, -1)


def test_traversal_scratch_is_reset():
    t = Traversal(middle_layer(3))
    first = t.distances(0, 2)
    t.distances(5, 3)
    again = t.distances(0, 2)
    assert np.array_equal(first[0], again[0]) and np.array_equal(first[1], again[1])


def test_adjacency_symmetric_and_sized(small_graph):
    g = small_graph
    for v in range(g.order):
        nb = g.neighbours(v)
        assert len(nb) == g.degree(v)
        assert len(set(nb.members)) == len(nb)
        assert v not in nb
        for w in nb:
            assert v in g.neighbours(w)
    assert g.degrees.min() == g.min_degree and g.degrees.max() == g.max_degree


def test_bfs_agrees_with_matrix_oracle(small_graph):
    g = small_graph
    dm = distance_matrix(g)
    t = Traversal(g)
    for x in range(0, g.order, max(1, g.order // 16)):
        verts, dists = t.distances(x, g.order)
        got = np.full(g.order, -1)
        got[verts] = dists
        assert np.array_equal(got, dm[x])


@given(st.sampled_from([g for g in SMALL if g.order > 1]), st.data())
def test_distance_within_matches_matrix(g, data):
    x = data.draw(st.integers(0, g.order - 1))
    y = data.draw(st.integers(0, g.order - 1))
    cap = data.draw(st.integers(0, 6))
    d = int(distance_matrix(g)[x, y])
    assert distance_within(g, x, y, cap) == (d if d <= cap else None)


@given(st.sampled_from(SMALL), st.data())
def test_ball_is_union_of_spheres(g, data):
    x = data.draw(st.integers(0, g.order - 1))
    r = data.draw(st.integers(0, 4))
    b = ball(g, x, r)
    dm = distance_matrix(g)[x]
    for i, layer in enumerate(b.layers):
        assert np.array_equal(layer, np.flatnonzero(dm == i))
