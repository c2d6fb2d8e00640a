import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import SMALL
from hkperc.errors import (InvalidFamilyError, InvalidVertexError, NotEvaluated,
                           RadiusRangeError, UnsupportedFamilyError)
from hkperc.families import (FamilySpec, explicit, folded, grid, hamming, hypercube,
                             local_iso_check, make_family, middle_layer, odd, product, torus)
from hkperc.families.explicit import edge_list_spec, read_edge_list
from hkperc.graph_core import Traversal, ball
from hkperc.oracle import distance_matrix


def girth(g):
    best = math.inf
    # a non-tree edge closes a cycle of length at most dist[u] + dist[w] + 1
    for s in range(g.order):
        dist = {s: 0}
        parent = {s: -1}
        queue = [s]
        for u in queue:
            for w in g.neighbours(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


@pytest.mark.parametrize("n", range(1, 9))
def test_closed_form_orders(n):
    assert hypercube(n).order == 2 ** n
    assert middle_layer(n).order == 2 * math.comb(2 * n - 1, n - 1)
    if n >= 2:
        assert odd(n).order == math.comb(2 * n - 1, n - 1)
    if n >= 3:
        assert folded(n).order == 2 ** (n - 1)
    for g in [middle_layer(n), hypercube(n)] + ([folded(n)] if n >= 3 else []) + \
             ([odd(n)] if n >= 2 else []):
        assert g.is_regular and g.min_degree == n
        assert set(g.degrees.tolist()) == {n}


def test_product_orders_and_degrees():
    g = product("cycle:4", "path:3", "complete:5")
    assert g.order == 4 * 3 * 5
    assert g.min_degree == 2 + 1 + 4 and g.max_degree == 2 + 2 + 4
    assert g.canonical_K == 5
    assert hamming(3, 4).order == 64 and torus(3, 5).order == 15 and grid(2, 2, 2).order == 8


def test_canonical_K():
    assert hypercube(5).canonical_K == 2
    assert middle_layer(3).canonical_K == 4 and odd(3).canonical_K == 4
    assert folded(5).canonical_K == 3
    assert explicit([(0, 1)], K=7).canonical_K == 7


def test_middle_layer_2_is_six_cycle():
    g = middle_layer(2)
    assert g.order == 6 and g.is_regular and g.min_degree == 2
    assert distance_matrix(g).max() == 3


def test_petersen_fingerprint():
    g = odd(3)
    assert g.order == 10 and g.is_regular and g.min_degree == 3
    assert girth(g) == 5
    # every vertex sees the same distance profile (1, 3, 6)
    profiles = {tuple(np.bincount(row)) for row in distance_matrix(g)}
    assert profiles == {(1, 3, 6)}


@pytest.mark.parametrize("n", [3, 4])
def test_middle_layer_girth_six(n):
    assert girth(middle_layer(n)) == 6


def test_neighbour_examples():
    o = odd(3)
    assert [o.label(w) for w in o.neighbours(o.parse("{1,2}"))] == ["{3,4}", "{3,5}", "{4,5}"]
    f = folded(3)
    assert sorted(f.label(w) for w in f.neighbours(f.parse("00"))) == ["01", "10", "11"]
    m = middle_layer(4)
    assert all(len(m.neighbours(v)) == 4 for v in range(m.order))


def test_labels_round_trip(small_graph):
    g = small_graph
    for v in range(g.order):
        assert g.parse(g.label(v)) == v


def test_nontypical_examples():
    q = hypercube(4)
    assert not any(q.nontypical(0, y) for y in range(1, 16))
    c = torus(4, 4)
    assert c.nontypical(c.parse("(0,0)"), c.parse("(2,0)"))
    qq = product("edge", "edge")
    assert not qq.nontypical(qq.parse("(0,0)"), qq.parse("(1,1)"))
    with pytest.raises(InvalidVertexError):
        q.nontypical(3, 3)


def test_nontypical_beyond_local_radius():
    f = folded(6)
    x = 0
    far = f.parse("11100")  # distance 3 > local radius 2
    assert f.distance(x, far) == 3
    with pytest.raises(NotEvaluated):
        f.nontypical(x, far)
    assert not f.nontypical(x, f.parse("00011"))
    o = odd(4)
    dm = distance_matrix(o)
    y = int(np.flatnonzero(dm[0] == 3)[0])
    with pytest.raises(NotEvaluated):
        o.nontypical(0, y)


@given(st.sampled_from([torus(4, 4), grid(3, 4), product("star:3", "path:3"), hamming(2, 3)]),
       st.data())
def test_product_distance_at_least_differing(g, data):
    x = data.draw(st.integers(0, g.order - 1))
    y = data.draw(st.integers(0, g.order - 1))
    d = int(distance_matrix(g)[x, y])
    assert g.distance(x, y) == d
    assert d >= len(g.differing(x, y))
    if x != y:
        assert g.nontypical(x, y) == (len(g.differing(x, y)) != d)


def test_closed_form_distances_match_bfs():
    for g in [hypercube(5), folded(7), middle_layer(3), odd(4)]:
        dm = distance_matrix(g)
        for x in range(g.order):
            for y in range(0, g.order, 3):
                assert g.distance(x, y) == dm[x, y]


PROJECTABLE = [hypercube(6), folded(8), middle_layer(4), odd(4), torus(4, 4), hamming(3, 3),
               grid(3, 4), product("star:3", "cycle:3")]


@given(st.sampled_from(PROJECTABLE), st.data())
def test_projection_invariants(g, data):
    x = data.draw(st.integers(0, g.order - 1))
    y = data.draw(st.integers(0, g.order - 1).filter(lambda v: v != x))
    ell = g.distance(x, y)
    if g.local_radius is not None and ell > g.local_radius + 1:
        return
    h = g.projection(x, y)
    assert h.contains(y)
    dm = distance_matrix(g)[x]
    assert (dm[h.vertices] >= ell).all()
    sub = h.subgraph
    assert len(np.unique(h.embed)) == sub.order
    for s in range(sub.order):
        w = int(h.embed[s])
        assert abs(sub.degree(s) - g.degree(w)) <= g.canonical_K * ell
        parent_nb = set(g.neighbours(w).members)
        assert {int(h.embed[t]) for t in sub.neighbours(s)} <= parent_nb


def test_projection_examples():
    q = hypercube(4)
    h = q.projection(q.parse("0000"), q.parse("1100"))
    assert h.subgraph.order == 4
    assert sorted(q.label(v) for v in h.vertices) == ["1100", "1101", "1110", "1111"]
    m = middle_layer(4)
    dm = distance_matrix(m)
    y = int(np.flatnonzero(dm[0] == 2)[0])
    h = m.projection(0, y)
    assert h.subgraph.order == 2 * math.comb(5, 2) and h.subgraph.min_degree == 3
    assert max(abs(h.sub_degree(w) - m.degree(w)) for w in h.vertices) == 1
    o = odd(4)
    y = int(np.flatnonzero(distance_matrix(o)[0] == 1)[0])
    assert o.projection(0, y).subgraph.spec == FamilySpec("middle_layer", n=3)
    f = folded(8)
    y = f.parse("0000011")
    assert f.projection(0, y).subgraph.spec == FamilySpec("hypercube", n=4)
    with pytest.raises(UnsupportedFamilyError):
        explicit([(0, 1)]).projection(0, 1)
    with pytest.raises(InvalidVertexError):
        q.projection(3, 3)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_local_iso_odd_middle(n):
    o, m = odd(n), middle_layer(n)
    for ell in range(n - 1):
        for x in range(0, o.order, 3):
            for y in (0, m.order - 1, m.order // 2):
                assert local_iso_check(o, x, m, y, ell)
                assert local_iso_check(m, y, o, x, ell)
    with pytest.raises(RadiusRangeError):
        local_iso_check(o, 0, m, 0, n - 1)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_local_iso_folded_cube(n):
    f, q = folded(n), hypercube(n)
    for ell in range(n // 2):
        for x in range(f.order):
            assert local_iso_check(f, x, q, (x * 7) % q.order, ell)
    with pytest.raises(RadiusRangeError):
        local_iso_check(f, 0, q, 0, n // 2)


def test_local_iso_radius_boundary():
    with pytest.raises(RadiusRangeError):
        local_iso_check(folded(3), 0, hypercube(3), 0, 1)
    with pytest.raises(InvalidFamilyError):
        local_iso_check(hypercube(3), 0, middle_layer(3), 0, 1)


def test_balls_really_differ_beyond_radius():
    # at l = floor(n/2) the folded ball wraps around and the map stops being an isomorphism
    f, q = folded(6), hypercube(6)
    assert ball(f, 0, 3).size() < ball(q, 0, 3).size()


def test_invalid_families():
    for bad in [FamilySpec("folded", n=2), FamilySpec("odd", n=1), FamilySpec("hypercube", n=0),
                FamilySpec("hypercube", n=70), FamilySpec("hamming", n=2, q=1),
                FamilySpec("product", bases=("path:1",)), FamilySpec("product", bases=())]:
        with pytest.raises(InvalidFamilyError):
            make_family(bad)
    with pytest.raises(InvalidFamilyError):
        FamilySpec("kneser", n=3)
    with pytest.raises(InvalidFamilyError):
        explicit([(0, 1), (2, 3)])
    with pytest.raises(InvalidFamilyError):
        explicit([(0, 0), (0, 1)])


def test_edge_list_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# a triangle with a tail\n0 1\n1 2\n2 0  # closing edge\n\n2 3\n1 0\n")
    assert read_edge_list(p)[:3] == [(0, 1), (1, 2), (2, 0)]
    g = make_family(edge_list_spec(p, K=2))
    assert g.order == 4 and g.canonical_K == 2
    assert g.degrees.tolist() == [2, 2, 3, 1]
    p.write_text("0 1 2\n")
    with pytest.raises(InvalidFamilyError):
        read_edge_list(p)
    p.write_text("0 x\n")
    with pytest.raises(InvalidFamilyError):
        read_edge_list(p)


def test_traversal_on_kneser_sizes():
    # sphere sizes around a middle-layer vertex: n, n(n-1), ...
    m = middle_layer(5)
    verts, dists = Traversal(m).distances(0, 2)
    assert np.bincount(dists).tolist() == [1, 5, 20]
