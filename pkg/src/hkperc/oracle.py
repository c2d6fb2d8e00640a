"""Brute-force ground truth for small graphs.

Everything here favours being obviously correct over being fast, and refuses
(``OrderGuardError``) rather than approximating when a graph is too large.
"""

from __future__ import annotations

import math
import random
from functools import lru_cache

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ._adjacency import neighbour_table
from .errors import OrderGuardError
from .graph_core import GraphFamily
from .process import ProcessSpec, run, simulate

PHI_LIMIT = 20
ASYNC_LIMIT = 1 << 10
DISTANCE_LIMIT = 1 << 12


def _guard(graph: GraphFamily, limit: int, what: str):
    if graph.order > limit:
        raise OrderGuardError(f"{what} needs |V| <= {limit}, got {graph.order}")


@njit(cache=True)
def _indicators(g, deg, needs, order, max_rounds, maxdeg):
    out = np.zeros(1 << order, dtype=np.bool_)
    seed = np.zeros(order, dtype=np.bool_)
    for mask in range(1 << order):
        for v in range(order):
            seed[v] = (mask >> v) & 1
        _, _, total, hit = simulate(g, deg, needs, seed, max_rounds, maxdeg)
        if hit:
            raise RuntimeError("round limit hit during enumeration")
        out[mask] = total == order
    return out


@lru_cache(maxsize=64)
def indicator_table(graph: GraphFamily, spec: ProcessSpec) -> np.ndarray:
    """``table[mask]``: does the seed set with bitmask ``mask`` percolate?"""
    _guard(graph, PHI_LIMIT, "exact_phi")
    table = _indicators(graph.kernel, graph.degrees, spec.needs_table(graph), graph.order,
                        spec.round_limit(graph), graph.max_degree)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=64)
def percolating_counts(graph: GraphFamily, spec: ProcessSpec) -> tuple[int, ...]:
    """``c[k]``: number of percolating seed sets of size ``k``."""
    table = indicator_table(graph, spec)
    sizes = np.bitwise_count(np.flatnonzero(table))
    return tuple(int(c) for c in np.bincount(sizes, minlength=graph.order + 1))


def exact_phi(graph: GraphFamily, spec: ProcessSpec, p: float) -> float:
    """Pr[A_p percolates] by summing over all 2^|V| seed sets."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    counts = percolating_counts(graph, spec)
    n = graph.order
    return math.fsum(c * p ** k * (1 - p) ** (n - k) for k, c in enumerate(counts) if c)


def exact_pc(graph: GraphFamily, spec: ProcessSpec, tol: float = 1e-9) -> float:
    """inf{p : Phi(p) >= 1/2} by bisection on the exact Phi."""
    if exact_phi(graph, spec, 0.0) >= 0.5:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if exact_phi(graph, spec, mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    return hi


def async_closure(graph: GraphFamily, spec: ProcessSpec, A0, seed: int) -> set[int]:
    """Closure under single-vertex updates in a random order (plain Python)."""
    if spec.rows != 1:
        raise ValueError("asynchronous closure is only order-independent for fixed thresholds")
    rng = random.Random(seed)
    nbrs = [graph.neighbours(v).members for v in range(graph.order)]
    need = [spec.need(len(nbrs[v])) for v in range(graph.order)]
    infected = set(int(v) for v in A0)
    changed = True
    while changed:
        changed = False
        pending = [v for v in range(graph.order) if v not in infected]
        rng.shuffle(pending)
        for v in pending:
            if sum(w in infected for w in nbrs[v]) >= need[v]:
                infected.add(v)
                changed = True
    return infected


def closure_async_equiv(graph: GraphFamily, A0, seed: int,
                        spec: ProcessSpec | None = None) -> bool:
    """Does the synchronous fixpoint equal a random-order asynchronous closure?"""
    _guard(graph, ASYNC_LIMIT, "closure_async_equiv")
    spec = spec or ProcessSpec.majority()
    A0 = [int(v) for v in A0]
    sync = set(run(graph, spec, A0).final_vertices.tolist())
    return sync == async_closure(graph, spec, A0, seed)


def distance_matrix(graph: GraphFamily) -> np.ndarray:
    """All-pairs distances via scipy's unweighted shortest paths (-1 if unreachable)."""
    _guard(graph, DISTANCE_LIMIT, "distance_matrix")
    n = graph.order
    table = neighbour_table(graph.kernel, np.arange(n, dtype=np.int64), graph.max_degree)
    rows, cols = np.nonzero(table >= 0)
    adj = csr_matrix((np.ones(len(rows)), (rows, table[rows, cols])), shape=(n, n))
    dist = shortest_path(adj, directed=False, unweighted=True)
    out = np.where(np.isinf(dist), -1, dist).astype(np.int64)
    return out
