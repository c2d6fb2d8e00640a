"""Implicit-graph contract and bounded-radius traversal (balls, spheres, capped distances).

Vertices are dense integer ids ``0 <= v < graph.order``. For cube-like and
product families the id *is* the coordinate encoding (bitmask / mixed radix);
Kneser-type families translate between ids and subset bitmasks themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from ._adjacency import all_degrees, bfs_dense, fill_neighbours
from .errors import BudgetExceededError, InvalidVertexError, UnsupportedFamilyError

DEFAULT_BUDGET = 1 << 26
# above this order the dense distance array is replaced by a dict
DENSE_LIMIT = 1 << 26


@dataclass(frozen=True)
class Neighbourhood:
    center: int
    members: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, v) -> bool:
        return v in self.members


@dataclass(frozen=True)
class BallView:
    """BFS layers around ``center``; ``layers[i]`` is the sphere of radius ``i`` (sorted)."""

    center: int
    radius: int
    layers: tuple[np.ndarray, ...]

    def vertices(self) -> np.ndarray:
        return np.sort(np.concatenate(self.layers))

    def size(self) -> int:
        return sum(len(layer) for layer in self.layers)


class GraphFamily:
    """Immutable implicit graph.

    Subclasses set ``spec``, ``order``, ``canonical_K``, ``min_degree``,
    ``max_degree`` and ``kernel`` (see :mod:`hkperc._adjacency`) in ``__init__``
    and never mutate them afterwards, so instances can be shared freely between
    threads.
    """

    spec = None
    order: int
    canonical_K: int
    min_degree: int
    max_degree: int
    kernel: tuple
    # non-typical oracle is only defined for dist(x, y) <= local_radius; None = everywhere
    local_radius: int | None = None

    def __repr__(self) -> str:
        return f"<{type(self).__name__} order={self.order} K={self.canonical_K}>"

    # -- vertices -----------------------------------------------------------

    def check_vertex(self, v) -> int:
        try:
            iv = int(v)
        except (TypeError, ValueError):
            raise InvalidVertexError(f"not a vertex id: {v!r}") from None
        if iv != v or not 0 <= iv < self.order:
            raise InvalidVertexError(f"vertex {v!r} outside 0..{self.order - 1}")
        return iv

    def label(self, v: int) -> str:
        return str(self.check_vertex(v))

    def parse(self, text: str) -> int:
        try:
            return self.check_vertex(int(text.strip()))
        except ValueError:
            raise InvalidVertexError(f"cannot parse vertex {text!r}") from None

    # -- adjacency ----------------------------------------------------------

    def neighbour_array(self, v) -> np.ndarray:
        v = self.check_vertex(v)
        buf = np.empty(max(self.max_degree, 1), dtype=np.int64)
        k = fill_neighbours(self.kernel, v, buf)
        return np.sort(buf[:k])

    def neighbours(self, v) -> Neighbourhood:
        v = self.check_vertex(v)
        return Neighbourhood(v, tuple(int(w) for w in self.neighbour_array(v)))

    def degree(self, v) -> int:
        v = self.check_vertex(v)
        buf = np.empty(max(self.max_degree, 1), dtype=np.int64)
        return int(fill_neighbours(self.kernel, v, buf))

    @cached_property
    def degrees(self) -> np.ndarray:
        if self.min_degree == self.max_degree:
            return np.full(self.order, self.min_degree, dtype=np.int32)
        return all_degrees(self.kernel, self.order, self.max_degree)

    @property
    def is_regular(self) -> bool:
        return self.min_degree == self.max_degree

    # -- structure hooks used by the certifier ------------------------------

    def nontypical(self, x, y) -> bool:
        """Is ``y`` in the non-typical set D(x)? Default: D is empty."""
        x, y = self.check_vertex(x), self.check_vertex(y)
        if x == y:
            raise InvalidVertexError("non-typical set is defined for y != x")
        return False

    def nontypical_many(self, x: int, vertices: np.ndarray, dists: np.ndarray):
        """Vectorised D-oracle: returns ``(in_d, evaluated)`` boolean arrays.

        ``dists`` are the BFS distances of ``vertices`` from ``x``.
        """
        n = len(vertices)
        return np.zeros(n, dtype=bool), np.ones(n, dtype=bool)

    def projection(self, x, y, ell: int | None = None):
        raise UnsupportedFamilyError(f"{type(self).__name__} has no projection construction")

    def describe(self) -> dict:
        return {
            "spec": self.spec.to_dict() if self.spec is not None else None,
            "order": self.order,
            "canonical_K": self.canonical_K,
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
        }


class Traversal:
    """Reusable capped-BFS scratch space for one graph.

    Not thread-safe: each worker owns its own instance.
    """

    def __init__(self, graph: GraphFamily, budget: int = DEFAULT_BUDGET):
        self.graph = graph
        self.budget = budget
        self._dense = graph.order <= DENSE_LIMIT
        if self._dense:
            self._dist = np.full(graph.order, -1, dtype=np.int32)
            self._queue = np.empty(min(graph.order, budget), dtype=np.int64)

    def distances(self, src: int, cap: int) -> tuple[np.ndarray, np.ndarray]:
        """All vertices within ``cap`` of ``src`` in BFS order, with their distances."""
        src = self.graph.check_vertex(src)
        if cap < 0:
            raise ValueError("radius must be non-negative")
        if not self._dense:
            return self._distances_sparse(src, cap)
        count, complete = bfs_dense(self.graph.kernel, src, cap, self._dist, self._queue,
                                    self.graph.max_degree)
        verts = self._queue[:count].copy()
        dists = self._dist[verts].astype(np.int64)
        self._dist[verts] = -1
        if not complete:
            raise BudgetExceededError(
                f"ball of radius {cap} around {src} exceeds {self.budget} vertices")
        return verts, dists

    def _distances_sparse(self, src, cap):
        g = self.graph.kernel
        buf = np.empty(max(self.graph.max_degree, 1), dtype=np.int64)
        seen = {src: 0}
        order = [src]
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            du = seen[u]
            if du >= cap:
                continue
            k = fill_neighbours(g, u, buf)
            for w in buf[:k].tolist():
                if w not in seen:
                    if len(order) >= self.budget:
                        raise BudgetExceededError(
                            f"ball of radius {cap} around {src} exceeds {self.budget} vertices")
                    seen[w] = du + 1
                    order.append(w)
        verts = np.array(order, dtype=np.int64)
        return verts, np.array([seen[v] for v in order], dtype=np.int64)


def ball(graph: GraphFamily, x, ell: int, budget: int = DEFAULT_BUDGET) -> BallView:
    if ell < 0:
        raise ValueError("radius must be non-negative")
    verts, dists = Traversal(graph, budget).distances(x, ell)
    # BFS order keeps layers contiguous
    cuts = np.searchsorted(dists, np.arange(ell + 2))
    layers = tuple(np.sort(verts[cuts[i]:cuts[i + 1]]) for i in range(ell + 1))
    return BallView(int(verts[0]), ell, layers)


def sphere(graph: GraphFamily, x, ell: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    return ball(graph, x, ell, budget).layers[ell]


def distance_within(graph: GraphFamily, x, y, cap: int, budget: int = DEFAULT_BUDGET) -> int | None:
    """Exact ``dist(x, y)`` if it is at most ``cap``, else ``None``."""
    y = graph.check_vertex(y)
    verts, dists = Traversal(graph, budget).distances(x, cap)
    hit = np.flatnonzero(verts == y)
    return int(dists[hit[0]]) if len(hit) else None
