from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .._adjacency import PRODUCT, make_kernel
from ..errors import InvalidFamilyError, InvalidVertexError
from ..graph_core import GraphFamily
from .core import FamilySpec, ProjectionHandle, make_family, single_vertex

MAX_ORDER = 1 << 62


@dataclass(frozen=True)
class BaseGraph:
    """A small connected factor graph with precomputed distances."""

    name: str
    adj: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.adj)

    @property
    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    @property
    def dist(self) -> np.ndarray:
        return _base_distances(self.adj)


@lru_cache(maxsize=None)
def _base_distances(adj) -> np.ndarray:
    k = len(adj)
    out = np.full((k, k), -1, dtype=np.int64)
    for s in range(k):
        out[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if out[s, w] < 0:
                        out[s, w] = out[s, u] + 1
                        nxt.append(w)
            frontier = nxt
    if (out < 0).any():
        raise InvalidFamilyError("base graph is not connected")
    out.setflags(write=False)
    return out


def _from_edges(name, k, edges) -> BaseGraph:
    adj = [set() for _ in range(k)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return BaseGraph(name, tuple(tuple(sorted(a)) for a in adj))


def parse_base(desc: str) -> BaseGraph:
    """``edge``, ``path:k``, ``cycle:k``, ``complete:k`` or ``star:k`` (k leaves)."""
    kind, _, arg = desc.strip().partition(":")
    if kind == "edge":
        kind, arg = "path", "2"
    try:
        k = int(arg)
    except ValueError:
        raise InvalidFamilyError(f"bad base graph descriptor {desc!r}") from None
    if kind == "path" and k >= 2:
        return _from_edges(desc, k, [(i, i + 1) for i in range(k - 1)])
    if kind == "cycle" and k >= 3:
        return _from_edges(desc, k, [(i, (i + 1) % k) for i in range(k)])
    if kind == "complete" and k >= 2:
        return _from_edges(desc, k, [(i, j) for i in range(k) for j in range(i + 1, k)])
    if kind == "star" and k >= 1:
        return _from_edges(desc, k + 1, [(0, i) for i in range(1, k + 1)])
    raise InvalidFamilyError(f"bad base graph descriptor {desc!r}")


def _bases_for(spec: FamilySpec) -> tuple[str, ...]:
    if spec.kind == "product":
        return spec.bases
    if spec.kind == "hamming":
        if spec.n is None or spec.q is None or spec.n < 1 or spec.q < 2:
            raise InvalidFamilyError("hamming needs n >= 1 and q >= 2")
        return (f"complete:{spec.q}",) * spec.n
    if spec.kind == "torus":
        return tuple(f"cycle:{d}" for d in spec.dims)
    if spec.kind == "grid":
        return tuple(f"path:{d}" for d in spec.dims)
    raise InvalidFamilyError(f"not a product kind: {spec.kind}")


class Product(GraphFamily):
    """Cartesian product of small connected base graphs.

    Vertex ids are mixed-radix with coordinate 0 most significant, so id order
    is lexicographic order of coordinate tuples. Canonical K is the largest
    base order; D(x) is the set of y with |I(x, y)| != dist(x, y).
    """

    def __init__(self, spec: FamilySpec):
        descs = _bases_for(spec)
        if not descs:
            raise InvalidFamilyError("product needs at least one base graph")
        self.spec = spec
        self.bases = tuple(parse_base(d) for d in descs)
        for b in self.bases:
            if b.order < 2:
                raise InvalidFamilyError("base graphs need at least 2 vertices")
        self.radix = np.array([b.order for b in self.bases], dtype=np.int64)
        order = math.prod(int(r) for r in self.radix)
        if order > MAX_ORDER:
            raise InvalidFamilyError("product order does not fit a 64-bit word")
        self.order = order
        stride = np.ones(len(self.bases), dtype=np.int64)
        for i in range(len(self.bases) - 2, -1, -1):
            stride[i] = stride[i + 1] * self.radix[i + 1]
        self.stride = stride
        self.canonical_K = int(self.radix.max())
        self.min_degree = sum(min(b.degrees) for b in self.bases)
        self.max_degree = sum(max(b.degrees) for b in self.bases)

        boff, bptr, bidx = [], [0], []
        for b in self.bases:
            boff.append(len(bptr) - 1)
            for row in b.adj:
                bidx.extend(row)
                bptr.append(len(bidx))
        self.kernel = make_kernel(PRODUCT, radix=self.radix, stride=stride,
                                  boff=boff, bptr=bptr, bidx=bidx)

    @property
    def dimension(self) -> int:
        return len(self.bases)

    def digits(self, v) -> tuple[int, ...]:
        v = self.check_vertex(v)
        return tuple(int(d) for d in (v // self.stride) % self.radix)

    def vertex(self, digits) -> int:
        digits = tuple(int(d) for d in digits)
        if len(digits) != self.dimension or any(not 0 <= d < r for d, r in zip(digits, self.radix)):
            raise InvalidVertexError(f"bad coordinates {digits!r}")
        return int(sum(d * s for d, s in zip(digits, self.stride)))

    def label(self, v) -> str:
        return "(" + ",".join(map(str, self.digits(v))) + ")"

    def parse(self, text: str) -> int:
        s = text.strip().strip("()")
        try:
            if "," in s:
                return self.vertex(int(t) for t in s.split(","))
            if len(s) == self.dimension and all(r <= 10 for r in self.radix):
                return self.vertex(int(c) for c in s)
        except ValueError:
            pass
        raise InvalidVertexError(f"cannot parse product vertex {text!r}")

    def _digit_array(self, vertices) -> np.ndarray:
        v = np.asarray(vertices, dtype=np.int64)
        return (v[:, None] // self.stride[None, :]) % self.radix[None, :]

    def distance(self, x, y) -> int:
        xd, yd = self.digits(x), self.digits(y)
        return int(sum(b.dist[a, c] for b, a, c in zip(self.bases, xd, yd)))

    def differing(self, x, y) -> list[int]:
        """I(x, y): coordinates where x and y differ."""
        return [i for i, (a, c) in enumerate(zip(self.digits(x), self.digits(y))) if a != c]

    def nontypical(self, x, y) -> bool:
        super().nontypical(x, y)
        return len(self.differing(x, y)) != self.distance(x, y)

    def nontypical_many(self, x, vertices, dists):
        if len(vertices) == 0:
            return np.zeros(0, dtype=bool), np.ones(0, dtype=bool)
        xd = np.array(self.digits(x))
        vd = self._digit_array(vertices)
        n_diff = (vd != xd[None, :]).sum(axis=1)
        dist = np.zeros(len(vertices), dtype=np.int64)
        for i, b in enumerate(self.bases):
            dist += b.dist[xd[i], vd[:, i]]
        in_d = n_diff != dist
        in_d[np.asarray(vertices) == x] = False
        return in_d, np.ones(len(vertices), dtype=bool)

    def projection(self, x, y, ell=None):
        """Freeze the coordinates in I(x, y) at y's values; the rest stay free."""
        x, y = self.check_vertex(x), self.check_vertex(y)
        if x == y:
            raise InvalidVertexError("projection needs y != x")
        diff = set(self.differing(x, y))
        keep = [i for i in range(self.dimension) if i not in diff]
        ell = self.distance(x, y)
        yd = self.digits(y)
        fixed_part = sum(yd[i] * int(self.stride[i]) for i in diff)
        if not keep:
            return ProjectionHandle(self, x, y, ell, single_vertex(self.canonical_K),
                                    np.array([y], dtype=np.int64))
        sub = make_family(FamilySpec("product", bases=tuple(self.bases[i].name for i in keep)))
        sd = sub._digit_array(np.arange(sub.order))
        embed = fixed_part + (sd * self.stride[keep][None, :]).sum(axis=1)
        return ProjectionHandle(self, x, y, ell, sub, embed.astype(np.int64))
