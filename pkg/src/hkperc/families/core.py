from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import InvalidFamilyError
from ..graph_core import GraphFamily

KINDS = ("hypercube", "product", "hamming", "torus", "grid",
         "middle_layer", "odd", "folded", "explicit")


@dataclass(frozen=True)
class FamilySpec:
    """Declarative description of a graph family.

    ``bases`` holds product base descriptors such as ``"cycle:4"`` (see
    :func:`hkperc.families.product.parse_base`). ``edges``/``order``/``K`` are
    used only by explicit graphs.
    """

    kind: str
    n: int | None = None
    q: int | None = None
    dims: tuple[int, ...] = ()
    bases: tuple[str, ...] = ()
    edges: tuple[tuple[int, int], ...] = field(default=(), repr=False)
    order: int | None = None
    K: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidFamilyError(f"unknown family kind {self.kind!r}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "bases", tuple(self.bases))
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for name in ("n", "q", "order", "K"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.dims:
            out["dims"] = list(self.dims)
        if self.bases:
            out["bases"] = list(self.bases)
        if self.kind == "explicit":
            out["edge_count"] = len(self.edges)
        return out


@dataclass(frozen=True)
class ProjectionHandle:
    """A lower-dimensional subgraph ``G(y)`` of ``parent`` anchored at ``x``.

    ``subgraph`` is a canonical family and ``embed[s]`` is the parent vertex
    that subgraph vertex ``s`` maps to.
    """

    parent: GraphFamily
    anchor: int
    target: int
    ell: int
    subgraph: GraphFamily
    embed: np.ndarray = field(repr=False)

    def __post_init__(self):
        order = np.argsort(self.embed, kind="stable")
        object.__setattr__(self, "_sorted", self.embed[order])
        object.__setattr__(self, "_inverse", order)

    @property
    def vertices(self) -> np.ndarray:
        return self._sorted

    def contains(self, v) -> bool:
        i = np.searchsorted(self._sorted, v)
        return bool(i < len(self._sorted) and self._sorted[i] == v)

    def sub_vertex(self, v) -> int:
        i = int(np.searchsorted(self._sorted, v))
        if i >= len(self._sorted) or self._sorted[i] != v:
            raise KeyError(v)
        return int(self._inverse[i])

    def sub_degree(self, v) -> int:
        """Degree of parent vertex ``v`` inside the projection."""
        return self.subgraph.degree(self.sub_vertex(v))


def single_vertex(K: int) -> GraphFamily:
    return make_family(FamilySpec("explicit", order=1, edges=(), K=K))


@lru_cache(maxsize=512)
def make_family(spec: FamilySpec) -> GraphFamily:
    from .cube import Folded, Hypercube
    from .explicit import Explicit
    from .kneser import MiddleLayer, Odd
    from .product import Product

    kind = spec.kind
    if kind in ("hypercube", "middle_layer", "odd", "folded"):
        if spec.n is None or int(spec.n) < 1:
            raise InvalidFamilyError(f"{kind} needs n >= 1")
    if kind == "hypercube":
        return Hypercube(spec)
    if kind == "folded":
        return Folded(spec)
    if kind == "middle_layer":
        return MiddleLayer(spec)
    if kind == "odd":
        return Odd(spec)
    if kind == "explicit":
        return Explicit(spec)
    return Product(spec)


def hypercube(n: int) -> GraphFamily:
    return make_family(FamilySpec("hypercube", n=n))


def folded(n: int) -> GraphFamily:
    return make_family(FamilySpec("folded", n=n))


def middle_layer(n: int) -> GraphFamily:
    return make_family(FamilySpec("middle_layer", n=n))


def odd(n: int) -> GraphFamily:
    return make_family(FamilySpec("odd", n=n))


def product(*bases: str) -> GraphFamily:
    return make_family(FamilySpec("product", bases=tuple(bases)))


def hamming(n: int, q: int) -> GraphFamily:
    return make_family(FamilySpec("hamming", n=n, q=q))


def torus(*dims: int) -> GraphFamily:
    return make_family(FamilySpec("torus", dims=tuple(dims)))


def grid(*dims: int) -> GraphFamily:
    return make_family(FamilySpec("grid", dims=tuple(dims)))


def explicit(edges, order: int | None = None, K: int = 1) -> GraphFamily:
    return make_family(FamilySpec("explicit", edges=tuple(map(tuple, edges)), order=order, K=K))
