from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .._adjacency import CSR, make_kernel
from ..errors import InvalidFamilyError
from ..graph_core import GraphFamily
from .core import FamilySpec


def read_edge_list(path) -> list[tuple[int, int]]:
    """Parse ``u v`` lines; ``#`` starts a comment."""
    edges = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidFamilyError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidFamilyError(f"{path}:{lineno}: non-integer vertex in {line!r}") from None
        if u < 0 or v < 0:
            raise InvalidFamilyError(f"{path}:{lineno}: negative vertex id")
        edges.append((u, v))
    return edges


def edge_list_spec(path, K: int = 1) -> FamilySpec:
    return FamilySpec("explicit", edges=tuple(read_edge_list(path)), K=K)


class Explicit(GraphFamily):
    """A user-supplied simple connected graph on ids 0..order-1.

    D is empty and there is no projection construction.
    """

    def __init__(self, spec: FamilySpec):
        edges = np.array(spec.edges, dtype=np.int64).reshape(-1, 2)
        order = spec.order
        if order is None:
            order = int(edges.max()) + 1 if len(edges) else 1
        if len(edges) and (edges.min() < 0 or edges.max() >= order):
            raise InvalidFamilyError("edge endpoint outside 0..order-1")
        if (edges[:, 0] == edges[:, 1]).any():
            raise InvalidFamilyError("explicit graph has a self-loop")
        both = np.unique(np.concatenate([edges, edges[:, ::-1]]), axis=0)
        if order > 1:
            adj = coo_matrix((np.ones(len(both)), (both[:, 0], both[:, 1])), shape=(order, order))
            if connected_components(adj, directed=False)[0] != 1:
                raise InvalidFamilyError("explicit graph is not connected")
        self.spec = spec
        self.order = order
        self.canonical_K = int(spec.K) if spec.K is not None else 1
        if self.canonical_K < 1:
            raise InvalidFamilyError("K must be >= 1")
        cptr = np.zeros(order + 1, dtype=np.int64)
        np.add.at(cptr, both[:, 0] + 1, 1)
        cptr = np.cumsum(cptr)
        deg = np.diff(cptr)
        self.min_degree = int(deg.min())
        self.max_degree = int(deg.max())
        # np.unique sorted rows by (u, v): CSR rows come out in canonical order
        self.kernel = make_kernel(CSR, cptr=cptr, cidx=both[:, 1])
