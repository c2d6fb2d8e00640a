from __future__ import annotations

import numpy as np

from .._adjacency import CUBE, make_kernel
from ..errors import InvalidFamilyError, InvalidVertexError, NotEvaluated
from ..graph_core import GraphFamily
from .core import ProjectionHandle, hypercube, single_vertex

MAX_BITS = 62


def deposit(values: np.ndarray, positions) -> np.ndarray:
    """Scatter bit ``j`` of each value to bit ``positions[j]``."""
    values = np.asarray(values, dtype=np.int64)
    out = np.zeros_like(values)
    for j, pos in enumerate(positions):
        out |= ((values >> j) & 1) << pos
    return out


def _bits(mask: int, width: int) -> tuple[list[int], list[int]]:
    ones = [i for i in range(width) if mask >> i & 1]
    zeros = [i for i in range(width) if not mask >> i & 1]
    return ones, zeros


class _BitFamily(GraphFamily):
    width: int

    def label(self, v) -> str:
        return format(self.check_vertex(v), f"0{self.width}b") if self.width else ""

    def parse(self, text: str) -> int:
        s = text.strip()
        if len(s) != self.width or set(s) - {"0", "1"}:
            raise InvalidVertexError(f"expected a {self.width}-bit string, got {text!r}")
        return int(s, 2) if s else 0

    def _subcube(self, x, y, ell, fixed):
        free = sorted(set(range(self.width)) - set(fixed))
        fixed_mask = sum(1 << i for i in fixed)
        sub = hypercube(len(free)) if free else single_vertex(self.canonical_K)
        embed = (y & fixed_mask) | deposit(np.arange(sub.order), free)
        return ProjectionHandle(self, x, y, ell, sub, embed)


class Hypercube(_BitFamily):
    """Q_n on n-bit masks; canonical K = 2 with empty non-typical sets."""

    def __init__(self, spec):
        n = int(spec.n)
        if n > MAX_BITS:
            raise InvalidFamilyError(f"hypercube n={n} does not fit a 64-bit word")
        self.spec = spec
        self.n = self.width = n
        self.order = 1 << n
        self.canonical_K = 2
        self.min_degree = self.max_degree = n
        self.kernel = make_kernel(CUBE, nbits=n)

    def distance(self, x, y) -> int:
        return (self.check_vertex(x) ^ self.check_vertex(y)).bit_count()

    def projection(self, x, y, ell=None):
        x, y = self.check_vertex(x), self.check_vertex(y)
        if x == y:
            raise InvalidVertexError("projection needs y != x")
        differ, _ = _bits(x ^ y, self.n)
        return self._subcube(x, y, len(differ), differ)


class Folded(_BitFamily):
    """Folded hypercube: Q_{n-1} plus antipodal edges, n-regular, canonical K = 3.

    Locally isomorphic to Q_n within radius < floor(n/2); the non-typical
    oracle is only evaluated there.
    """

    def __init__(self, spec):
        n = int(spec.n)
        if n < 3:
            raise InvalidFamilyError("folded hypercube needs n >= 3 (n = 2 gives a multi-edge)")
        if n - 1 > MAX_BITS:
            raise InvalidFamilyError(f"folded n={n} does not fit a 64-bit word")
        self.spec = spec
        self.n = n
        self.width = n - 1
        self.order = 1 << (n - 1)
        self.canonical_K = 3
        self.min_degree = self.max_degree = n
        self.local_radius = n // 2 - 1
        self.kernel = make_kernel(CUBE, nbits=n - 1, fold=(1 << (n - 1)) - 1)

    def distance(self, x, y) -> int:
        h = (self.check_vertex(x) ^ self.check_vertex(y)).bit_count()
        return min(h, self.n - h)

    def nontypical(self, x, y) -> bool:
        super().nontypical(x, y)
        d = self.distance(x, y)
        if d > self.local_radius:
            raise NotEvaluated(f"dist {d} beyond local radius {self.local_radius}")
        return False

    def nontypical_many(self, x, vertices, dists):
        return np.zeros(len(vertices), dtype=bool), np.asarray(dists) <= self.local_radius

    def projection(self, x, y, ell=None):
        """Subcube Q_{n-2l} through y, avoiding B(x, l-1).

        Fix 2l-1 coordinates so the Hamming distance to x (in Q_{n-1}) stays
        within [l, n-l] on the whole subcube.
        """
        x, y = self.check_vertex(x), self.check_vertex(y)
        if x == y:
            raise InvalidVertexError("projection needs y != x")
        differ, agree = _bits(x ^ y, self.width)
        h = len(differ)
        ell = min(h, self.n - h)
        if h == ell:
            fixed = differ + agree[:ell - 1]
        else:
            fixed = agree + differ[:ell]
        return self._subcube(x, y, ell, fixed)
