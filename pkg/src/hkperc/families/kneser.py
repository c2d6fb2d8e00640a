"""Middle layer graph M_n and odd graph O_n on (2n-1)-bit subset masks.

Both are materialised as CSR adjacency over the sorted list of masks; vertex
ids are ranks in that list.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .._adjacency import CSR, make_kernel
from ..errors import BudgetExceededError, InvalidFamilyError, InvalidVertexError, NotEvaluated
from ..graph_core import GraphFamily
from .core import ProjectionHandle, middle_layer, single_vertex
from .cube import deposit

MAX_CSR_ORDER = 1 << 22


def _masks(width: int, counts) -> np.ndarray:
    if width <= 22:
        allm = np.arange(1 << width, dtype=np.int64)
        pc = np.bitwise_count(allm)
        return allm[np.isin(pc, list(counts))]
    out = [sum(1 << i for i in c) for k in counts for c in combinations(range(width), k)]
    return np.sort(np.array(out, dtype=np.int64))


def _lowest(mask: int, k: int) -> int:
    out = 0
    while k > 0 and mask:
        low = mask & -mask
        out |= low
        mask ^= low
        k -= 1
    if k:
        raise InvalidFamilyError("projection radius larger than the family admits")
    return out


def _positions(mask: int, width: int) -> list[int]:
    return [i for i in range(width) if mask >> i & 1]


class _MaskFamily(GraphFamily):
    width: int
    masks: np.ndarray

    def _build(self, nb_masks: np.ndarray):
        deg = nb_masks.shape[1]
        idx = np.searchsorted(self.masks, nb_masks)
        idx.sort(axis=1)
        cptr = np.arange(self.order + 1, dtype=np.int64) * deg
        self.kernel = make_kernel(CSR, cptr=cptr, cidx=idx.ravel())

    def mask(self, v) -> int:
        return int(self.masks[self.check_vertex(v)])

    def vertex_of_mask(self, m) -> int:
        i = int(np.searchsorted(self.masks, m))
        if i >= self.order or int(self.masks[i]) != int(m):
            raise InvalidVertexError(f"mask {m:#b} is not a vertex")
        return i

    def _ids(self, masks: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.masks, masks)
        if (idx >= self.order).any() or (self.masks[np.minimum(idx, self.order - 1)] != masks).any():
            raise InvalidFamilyError("projection left the vertex set")
        return idx.astype(np.int64)

    def label(self, v) -> str:
        return format(self.mask(v), f"0{self.width}b")

    def parse(self, text: str) -> int:
        s = text.strip()
        if len(s) != self.width or set(s) - {"0", "1"}:
            raise InvalidVertexError(f"expected a {self.width}-bit string, got {text!r}")
        return self.vertex_of_mask(int(s, 2))


class MiddleLayer(_MaskFamily):
    """M_n: weight n-1 and n vectors of length 2n-1, adjacent when differing in one coordinate."""

    def __init__(self, spec):
        n = int(spec.n)
        width = 2 * n - 1
        if width > 63:
            raise InvalidFamilyError(f"middle_layer n={n} does not fit a 64-bit word")
        order = 2 * math.comb(2 * n - 1, n - 1)
        if order > MAX_CSR_ORDER:
            raise BudgetExceededError(f"middle_layer n={n} has {order} vertices (cap {MAX_CSR_ORDER})")
        self.spec = spec
        self.n = n
        self.width = width
        self.order = order
        self.canonical_K = 4
        self.min_degree = self.max_degree = n
        self.masks = _masks(width, (n - 1, n))
        flips = self.masks[:, None] ^ (np.int64(1) << np.arange(width, dtype=np.int64))[None, :]
        ok = np.isin(np.bitwise_count(flips), (n - 1, n))
        self._build(flips[ok].reshape(order, n))

    def distance(self, x, y) -> int:
        return (self.mask(x) ^ self.mask(y)).bit_count()

    def projection(self, x, y, ell=None):
        """Fix the coordinates where y differs from x (plus one balancing coordinate when l is odd)."""
        x, y = self.check_vertex(x), self.check_vertex(y)
        if x == y:
            raise InvalidVertexError("projection needs y != x")
        mx, my = self.mask(x), self.mask(y)
        diff = mx ^ my
        fixed = _positions(diff, self.width)
        ell = len(fixed)
        if ell % 2:
            need_one = (my & diff).bit_count() < (ell + 1) // 2
            spare = [j for j in range(self.width)
                     if not diff >> j & 1 and bool(my >> j & 1) == need_one]
            if spare:
                fixed.append(spare[0])
        free = [j for j in range(self.width) if j not in set(fixed)]
        if not free:
            return ProjectionHandle(self, x, y, ell, single_vertex(self.canonical_K),
                                    np.array([y], dtype=np.int64))
        sub = middle_layer((len(free) + 1) // 2)
        fixed_val = my & sum(1 << j for j in fixed)
        embed = self._ids(fixed_val | deposit(sub.masks, free))
        return ProjectionHandle(self, x, y, ell, sub, embed)


class Odd(_MaskFamily):
    """O_n = K(2n-1, n-1): (n-1)-subsets of [2n-1], adjacent when disjoint.

    Element ``i`` of ``[2n-1]`` is bit ``i - 1``. Locally isomorphic to M_n
    within radius < n-1; the non-typical oracle is only evaluated there.
    """

    def __init__(self, spec):
        n = int(spec.n)
        if n < 2:
            raise InvalidFamilyError("odd graph needs n >= 2")
        width = 2 * n - 1
        if width > 63:
            raise InvalidFamilyError(f"odd n={n} does not fit a 64-bit word")
        order = math.comb(2 * n - 1, n - 1)
        if order > MAX_CSR_ORDER:
            raise BudgetExceededError(f"odd n={n} has {order} vertices (cap {MAX_CSR_ORDER})")
        self.spec = spec
        self.n = n
        self.width = width
        self.order = order
        self.canonical_K = 4
        self.min_degree = self.max_degree = n
        self.local_radius = n - 2
        self.full = (1 << width) - 1
        self.masks = _masks(width, (n - 1,))
        comp = self.full ^ self.masks
        bits = np.int64(1) << np.arange(width, dtype=np.int64)
        has = (comp[:, None] & bits[None, :]) != 0
        nb = (comp[:, None] ^ bits[None, :])[has].reshape(order, n)
        self._build(nb)

    def vertex_from_subset(self, elements) -> int:
        elements = set(int(e) for e in elements)
        if any(not 1 <= e <= self.width for e in elements):
            raise InvalidVertexError(f"elements must lie in 1..{self.width}")
        return self.vertex_of_mask(sum(1 << (e - 1) for e in elements))

    def subset(self, v) -> frozenset[int]:
        m = self.mask(v)
        return frozenset(i + 1 for i in range(self.width) if m >> i & 1)

    def label(self, v) -> str:
        return "{" + ",".join(map(str, sorted(self.subset(v)))) + "}"

    def parse(self, text: str) -> int:
        s = text.strip().strip("{}")
        try:
            return self.vertex_from_subset(int(t) for t in s.split(",") if t.strip())
        except ValueError:
            raise InvalidVertexError(f"cannot parse odd-graph vertex {text!r}") from None

    def distance(self, x, y) -> int:
        mx, my = self.mask(x), self.mask(y)
        if mx == my:
            return 0
        return min(2 * (mx & ~my).bit_count(), 2 * (mx & my).bit_count() + 1)

    def nontypical(self, x, y) -> bool:
        super().nontypical(x, y)
        d = self.distance(x, y)
        if d > self.local_radius:
            raise NotEvaluated(f"dist {d} beyond local radius {self.local_radius}")
        return False

    def nontypical_many(self, x, vertices, dists):
        return np.zeros(len(vertices), dtype=bool), np.asarray(dists) <= self.local_radius

    def projection(self, x, y, ell=None):
        """Set-system slice isomorphic to M_{n-l}.

        Pads a, b with the lexicographically least admissible a', b' and keeps
        vertices containing one of b|a', b'|a while avoiding the other.
        """
        x, y = self.check_vertex(x), self.check_vertex(y)
        if x == y:
            raise InvalidVertexError("projection needs y != x")
        mx, my = self.mask(x), self.mask(y)
        ell = self.distance(x, y)
        k = ell // 2
        if ell % 2 == 0:
            a, b = mx & ~my, my & ~mx
            a2 = _lowest(mx & my, k)
            b2 = _lowest(self.full & ~(mx | my), k)
        else:
            a, b = mx & my, self.full & ~(mx | my)
            a2 = _lowest(mx & ~my, k)
            b2 = _lowest(my & ~mx, k + 1)
        s1, s2 = b | a2, b2 | a
        free = _positions(self.full & ~(s1 | s2), self.width)
        n_sub = self.n - ell
        if n_sub < 1:
            raise InvalidFamilyError("projection radius larger than the family admits")
        sub = middle_layer(n_sub)
        low = (1 << len(free)) - 1
        type1 = np.bitwise_count(sub.masks) == n_sub - 1
        vmasks = np.where(type1, s1 | deposit(sub.masks, free),
                          s2 | deposit(low ^ sub.masks, free))
        return ProjectionHandle(self, x, y, ell, sub, self._ids(vmasks))
