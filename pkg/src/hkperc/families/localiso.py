"""Explicit local isomorphisms: odd graph vs middle layer, folded cube vs cube."""

from __future__ import annotations

from ..errors import InvalidFamilyError, RadiusRangeError
from ..graph_core import GraphFamily, Traversal
from .cube import Folded, Hypercube
from .kneser import MiddleLayer, Odd


def _permute(mask: int, perm: dict[int, int]) -> int:
    return sum(1 << perm[i] for i in perm if mask >> i & 1)


def _odd_to_middle(odd: Odd, x_a: int, mid: MiddleLayer, x_b: int, ell: int):
    """Indicator on even spheres, indicator of the complement on odd spheres,
    then an automorphism of M_n carrying x_a's image onto x_b."""
    full = odd.full
    src = odd.mask(x_a)
    tgt = mid.mask(x_b)
    flip = tgt.bit_count() == odd.n
    if flip:
        tgt ^= full
    ones_s = [i for i in range(odd.width) if src >> i & 1]
    ones_t = [i for i in range(odd.width) if tgt >> i & 1]
    zeros_s = [i for i in range(odd.width) if not src >> i & 1]
    zeros_t = [i for i in range(odd.width) if not tgt >> i & 1]
    perm = dict(zip(ones_s + zeros_s, ones_t + zeros_t))

    def phi(v: int, d: int) -> int:
        m = odd.mask(v)
        if d % 2:
            m ^= full
        m = _permute(m, perm)
        if flip:
            m ^= full
        return mid.vertex_of_mask(m)

    return phi


def _folded_to_cube(fold: Folded, x_a: int, cube: Hypercube, x_b: int, ell: int):
    """Lift w to Q_n: short way round keeps the offset, the long way complements
    it and sets the extra antipodal coordinate."""
    low = (1 << fold.width) - 1
    top = 1 << fold.width

    def phi(v: int, d: int) -> int:
        delta = v ^ x_a
        if delta.bit_count() > ell:
            delta = (low ^ delta) | top
        return x_b ^ delta

    return phi


def local_iso_check(family_a: GraphFamily, x_a, family_b: GraphFamily, x_b, ell: int) -> bool:
    """True iff the explicit map is an isomorphism B_a(x_a, l) -> B_b(x_b, l).

    Supported pairs (either order): (odd n, middle_layer n) with l < n-1 and
    (folded n, hypercube n) with l < floor(n/2).
    """
    if isinstance(family_a, (MiddleLayer, Hypercube)) and isinstance(family_b, (Odd, Folded)):
        family_a, x_a, family_b, x_b = family_b, x_b, family_a, x_a
    if isinstance(family_a, Odd) and isinstance(family_b, MiddleLayer):
        limit, build = family_a.n - 1, _odd_to_middle
    elif isinstance(family_a, Folded) and isinstance(family_b, Hypercube):
        limit, build = family_a.n // 2, _folded_to_cube
    else:
        raise InvalidFamilyError("local isomorphism only defined for (odd, middle_layer) "
                                 "and (folded, hypercube)")
    if family_a.n != family_b.n:
        raise InvalidFamilyError("local isomorphism needs equal n")
    if not 0 <= ell < limit:
        raise RadiusRangeError(f"radius {ell} outside 0..{limit - 1}")
    x_a, x_b = family_a.check_vertex(x_a), family_b.check_vertex(x_b)

    va, da = Traversal(family_a).distances(x_a, ell)
    vb, _ = Traversal(family_b).distances(x_b, ell)
    phi = build(family_a, x_a, family_b, x_b, ell)
    image = {}
    for v, d in zip(va.tolist(), da.tolist()):
        try:
            image[v] = phi(v, d)
        except Exception:
            return False
    if len(set(image.values())) != len(image) or set(image.values()) != set(vb.tolist()):
        return False
    ball_a = set(image)
    ball_b = set(vb.tolist())
    for v, w in image.items():
        nb_a = {image[u] for u in family_a.neighbour_array(v).tolist() if u in ball_a}
        nb_b = {u for u in family_b.neighbour_array(w).tolist() if u in ball_b}
        if nb_a != nb_b:
            return False
    return True
