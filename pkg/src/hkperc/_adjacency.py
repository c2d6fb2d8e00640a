"""Numba kernels for implicit adjacency.

Every family lowers to one kernel tuple ``g`` with a fixed layout so that all
jitted code compiles once::

    (kind, nbits, fold, radix, stride, boff, bptr, bidx, cptr, cidx)

``kind`` selects the neighbour rule:

* ``CUBE``: flip each of the ``nbits`` low bits, plus ``v ^ fold`` if ``fold``.
* ``PRODUCT``: mixed-radix product; coordinate ``i`` has digit
  ``(v // stride[i]) % radix[i]`` and a small base graph stored as CSR rows
  ``bptr[boff[i] + digit] .. bptr[boff[i] + digit + 1]`` into ``bidx``.
* ``CSR``: materialised adjacency ``cidx[cptr[v]:cptr[v + 1]]``.
"""

import numpy as np
from numba import njit

CUBE = 0
PRODUCT = 1
CSR = 2

_EMPTY = np.zeros(0, dtype=np.int64)


def make_kernel(kind, nbits=0, fold=0, radix=_EMPTY, stride=_EMPTY, boff=_EMPTY,
                bptr=_EMPTY, bidx=_EMPTY, cptr=_EMPTY, cidx=_EMPTY):
    as64 = lambda a: np.ascontiguousarray(a, dtype=np.int64)
    return (np.int64(kind), np.int64(nbits), np.int64(fold), as64(radix), as64(stride),
            as64(boff), as64(bptr), as64(bidx), as64(cptr), as64(cidx))


@njit(cache=True, nogil=True)
def fill_neighbours(g, v, out):
    """Write the neighbours of ``v`` into ``out``; return how many."""
    kind = g[0]
    k = 0
    if kind == 0:
        nbits = g[1]
        one = np.int64(1)
        for i in range(nbits):
            out[k] = v ^ (one << i)
            k += 1
        if g[2] != 0:
            out[k] = v ^ g[2]
            k += 1
    elif kind == 1:
        radix = g[3]
        stride = g[4]
        boff = g[5]
        bptr = g[6]
        bidx = g[7]
        for i in range(radix.shape[0]):
            digit = (v // stride[i]) % radix[i]
            row = boff[i] + digit
            for j in range(bptr[row], bptr[row + 1]):
                out[k] = v + (bidx[j] - digit) * stride[i]
                k += 1
    else:
        cptr = g[8]
        cidx = g[9]
        for j in range(cptr[v], cptr[v + 1]):
            out[k] = cidx[j]
            k += 1
    return k


@njit(cache=True, nogil=True)
def all_degrees(g, order, maxdeg):
    out = np.empty(order, dtype=np.int32)
    buf = np.empty(max(maxdeg, 1), dtype=np.int64)
    for v in range(order):
        out[v] = fill_neighbours(g, v, buf)
    return out


@njit(cache=True, nogil=True)
def neighbour_table(g, vertices, maxdeg):
    """Rows of neighbours for ``vertices``, padded with -1."""
    m = vertices.shape[0]
    out = np.full((m, max(maxdeg, 1)), -1, dtype=np.int64)
    buf = np.empty(max(maxdeg, 1), dtype=np.int64)
    for i in range(m):
        k = fill_neighbours(g, vertices[i], buf)
        for j in range(k):
            out[i, j] = buf[j]
    return out


@njit(cache=True, nogil=True)
def bfs_dense(g, src, cap, dist, queue, maxdeg):
    """Capped BFS from ``src`` over a dense ``dist`` array pre-filled with -1.

    Visited vertices are appended to ``queue`` in BFS order (so layers are
    contiguous). Returns ``(count, complete)``; ``complete`` is False when the
    queue (the budget) filled up first. The caller resets ``dist`` on
    ``queue[:count]``.
    """
    budget = queue.shape[0]
    buf = np.empty(max(maxdeg, 1), dtype=np.int64)
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du >= cap:
            continue
        k = fill_neighbours(g, u, buf)
        for j in range(k):
            w = buf[j]
            if dist[w] < 0:
                if tail >= budget:
                    return tail, False
                dist[w] = du + 1
                queue[tail] = w
                tail += 1
    return tail, True
