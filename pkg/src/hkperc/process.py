"""Synchronous bootstrap dynamics: r-neighbour, majority(m) and Boot_k(gamma).

Every variant is lowered to a table ``needs[row, d]``: the number of infected
neighbours a degree-``d`` vertex needs to become infected. Round ``i`` (which
produces ``A_i`` from ``A_{i-1}``) uses row ``min(i - 1, rows - 1)``; only the
Boot process has more than one row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._adjacency import fill_neighbours
from .errors import InvalidVertexError, RoundLimitError
from .graph_core import GraphFamily

VARIANTS = ("majority", "rneighbour", "boot")
_EPS = 1e-9


def sigma(d) -> float:
    """sqrt(ln d / d)."""
    if d < 2:
        raise ValueError(f"sigma needs d >= 2, got {d}")
    return math.sqrt(math.log(d) / d)


def gamma(d) -> float:
    """sqrt(d / sqrt(ln d)), the Boot slack."""
    if d < 2:
        raise ValueError(f"gamma needs d >= 2, got {d}")
    return math.sqrt(d / math.sqrt(math.log(d)))


@dataclass(frozen=True)
class ProcessSpec:
    """Which process to run.

    ``max_rounds=None`` means ``|V| + k + 1``, enough for any run to reach its
    fixpoint since every non-final round infects at least one vertex.
    """

    variant: str = "majority"
    m: int = 0
    r: int = 0
    k: int = 1
    gamma_scale: float = 1.0
    strict: bool = False
    max_rounds: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown process variant {self.variant!r}")
        if self.m < 0:
            raise ValueError("majority offset m must be >= 0")
        if self.r < 0:
            raise ValueError("r must be >= 0")
        if self.variant == "boot":
            if self.k < 1:
                raise ValueError("boot needs k >= 1")
            if not self.gamma_scale > 0:
                raise ValueError("gamma_scale must be positive")
        if self.max_rounds is not None and self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")

    @classmethod
    def majority(cls, m: int = 0, **kw) -> "ProcessSpec":
        return cls("majority", m=m, **kw)

    @classmethod
    def rneighbour(cls, r: int, **kw) -> "ProcessSpec":
        return cls("rneighbour", r=r, **kw)

    @classmethod
    def boot(cls, k: int, gamma_scale: float = 1.0, **kw) -> "ProcessSpec":
        return cls("boot", k=k, gamma_scale=gamma_scale, **kw)

    @property
    def rows(self) -> int:
        return self.k + 1 if self.variant == "boot" else 1

    def to_dict(self) -> dict:
        out = {"variant": self.variant, "strict": self.strict, "max_rounds": self.max_rounds}
        if self.variant == "majority":
            out["m"] = self.m
        elif self.variant == "rneighbour":
            out["r"] = self.r
        else:
            out["k"] = self.k
            out["gamma_scale"] = self.gamma_scale
        return out

    def round_limit(self, graph: GraphFamily) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        return graph.order + self.rows + 1

    def threshold(self, d: int, ell: int = 0) -> float:
        """Real-valued threshold for a degree-``d`` vertex entering round ``ell + 1``."""
        if self.variant == "majority":
            return d / 2 + self.m
        if self.variant == "rneighbour":
            return float(self.r)
        return d / 2 - max(0, self.k - ell) * self.gamma_scale * gamma(d)

    def need(self, d: int, ell: int = 0) -> int:
        """Smallest infected-neighbour count that triggers infection."""
        if self.variant == "majority":
            # 2c >= d + 2m (or > when strict), in integers
            s = d + 2 * self.m
            return s // 2 + 1 if self.strict else (s + 1) // 2
        if self.variant == "rneighbour":
            return self.r + 1 if self.strict else self.r
        t = self.threshold(d, ell)
        n = math.floor(t + _EPS) + 1 if self.strict else math.ceil(t - _EPS)
        return max(0, n)

    def needs_table(self, graph: GraphFamily) -> np.ndarray:
        if self.variant == "boot" and graph.min_degree < 2:
            raise ValueError("boot process needs minimum degree >= 2")
        lo = graph.min_degree
        out = np.zeros((self.rows, graph.max_degree + 1), dtype=np.int32)
        for ell in range(self.rows):
            for d in range(lo, graph.max_degree + 1):
                out[ell, d] = self.need(d, ell)
        return out


@dataclass
class InfectionState:
    """Infected set after ``round`` synchronous rounds."""

    infected: np.ndarray
    frontier: np.ndarray
    round: int
    infection_round: np.ndarray

    def copy(self) -> "InfectionState":
        return InfectionState(self.infected.copy(), self.frontier.copy(), self.round,
                              self.infection_round.copy())


@dataclass
class Trace:
    """Outcome of one run.

    ``infection_round[v]`` is the round in which ``v`` was infected (0 for the
    initial set, -1 if never); ``A_i`` is ``{v : 0 <= infection_round[v] <= i}``.
    """

    percolated: bool
    rounds_to_stabilize: int
    final: np.ndarray = field(repr=False)
    infection_round: np.ndarray = field(repr=False)
    stabilized: bool = True

    @property
    def final_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.final)

    @property
    def final_size(self) -> int:
        return int(self.final.sum())

    def infected_by(self, i: int) -> np.ndarray:
        ir = self.infection_round
        return (ir >= 0) & (ir <= i)


def as_mask(graph: GraphFamily, vertices) -> np.ndarray:
    """Boolean membership array from an id iterable or a boolean array."""
    arr = np.asarray(vertices)
    if arr.dtype == bool:
        if arr.shape != (graph.order,):
            raise InvalidVertexError("boolean vertex set has the wrong length")
        return arr.copy()
    ids = np.asarray(list(vertices) if arr.ndim == 0 else arr, dtype=np.int64).ravel()
    if len(ids) and (ids.min() < 0 or ids.max() >= graph.order):
        raise InvalidVertexError("vertex set contains ids outside the graph")
    out = np.zeros(graph.order, dtype=bool)
    out[ids] = True
    return out


def initial_state(graph: GraphFamily, A0) -> InfectionState:
    infected = as_mask(graph, A0)
    ir = np.where(infected, 0, -1).astype(np.int32)
    return InfectionState(infected, np.flatnonzero(infected), 0, ir)


@njit(cache=True, nogil=True)
def _count_infected(g, infected, maxdeg):
    order = infected.shape[0]
    cnt = np.zeros(order, dtype=np.int32)
    buf = np.empty(max(maxdeg, 1), dtype=np.int64)
    for v in range(order):
        if infected[v]:
            k = fill_neighbours(g, v, buf)
            for t in range(k):
                cnt[buf[t]] += 1
    return cnt


def step(graph: GraphFamily, spec: ProcessSpec, state: InfectionState) -> InfectionState:
    """One synchronous round by full recount (the reference route; ``run`` is incremental)."""
    needs = spec.needs_table(graph)
    row = needs[min(state.round, needs.shape[0] - 1)]
    cnt = _count_infected(graph.kernel, state.infected, graph.max_degree)
    new = ~state.infected & (cnt >= row[graph.degrees])
    infected = state.infected | new
    ir = state.infection_round.copy()
    ir[new] = state.round + 1
    return InfectionState(infected, np.flatnonzero(new), state.round + 1, ir)


@njit(cache=True, nogil=True)
def simulate(g, deg, needs, seed, max_rounds, maxdeg):
    """Incremental-count synchronous simulation.

    Returns ``(infection_round, last_round, total_infected, hit_limit)``.
    Rounds whose threshold row differs from the previous round's re-test every
    uninfected vertex; later rounds only look at neighbours of the frontier.
    """
    order = seed.shape[0]
    nrows = needs.shape[0]
    ir = np.full(order, -1, dtype=np.int32)
    cnt = np.zeros(order, dtype=np.int32)
    stamp = np.full(order, -1, dtype=np.int32)
    buf = np.empty(max(maxdeg, 1), dtype=np.int64)
    front = np.empty(order, dtype=np.int64)
    new = np.empty(order, dtype=np.int64)
    nf = 0
    for v in range(order):
        if seed[v]:
            ir[v] = 0
            front[nf] = v
            nf += 1
    total = nf
    for j in range(nf):
        k = fill_neighbours(g, front[j], buf)
        for t in range(k):
            cnt[buf[t]] += 1
    last = 0
    hit = False
    i = 0
    while total < order:
        i += 1
        need = needs[min(i - 1, nrows - 1)]
        nn = 0
        if i <= nrows:
            for v in range(order):
                if ir[v] < 0 and cnt[v] >= need[deg[v]]:
                    new[nn] = v
                    nn += 1
        else:
            for j in range(nf):
                k = fill_neighbours(g, front[j], buf)
                for t in range(k):
                    w = buf[t]
                    if ir[w] < 0 and stamp[w] != i:
                        stamp[w] = i
                        if cnt[w] >= need[deg[w]]:
                            new[nn] = w
                            nn += 1
        if nn == 0:
            break
        if i > max_rounds:
            hit = True
            break
        for j in range(nn):
            ir[new[j]] = i
        for j in range(nn):
            k = fill_neighbours(g, new[j], buf)
            for t in range(k):
                cnt[buf[t]] += 1
        front, new = new, front
        nf = nn
        total += nn
        last = i
    return ir, last, total, hit


class Runner:
    """Pre-lowered (graph, spec) pair for repeated runs on different seed sets."""

    def __init__(self, graph: GraphFamily, spec: ProcessSpec):
        self.graph = graph
        self.spec = spec
        self.needs = spec.needs_table(graph)
        self.deg = graph.degrees
        self.max_rounds = spec.round_limit(graph)

    def raw(self, seed: np.ndarray):
        return simulate(self.graph.kernel, self.deg, self.needs, seed, self.max_rounds,
                        self.graph.max_degree)

    def percolates(self, seed: np.ndarray) -> bool:
        _, _, total, hit = self.raw(seed)
        if hit:
            raise RoundLimitError(f"no fixpoint within {self.max_rounds} rounds")
        return total == self.graph.order

    def run(self, A0) -> Trace:
        seed = as_mask(self.graph, A0)
        ir, last, total, hit = self.raw(seed)
        trace = Trace(total == self.graph.order, int(last), ir >= 0, ir, not hit)
        if hit:
            raise RoundLimitError(f"no fixpoint within {self.max_rounds} rounds", trace)
        return trace


def run(graph: GraphFamily, spec: ProcessSpec, A0) -> Trace:
    """Iterate synchronous rounds from ``A0`` to the fixpoint.

    Raises :class:`RoundLimitError` (carrying the partial trace) if
    ``spec.max_rounds`` rounds pass without reaching it.
    """
    return Runner(graph, spec).run(A0)
