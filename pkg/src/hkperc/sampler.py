"""Monte Carlo estimation of Phi(p, G) and p_c(G) under a monotone coupling.

Trial ``t`` draws one uniform ``U_v`` per vertex from a Philox stream keyed by
``base_seed``; its values occupy counter blocks ``t * stride / 4 ...`` where
``stride`` is the order rounded up to a multiple of 4. Any single uniform can
therefore be recomputed without generating the rest, and blocks of trials can
be generated in one call. ``A_p = {v : U_v < p}`` is increasing in ``p``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np
from numba import njit
from numpy.random import Generator, Philox

from ._adjacency import fill_neighbours
from .graph_core import GraphFamily
from .process import ProcessSpec, Runner, sigma, simulate

WORKERS_ENV = "HKPERC_WORKERS"
# uniforms generated per block of trials
BLOCK_VALUES = 1 << 22


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _stride(order: int) -> int:
    return -(-order // 4) * 4


def _check_seed(base_seed: int) -> int:
    base_seed = int(base_seed)
    if not 0 <= base_seed < 1 << 64:
        raise ValueError("base_seed must lie in [0, 2**64)")
    return base_seed


def uniform_block(base_seed: int, start: int, count: int, order: int) -> np.ndarray:
    """Uniforms for trials ``start .. start + count - 1`` as a ``(count, order)`` array."""
    stride = _stride(order)
    gen = Generator(Philox(key=_check_seed(base_seed), counter=start * stride // 4))
    return gen.random(count * stride).reshape(count, stride)[:, :order]


@dataclass(frozen=True)
class TrialRandomness:
    """Per-vertex uniforms of one trial; ``values`` overrides the generator (tests)."""

    base_seed: int
    trial_index: int
    order: int
    values: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def fixed(cls, values) -> "TrialRandomness":
        values = np.asarray(values, dtype=np.float64)
        if ((values < 0) | (values > 1)).any():
            raise ValueError("fixed uniforms must lie in [0, 1]")
        return cls(0, 0, len(values), values)

    def uniforms(self) -> np.ndarray:
        if self.values is not None:
            return self.values
        return uniform_block(self.base_seed, self.trial_index, 1, self.order)[0]

    def uniform_at(self, v: int) -> float:
        if self.values is not None:
            return float(self.values[v])
        if not 0 <= v < self.order:
            raise IndexError(v)
        pos = self.trial_index * _stride(self.order) + v
        gen = Generator(Philox(key=_check_seed(self.base_seed), counter=pos // 4))
        return float(gen.random(4)[pos % 4])


def _members(u: np.ndarray, p: float) -> np.ndarray:
    return np.ones(len(u), dtype=bool) if p >= 1 else u < p


def sample_infected(graph: GraphFamily, p: float, randomness: TrialRandomness) -> np.ndarray:
    """Sorted ids of ``A_p = {v : U_v < p}`` (all of V at p = 1)."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return np.flatnonzero(_members(randomness.uniforms(), p))


def wilson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    z = NormalDist().inv_cdf(0.5 + level / 2)
    ph = successes / trials
    z2n = z * z / trials
    centre = (ph + z2n / 2) / (1 + z2n)
    half = z * math.sqrt(ph * (1 - ph) / trials + z2n / (4 * trials)) / (1 + z2n)
    # clamp rounding so that low <= phi_hat <= high always holds
    return max(0.0, min(centre - half, ph)), min(1.0, max(centre + half, ph))


@dataclass(frozen=True)
class PhiEstimate:
    p: float
    trials: int
    successes: int
    phi_hat: float
    ci_low: float
    ci_high: float
    level: float = 0.95

    @classmethod
    def from_counts(cls, p, successes, trials, level=0.95) -> "PhiEstimate":
        lo, hi = wilson(successes, trials, level)
        return cls(float(p), int(trials), int(successes), successes / trials, lo, hi, level)

    def to_dict(self) -> dict:
        return {"p": self.p, "trials": self.trials, "successes": self.successes,
                "phi_hat": self.phi_hat, "ci_low": self.ci_low, "ci_high": self.ci_high}


@dataclass(frozen=True)
class PcEstimate:
    """Per-trial critical probabilities and their summary.

    ``median`` is the lower sample median, i.e. ``inf{t : ECDF(t) >= 1/2}``.
    Each ``p*`` is an exact order statistic of its trial's uniforms, so the
    search tolerance is 0.
    """

    values: np.ndarray = field(repr=False)
    median: float
    quantiles: dict
    tolerance: float = 0.0
    empty_percolates: bool = False

    @property
    def trials(self) -> int:
        return len(self.values)

    def phi(self, t: float) -> float:
        """Empirical Phi(t): fraction of trials that percolate at t."""
        if t >= 1 or self.empty_percolates:
            return 1.0
        return float(np.mean(self.values < t))

    def successes(self, t: float) -> int:
        if t >= 1 or self.empty_percolates:
            return self.trials
        return int((self.values < t).sum())

    def to_dict(self) -> dict:
        return {"trials": self.trials, "median": self.median,
                "quantiles": {str(k): v for k, v in self.quantiles.items()},
                "tolerance": self.tolerance}


@dataclass(frozen=True)
class TheoryCurves:
    d: int
    delta: int
    Delta: int
    epsilon: float
    lam: float
    pc_tilde: float
    lower: float
    upper: float
    bbm: float

    def to_dict(self) -> dict:
        return {"d": self.d, "delta": self.delta, "Delta": self.Delta, "epsilon": self.epsilon,
                "lambda": self.lam, "pc_tilde": self.pc_tilde, "lower": self.lower,
                "upper": self.upper, "bbm": self.bbm}


def theory_curves(d: int, epsilon: float = 0.0, lam: float = 0.0,
                  delta: int | None = None, Delta: int | None = None) -> TheoryCurves:
    """Reference values: 1/2 - sigma(d)/2, the (1/2 +- eps) window at delta/Delta,
    and the log-log corrected point 1/2 - sqrt(ln d / d)/2 + lam ln ln d / sqrt(d ln d)."""
    delta = d if delta is None else delta
    Delta = d if Delta is None else Delta
    if min(d, delta, Delta) < 3:
        raise ValueError("theory curves need degrees >= 3 (ln ln d must be positive)")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    ln = math.log(d)
    return TheoryCurves(
        d, delta, Delta, float(epsilon), float(lam),
        pc_tilde=0.5 - sigma(d) / 2,
        lower=0.5 - (0.5 + epsilon) * sigma(delta),
        upper=0.5 - (0.5 - epsilon) * sigma(Delta),
        bbm=0.5 - 0.5 * math.sqrt(ln / d) + lam * math.log(ln) / math.sqrt(d * ln),
    )


def graph_theory(graph: GraphFamily, epsilon: float = 0.0, lam: float = 0.0) -> TheoryCurves | None:
    """Curves at d = min degree; None when the graph is too sparse for them."""
    if graph.min_degree < 3:
        return None
    return theory_curves(graph.min_degree, epsilon, lam, graph.min_degree, graph.max_degree)


# -- kernels ------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _phi_block(g, deg, needs, U, p, max_rounds, maxdeg, out):
    order = U.shape[1]
    for t in range(U.shape[0]):
        if p >= 1.0:
            seed = np.ones(order, dtype=np.bool_)
        else:
            seed = U[t] < p
        _, _, total, hit = simulate(g, deg, needs, seed, max_rounds, maxdeg)
        out[t] = -1 if hit else (1 if total == order else 0)


@njit(cache=True, nogil=True)
def closure_kstar(g, deg, need, perm, maxdeg):
    """Fewest leading vertices of ``perm`` whose closure is V, for fixed thresholds.

    The closure of a monotone fixed-threshold process does not depend on
    update order, so vertices are added one at a time and each addition is
    propagated asynchronously. Total work is O(|E|).
    """
    order = perm.shape[0]
    inset = np.zeros(order, dtype=np.bool_)
    cnt = np.zeros(order, dtype=np.int32)
    stack = np.empty(order, dtype=np.int64)
    buf = np.empty(max(maxdeg, 1), dtype=np.int64)
    sp = 0
    size = 0
    for v in range(order):
        if need[deg[v]] <= 0:
            inset[v] = True
            stack[sp] = v
            sp += 1
            size += 1
    j = 0
    while True:
        while sp > 0:
            sp -= 1
            u = stack[sp]
            k = fill_neighbours(g, u, buf)
            for t in range(k):
                w = buf[t]
                cnt[w] += 1
                if not inset[w] and cnt[w] >= need[deg[w]]:
                    inset[w] = True
                    stack[sp] = w
                    sp += 1
                    size += 1
        if size == order:
            return j
        v = perm[j]
        j += 1
        if not inset[v]:
            inset[v] = True
            stack[0] = v
            sp = 1
            size += 1


@njit(cache=True, nogil=True)
def bisect_kstar(g, deg, needs, perm, max_rounds, maxdeg):
    """Same quantity by binary search over synchronous runs; -1 if a run hit max_rounds."""
    order = perm.shape[0]
    seed = np.zeros(order, dtype=np.bool_)
    _, _, total, hit = simulate(g, deg, needs, seed, max_rounds, maxdeg)
    if hit:
        return -1
    if total == order:
        return 0
    lo = 0
    hi = order
    while hi - lo > 1:
        mid = (lo + hi) // 2
        seed[:] = False
        for j in range(mid):
            seed[perm[j]] = True
        _, _, total, hit = simulate(g, deg, needs, seed, max_rounds, maxdeg)
        if hit:
            return -1
        if total == order:
            hi = mid
        else:
            lo = mid
    return hi


@njit(cache=True, nogil=True)
def _pstar_block(g, deg, needs, U, use_closure, max_rounds, maxdeg, out):
    for t in range(U.shape[0]):
        perm = np.argsort(U[t], kind="mergesort")
        if use_closure:
            k = closure_kstar(g, deg, needs[0], perm, maxdeg)
        else:
            k = bisect_kstar(g, deg, needs, perm, max_rounds, maxdeg)
        if k < 0:
            out[t] = -1.0
        elif k == 0:
            out[t] = 0.0
        else:
            out[t] = U[t, perm[k - 1]]


# -- drivers ------------------------------------------------------------------


class _Engine:
    def __init__(self, graph: GraphFamily, spec: ProcessSpec):
        self.runner = Runner(graph, spec)
        self.graph = graph
        self.spec = spec
        # closure sweep is valid for fixed thresholds when only the fixpoint matters
        self.use_closure = spec.rows == 1 and spec.max_rounds is None

    def args(self):
        r = self.runner
        return self.graph.kernel, r.deg, r.needs

    def blocks(self, trials: int):
        size = max(1, BLOCK_VALUES // _stride(self.graph.order))
        return [(s, min(size, trials - s)) for s in range(0, trials, size)]


def _map(fn, items, workers):
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _round_limit():
    from .errors import RoundLimitError
    return RoundLimitError("a trial hit max_rounds before its fixpoint")


def percolation_indicators(graph, spec, p, trials, base_seed, workers=None) -> np.ndarray:
    """Per-trial percolation outcome of ``A_p`` by direct simulation."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eng = _Engine(graph, spec)
    g, deg, needs = eng.args()

    def work(block):
        start, count = block
        U = uniform_block(base_seed, start, count, graph.order)
        out = np.empty(count, dtype=np.int8)
        _phi_block(g, deg, needs, U, float(p), eng.runner.max_rounds, graph.max_degree, out)
        return out

    res = np.concatenate(_map(work, eng.blocks(trials), workers))
    if (res < 0).any():
        raise _round_limit()
    return res.astype(bool)


def estimate_phi(graph, spec, p, trials, base_seed, workers=None, level=0.95) -> PhiEstimate:
    """Fraction of ``trials`` independent ``A_p`` that percolate, with a Wilson interval."""
    hits = percolation_indicators(graph, spec, p, trials, base_seed, workers)
    return PhiEstimate.from_counts(p, int(hits.sum()), trials, level)


def _pstar_from_uniforms(eng: _Engine, U: np.ndarray) -> np.ndarray:
    g, deg, needs = eng.args()
    out = np.empty(U.shape[0], dtype=np.float64)
    _pstar_block(g, deg, needs, np.ascontiguousarray(U), eng.use_closure,
                 eng.runner.max_rounds, eng.graph.max_degree, out)
    if (out < 0).any():
        raise _round_limit()
    return out


def trial_critical_p(graph, spec, randomness: TrialRandomness) -> float:
    """The threshold p* of one coupled trial: ``A_p`` percolates iff ``p > p*``
    (or ``p = 1``, or the empty set already percolates, in which case p* = 0)."""
    U = randomness.uniforms()
    if len(U) != graph.order:
        raise ValueError("randomness does not match the graph order")
    return float(_pstar_from_uniforms(_Engine(graph, spec), U[None, :])[0])


def critical_values(graph, spec, trials, base_seed, workers=None) -> np.ndarray:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eng = _Engine(graph, spec)

    def work(block):
        start, count = block
        return _pstar_from_uniforms(eng, uniform_block(base_seed, start, count, graph.order))

    return np.concatenate(_map(work, eng.blocks(trials), workers))


QUANTILES = (0.05, 0.25, 0.75, 0.95)


def summarize(values: np.ndarray, empty_percolates: bool = False) -> PcEstimate:
    s = np.sort(values)
    median = float(s[math.ceil(len(s) / 2) - 1])
    qs = {q: float(np.quantile(s, q)) for q in QUANTILES}
    return PcEstimate(values, median, qs, 0.0, empty_percolates)


def estimate_pc(graph, spec, trials, base_seed, workers=None) -> PcEstimate:
    """Sample median of per-trial critical probabilities (estimates inf{p : Phi >= 1/2})."""
    values = critical_values(graph, spec, trials, base_seed, workers)
    empty = Runner(graph, spec).percolates(np.zeros(graph.order, dtype=bool))
    return summarize(values, empty)


@dataclass(frozen=True)
class ScanReport:
    rows: tuple[PhiEstimate, ...]
    pc: PcEstimate
    theory: TheoryCurves | None

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "pc": self.pc.to_dict(),
                "theory": self.theory.to_dict() if self.theory else None}


def scan(graph, spec, grid, trials, base_seed, workers=None, epsilon=0.0, lam=0.0,
         level=0.95) -> ScanReport:
    """Phi estimates on a p-grid from one set of coupled trials.

    Row ``p`` counts trials with ``p* < p`` (all trials at p = 1, or when the
    empty set percolates): these are exactly the trials whose ``A_p`` percolates.
    """
    grid = [float(p) for p in grid]
    if any(not 0 <= p <= 1 for p in grid):
        raise ValueError("grid points must lie in [0, 1]")
    pc = estimate_pc(graph, spec, trials, base_seed, workers)
    rows = tuple(PhiEstimate.from_counts(p, pc.successes(p), trials, level) for p in grid)
    return ScanReport(rows, pc, graph_theory(graph, epsilon, lam))
