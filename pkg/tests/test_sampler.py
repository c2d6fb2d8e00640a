import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkperc.families import explicit, grid, hypercube, middle_layer, odd, torus
from hkperc.oracle import exact_phi
from hkperc.process import ProcessSpec, Runner, sigma
from hkperc.sampler import (PhiEstimate, TrialRandomness, bisect_kstar, closure_kstar,
                            critical_values, estimate_pc, estimate_phi, percolation_indicators,
                            sample_infected, scan, theory_curves, trial_critical_p, uniform_block,
                            wilson)

MAJ = ProcessSpec.majority()
# closed forms evaluated with mpmath at 30 digits, rounded to 10 places
PC_Q1 = 0.2928932188  # 1 - 1/sqrt(2)
PC_Q2 = 0.1591035847  # 1 - 2**(-1/4)
PC_TILDE_100 = 0.3927016987


def test_uniforms_reproducible_and_lazy():
    a = TrialRandomness(7, 3, 10).uniforms()
    b = TrialRandomness(7, 3, 10).uniforms()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, TrialRandomness(7, 4, 10).uniforms())
    assert not np.array_equal(a, TrialRandomness(8, 3, 10).uniforms())
    r = TrialRandomness(7, 3, 10)
    assert [r.uniform_at(v) for v in range(10)] == a.tolist()
    block = uniform_block(7, 2, 3, 10)
    assert np.array_equal(block[1], a)
    assert ((a >= 0) & (a < 1)).all()
    with pytest.raises(ValueError):
        TrialRandomness(-1, 0, 3).uniforms()


def test_sample_infected_edges_and_coupling():
    g = hypercube(5)
    r = TrialRandomness(1, 0, g.order)
    assert sample_infected(g, 0.0, r).size == 0
    assert sample_infected(g, 1.0, r).size == g.order
    prev = set()
    for p in np.linspace(0, 1, 21):
        cur = set(sample_infected(g, p, r).tolist())
        assert prev <= cur
        prev = cur
    with pytest.raises(ValueError):
        sample_infected(g, 1.5, r)


def test_sample_size_mean_within_three_sigma():
    g = hypercube(10)
    U = uniform_block(2024, 0, 10 ** 4, g.order)
    sizes = (U < 0.5).sum(axis=1)
    sd = math.sqrt(g.order * 0.25 / 10 ** 4)
    assert abs(sizes.mean() - 512) <= 3 * sd
    r = TrialRandomness(2024, 17, g.order)
    assert sample_infected(g, 0.5, r).size == sizes[17]


def test_wilson_properties():
    for s, n in [(0, 10), (10, 10), (3, 7), (500, 1000)]:
        lo, hi = wilson(s, n)
        assert 0 <= lo <= s / n <= hi <= 1
    lo, hi = wilson(50, 100)
    assert (lo, hi) == pytest.approx((0.4038, 0.5962), abs=1e-4)
    with pytest.raises(ValueError):
        wilson(0, 0)


def test_phi_examples():
    est = estimate_phi(hypercube(1), MAJ, 0.5, 10 ** 5, 11)
    assert est.phi_hat == pytest.approx(0.75, abs=0.01)
    assert est.ci_low <= 0.75 <= est.ci_high
    est = estimate_phi(hypercube(2), MAJ, 0.5, 10 ** 5, 12)
    assert est.phi_hat == pytest.approx(0.9375, abs=0.01)
    assert estimate_phi(torus(4, 4), MAJ, 1.0, 10, 0).phi_hat == 1.0
    assert estimate_phi(torus(4, 4), MAJ, 0.0, 10, 0).phi_hat == 0.0


def test_trial_critical_p_examples():
    q1 = hypercube(1)
    assert trial_critical_p(q1, MAJ, TrialRandomness.fixed([0.3, 0.7])) == 0.3
    assert trial_critical_p(q1, MAJ, TrialRandomness.fixed([0.0, 0.0])) == 0.0
    assert trial_critical_p(q1, MAJ, TrialRandomness.fixed([1.0, 1.0])) == 1.0
    assert trial_critical_p(hypercube(4), ProcessSpec.rneighbour(0),
                            TrialRandomness(3, 0, 16)) == 0.0


def test_estimate_pc_examples():
    est = estimate_pc(hypercube(1), MAJ, 10 ** 5, 5)
    assert est.median == pytest.approx(PC_Q1, abs=0.01)
    assert est.tolerance == 0.0
    est = estimate_pc(hypercube(2), MAJ, 10 ** 5, 6)
    assert est.median == pytest.approx(PC_Q2, abs=0.01)
    zero = estimate_pc(torus(3, 3), ProcessSpec.rneighbour(0), 50, 1)
    assert zero.median == 0.0 and (zero.values == 0).all() and zero.phi(0.0) == 1.0
    q = est.quantiles
    assert q[0.05] <= q[0.25] <= est.median <= q[0.75] <= q[0.95]


COUPLING_GRAPHS = [hypercube(4), torus(3, 4), middle_layer(3), odd(3), grid(3, 3),
                   explicit([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4)])]
COUPLING_SPECS = [MAJ, ProcessSpec.majority(1), ProcessSpec.rneighbour(2),
                  ProcessSpec.majority(0, strict=True)]


@pytest.mark.parametrize("g", COUPLING_GRAPHS, ids=repr)
@pytest.mark.parametrize("spec", COUPLING_SPECS + [ProcessSpec.boot(1)], ids=str)
def test_coupling_is_a_step_function(g, spec):
    if spec.variant == "boot" and g.min_degree < 2:
        return
    runner = Runner(g, spec)
    pstar = critical_values(g, spec, 1000, 99)
    U = uniform_block(99, 0, 1000, g.order)
    grid_p = np.linspace(0, 1, 11)
    for t in range(0, 1000, 25):
        outcomes = [runner.percolates(U[t] < p if p < 1 else np.ones(g.order, bool))
                    for p in grid_p]
        assert outcomes == sorted(outcomes)
        # exact threshold: percolates at p* + tiny, not at p* itself unless p* = 0 or 1
        for p, o in zip(grid_p, outcomes):
            expect = p >= 1 or p > pstar[t] or runner.percolates(np.zeros(g.order, bool))
            assert o == expect


@pytest.mark.parametrize("g", COUPLING_GRAPHS, ids=repr)
@pytest.mark.parametrize("spec", COUPLING_SPECS, ids=str)
def test_closure_sweep_matches_bisection(g, spec):
    runner = Runner(g, spec)
    U = uniform_block(5, 0, 200, g.order)
    for t in range(200):
        perm = np.argsort(U[t], kind="mergesort")
        a = closure_kstar(g.kernel, runner.deg, runner.needs[0], perm, g.max_degree)
        b = bisect_kstar(g.kernel, runner.deg, runner.needs, perm, runner.max_rounds,
                         g.max_degree)
        assert a == b


@given(st.sampled_from(COUPLING_GRAPHS), st.sampled_from(COUPLING_SPECS),
       st.floats(0, 1), st.integers(0, 2 ** 32))
def test_ecdf_equals_estimate_phi(g, spec, t, seed):
    pc = estimate_pc(g, spec, 300, seed)
    est = estimate_phi(g, spec, t, 300, seed)
    assert pc.successes(t) == est.successes


def test_round_dependent_spec_uses_bisection():
    g = hypercube(5)
    spec = ProcessSpec.boot(2, gamma_scale=0.5)
    pstar = critical_values(g, spec, 200, 3)
    hits = percolation_indicators(g, spec, 0.2, 200, 3)
    assert np.array_equal(hits, pstar < 0.2)


def test_deterministic_across_workers():
    g = hypercube(8)
    a = estimate_pc(g, MAJ, 2000, 77, workers=1)
    b = estimate_pc(g, MAJ, 2000, 77, workers=8)
    assert np.array_equal(a.values, b.values) and a.median == b.median
    e1 = estimate_phi(g, MAJ, 0.3, 2000, 77, workers=1)
    e2 = estimate_phi(g, MAJ, 0.3, 2000, 77, workers=8)
    assert e1 == e2


def test_deterministic_across_block_sizes(monkeypatch):
    import hkperc.sampler as sampler
    g = torus(5, 5)
    ref = critical_values(g, MAJ, 300, 4)
    monkeypatch.setattr(sampler, "BLOCK_VALUES", 7 * 28)
    assert np.array_equal(ref, critical_values(g, MAJ, 300, 4, workers=3))


def test_wilson_coverage_on_single_edge():
    # Phi(p) = 2p - p^2 on one edge; seeds 0..199 fixed in advance
    p = 0.3
    truth = 2 * p - p * p
    covered = sum(
        (lambda e: e.ci_low <= truth <= e.ci_high)(estimate_phi(hypercube(1), MAJ, p, 400, s))
        for s in range(200))
    assert covered >= 0.93 * 200


def test_estimates_match_exact_phi():
    g = torus(3, 4)
    pc = estimate_pc(g, MAJ, 20000, 8)
    for p in (0.1, 0.2, 0.3, 0.5):
        exact = exact_phi(g, MAJ, p)
        assert abs(pc.phi(p) - exact) < 4 * math.sqrt(exact * (1 - exact) / 20000) + 1e-3


def test_phi_estimate_invariants():
    est = PhiEstimate.from_counts(0.4, 3, 9)
    assert est.phi_hat == 3 / 9 and est.ci_low <= est.phi_hat <= est.ci_high


def test_theory_curves_examples():
    c = theory_curves(100)
    assert c.pc_tilde == pytest.approx(PC_TILDE_100, abs=1e-9)
    assert c.lower == c.upper == c.pc_tilde
    c = theory_curves(1024, epsilon=0.0, lam=0.0)
    assert c.bbm == pytest.approx(c.pc_tilde, abs=1e-15)
    c = theory_curves(64, epsilon=0.1)
    assert c.lower < c.pc_tilde < c.upper
    with pytest.raises(ValueError):
        theory_curves(2)
    with pytest.raises(ValueError):
        theory_curves(10, epsilon=-0.1)


@given(st.integers(3, 10 ** 6), st.floats(0.001, 0.5), st.floats(-2, 2))
def test_theory_window_contains_point(d, eps, lam):
    c = theory_curves(d, epsilon=eps, lam=lam)
    assert c.lower < c.pc_tilde < c.upper
    assert c.pc_tilde == pytest.approx(0.5 - sigma(d) / 2)


def test_scan_rows_consistent():
    g = hypercube(6)
    rep = scan(g, MAJ, [0.0, 0.1, 0.2, 1.0], 500, 1, epsilon=0.1, lam=1.0)
    assert [r.p for r in rep.rows] == [0.0, 0.1, 0.2, 1.0]
    assert rep.rows[0].phi_hat == 0.0 and rep.rows[-1].phi_hat == 1.0
    succ = [r.successes for r in rep.rows]
    assert succ == sorted(succ)
    assert rep.theory.d == 6
    assert scan(hypercube(2), MAJ, [0.5], 10, 0).theory is None
    with pytest.raises(ValueError):
        scan(g, MAJ, [1.1], 10, 0)
