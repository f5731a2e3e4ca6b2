import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import ring, theta_graph, two_rings
from loopcalc import (
    GeneralizedLoop,
    IsingParams,
    LoopTerm,
    NonPositiveSumWarning,
    TooLarge,
    enumerate_generalized_loops,
    exact_log_z,
    ising_grid_forney,
    ising_log_z,
    loop_terms,
    loop_weight,
    run_bp,
    sample_couplings,
    search_generalized_loops,
    truncated_loop_series,
    two_core,
    two_regular_filter,
)
from loopcalc.random_graphs import random_loopy_forney, random_planar_forney


def test_ring_has_one_loop():
    loops = enumerate_generalized_loops(ring(3))
    assert [c.edges for c in loops] == [(0, 1, 2)]
    assert loops[0].is_two_regular()


def test_two_disjoint_rings():
    loops = enumerate_generalized_loops(two_rings(3, 4))
    assert [c.edges for c in loops] == [(0, 1, 2), (3, 4, 5, 6), (0, 1, 2, 3, 4, 5, 6)]


def test_theta_graph_loops():
    g = theta_graph()
    loops = enumerate_generalized_loops(g)
    assert len(loops) == 4
    two_reg = two_regular_filter(loops)
    assert len(two_reg) == 3
    full = [c for c in loops if not c.is_two_regular()]
    assert full[0].triplets() == (0, 1)


def test_loops_are_valid_and_canonical():
    g = random_loopy_forney(np.random.default_rng(2))
    core, _ = two_core(g)
    loops = enumerate_generalized_loops(core)
    assert loops == sorted(loops)
    for c in loops:
        assert c.size == len(c.edges) > 0
        assert all(d >= 2 for _, d in c.degrees)


def test_scan_cap():
    g = ising_grid_forney(IsingParams(3, 3, 1.0, 0.0, seed=0))
    core, _ = two_core(g)
    with pytest.raises(TooLarge):
        enumerate_generalized_loops(core)
    assert len(search_generalized_loops(core)) > 0


def test_scan_chunking():
    g = random_loopy_forney(np.random.default_rng(8))
    core, _ = two_core(g)
    assert enumerate_generalized_loops(core, chunk_bits=3) == enumerate_generalized_loops(core)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_search_matches_scan(seed):
    rng = np.random.default_rng(seed)
    g = random_planar_forney(rng, rows=3, cols=int(rng.integers(3, 6)), drop=0.2)
    core, _ = two_core(g)
    if len(core.edges) > 18:
        return
    assert search_generalized_loops(core) == enumerate_generalized_loops(core)


def test_uniform_tables_zero_weights():
    g = theta_graph(tables={v: [1.0] * (2 ** d) for v, d in {0: 3, 1: 3, 2: 2, 3: 2, 4: 2}.items()})
    bp = run_bp(g)
    for c in enumerate_generalized_loops(g):
        assert loop_weight(bp, c) == 0.0


def test_ising_ring_weight_is_tanh_product():
    js = [0.3, -0.7, 1.1, 0.2, -0.4]
    g = ring(5, couplings=js)
    bp = run_bp(g)
    (c,) = enumerate_generalized_loops(g)
    assert loop_weight(bp, c) == pytest.approx(math.prod(math.tanh(j) for j in js), abs=1e-12)
    # and the series closes: Z = Z_BP (1 + r)
    assert truncated_loop_series(bp, loop_terms(bp, g, [c])).log_z == pytest.approx(exact_log_z(g), abs=1e-12)


def test_zero_field_2x2_cell():
    params = IsingParams(2, 2, 1.0, 0.0, seed=5)
    g = ising_grid_forney(params)
    bp = run_bp(g)
    core, _ = two_core(g)
    terms = loop_terms(bp, core, enumerate_generalized_loops(core))
    exact = ising_log_z(sample_couplings(params))
    assert truncated_loop_series(bp, terms).log_z == pytest.approx(exact, abs=1e-10)
    # only the 2-regular cell survives at zero field
    nonzero = [t for t in terms if abs(t.weight) > 1e-12]
    assert len(nonzero) == 1 and nonzero[0].loop.is_two_regular()


def test_truncation_endpoints():
    g = random_loopy_forney(np.random.default_rng(4))
    bp = run_bp(g)
    core, _ = two_core(g)
    terms = loop_terms(bp, core, enumerate_generalized_loops(core))
    assert truncated_loop_series(bp, terms, 0).log_z == bp.bethe_log_z
    assert truncated_loop_series(bp, terms).log_z == pytest.approx(exact_log_z(g), abs=1e-8)


def test_terms_sorted_by_magnitude():
    g = random_loopy_forney(np.random.default_rng(6))
    bp = run_bp(g)
    core, _ = two_core(g)
    terms = loop_terms(bp, core, enumerate_generalized_loops(core))
    mags = [abs(t.weight) for t in terms]
    assert mags == sorted(mags, reverse=True)
    for t in terms:
        assert t.weight == pytest.approx(loop_weight(bp, t.loop), rel=1e-13)


def test_nonpositive_sum_reported():
    bp = run_bp(ring(3, couplings=[0.5] * 3))
    fake = GeneralizedLoop.from_edges(ring(3), [0, 1, 2])
    with pytest.warns(NonPositiveSumWarning):
        v = truncated_loop_series(bp, [LoopTerm(fake, -3.0)])
    assert v.log_z is None and not v.positive
    assert v.signed_z == pytest.approx(-2.0 * math.exp(bp.bethe_log_z))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_loop_series_totality(seed):
    g = random_loopy_forney(np.random.default_rng(seed), min_triplets=0)
    bp = run_bp(g)
    core, _ = two_core(g)
    terms = loop_terms(bp, core, enumerate_generalized_loops(core))
    assert truncated_loop_series(bp, terms).log_z == pytest.approx(exact_log_z(g), rel=1e-8)


def test_attractive_weights_nonnegative():
    for seed in range(3):
        params = IsingParams(3, 3, 1.0, 1.0, "attractive", seed=seed)
        g = ising_grid_forney(params)
        bp = run_bp(g)
        core, _ = two_core(g)
        loops = search_generalized_loops(core)
        ws = [t.weight for t in loop_terms(bp, core, loops)]
        assert min(ws) >= -1e-12
        assert bp.bethe_log_z <= ising_log_z(sample_couplings(params)) + 1e-12
