import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import ising_pair, leaf_pair, ring, ring_with_pendant, theta_graph
from loopcalc import (
    DanglingEdge,
    DegreeTooHigh,
    InconsistentRotation,
    InvalidGraph,
    IsingParams,
    MalformedTable,
    NonPlanarEmbedding,
    TooLarge,
    ZeroPartition,
    build_forney_graph,
    contract_log_z,
    exact_log_z,
    ising_grid_forney,
    ising_log_z,
    load_graph,
    sample_couplings,
    save_graph,
    two_core,
)
from loopcalc.embedding import trace_faces
from loopcalc.ising import forney_from_couplings
from loopcalc.random_graphs import random_planar_forney, random_tree_forney


def brute_grid_log_z(c):
    """Independent spin sum, written without any vectorization."""
    rows, cols = c.shape
    terms = []
    for bits in itertools.product((-1, 1), repeat=rows * cols):
        s = np.array(bits).reshape(rows, cols)
        e = float(np.sum(c.horizontal * s[:, :-1] * s[:, 1:]))
        e += float(np.sum(c.vertical * s[:-1, :] * s[1:, :]))
        e += float(np.sum(c.fields * s))
        terms.append(e)
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))


# ---------------------------------------------------------------------------
# construction and validation


def test_ring_of_three_is_valid():
    g = ring(3)
    assert g.n_components() == 1
    assert len(g.faces()) == 2


def test_degree_four_rejected():
    nodes = [{"id": 0, "edges": [0, 1, 2, 3], "table": [1.0] * 16}]
    nodes += [{"id": i, "edges": [i - 1], "table": [1.0, 1.0]} for i in range(1, 5)]
    edges = [{"id": i, "ends": [0, i + 1]} for i in range(4)]
    with pytest.raises(DegreeTooHigh):
        build_forney_graph(nodes, edges)


def test_path_with_leaves_is_valid():
    g = leaf_pair()
    assert [g.degree(a) for a in g.node_ids] == [1, 1]


@pytest.mark.parametrize("table", [[1.0, 1.0, 1.0], [1.0, -1.0], [0.0, 0.0], [1.0, math.nan]])
def test_bad_tables(table):
    with pytest.raises(MalformedTable):
        build_forney_graph(
            [{"id": 0, "edges": [0], "table": table}, {"id": 1, "edges": [0], "table": [1, 1]}],
            [{"id": 0, "ends": [0, 1]}],
        )


def test_dangling_edge():
    with pytest.raises(DanglingEdge):
        build_forney_graph([{"id": 0, "edges": [0], "table": [1, 1]}], [{"id": 0, "ends": [0]}])
    with pytest.raises(DanglingEdge):
        build_forney_graph([{"id": 0, "edges": [0], "table": [1, 1]}], [{"id": 0, "ends": [0, 9]}])


def test_self_loop_and_parallel_edges():
    with pytest.raises(InvalidGraph):
        build_forney_graph([{"id": 0, "edges": [0, 0], "table": [1] * 4}], [{"id": 0, "ends": [0, 0]}])
    with pytest.raises(InvalidGraph):
        build_forney_graph(
            [{"id": 0, "edges": [0, 1], "table": [1] * 4}, {"id": 1, "edges": [0, 1], "table": [1] * 4}],
            [{"id": 0, "ends": [0, 1]}, {"id": 1, "ends": [0, 1]}],
        )


def test_rotation_must_list_incident_edges():
    with pytest.raises(InvalidGraph):
        build_forney_graph(
            [{"id": 0, "edges": [0], "table": [1, 1]}, {"id": 1, "edges": [], "table": [1]}],
            [{"id": 0, "ends": [0, 1]}],
        )


def k4(rotation_flip=False):
    # K4 drawn with node 3 inside triangle 0-1-2; rotations by angle
    pos = {0: (0.0, 0.0), 1: (2.0, 0.0), 2: (1.0, 2.0), 3: (1.0, 0.7)}
    ends = {0: (0, 1), 1: (1, 2), 2: (2, 0), 3: (0, 3), 4: (1, 3), 5: (2, 3)}
    rot = {}
    for v in pos:
        inc = [e for e, ab in ends.items() if v in ab]
        def ang(e):
            o = ends[e][0] if ends[e][1] == v else ends[e][1]
            return math.atan2(pos[o][1] - pos[v][1], pos[o][0] - pos[v][0])
        rot[v] = sorted(inc, key=ang)
    if rotation_flip:
        rot[3] = rot[3][::-1]
    nodes = [{"id": v, "edges": r, "table": [1.0] * 8} for v, r in rot.items()]
    return build_forney_graph(nodes, [{"id": e, "ends": list(ab)} for e, ab in ends.items()])


def test_euler_check_detects_bad_rotation():
    g = k4()
    assert len(g.faces()) == 4
    with pytest.raises(NonPlanarEmbedding):
        k4(rotation_flip=True)


def test_trace_faces_grid_of_cells():
    # 3x3 vertices, 12 edges, rotations from the drawing
    pos = {(r, c): (c, -r) for r in range(3) for c in range(3)}
    vid = {p: i for i, p in enumerate(sorted(pos))}
    ends = []
    for r in range(3):
        for c in range(3):
            if c < 2:
                ends.append((vid[(r, c)], vid[(r, c + 1)]))
            if r < 2:
                ends.append((vid[(r, c)], vid[(r + 1, c)]))
    xy = {vid[p]: pos[p] for p in pos}
    rot = []
    for v in range(9):
        inc = [k for k, ab in enumerate(ends) if v in ab]
        def ang(k):
            o = ends[k][0] if ends[k][1] == v else ends[k][1]
            return math.atan2(xy[o][1] - xy[v][1], xy[o][0] - xy[v][0])
        rot.append(sorted(inc, key=ang))
    faces = trace_faces(9, ends, rot)
    assert len(faces) == 5
    assert sorted(len(f) for f in faces) == [4, 4, 4, 4, 8]
    assert sum(len(f) for f in faces) == 2 * len(ends)


def test_trace_faces_inconsistent_rotation():
    with pytest.raises(InconsistentRotation):
        trace_faces(3, [(0, 1), (1, 2)], [[0], [0], [1]])


def test_faces_cover_each_dart_once():
    for seed in range(10):
        g = random_planar_forney(np.random.default_rng(seed))
        darts = [d for f in g.faces() for d in f.darts]
        assert len(darts) == len(set(darts)) == 2 * len(g.edges)


def test_json_round_trip(tmp_path):
    g = theta_graph()
    save_graph(g, tmp_path / "g.json")
    h = load_graph(tmp_path / "g.json")
    assert h.to_dict() == g.to_dict()


# ---------------------------------------------------------------------------
# exact oracles


def test_two_leaves_log2():
    assert exact_log_z(leaf_pair()) == pytest.approx(math.log(2), abs=1e-15)


def test_single_node_no_edges():
    g = build_forney_graph([{"id": 0, "edges": [], "table": [2.5]}], [])
    assert exact_log_z(g) == pytest.approx(math.log(2.5))
    assert contract_log_z(g) == pytest.approx(math.log(2.5))


def test_ising_ring_matches_hand_sum():
    g = ring(3, couplings=[0.5] * 3)
    hand = sum(math.exp(0.5 * (s0 * s1 + s1 * s2 + s2 * s0))
               for s0, s1, s2 in itertools.product((-1, 1), repeat=3))
    assert exact_log_z(g) == pytest.approx(math.log(hand), abs=1e-13)
    # transfer matrix: tr(T^3) with eigenvalues 2cosh J, 2sinh J
    tm = (2 * math.cosh(0.5)) ** 3 + (2 * math.sinh(0.5)) ** 3
    assert math.log(hand) == pytest.approx(math.log(tm), abs=1e-13)


def test_table_bit_convention():
    # leaf table (w-, w+) against an edge forced to +1 by the other leaf
    g = leaf_pair((2.0, 3.0), (0.0, 1.0))
    assert exact_log_z(g) == pytest.approx(math.log(3.0))
    # degree-2 node: bit 0 of the index is the spin at slot 0
    nodes = [
        {"id": 0, "edges": [0, 1], "table": [0.0, 5.0, 0.0, 0.0]},  # index 1: slot0=+1, slot1=-1
        {"id": 1, "edges": [0], "table": [1.0, 1.0]},
        {"id": 2, "edges": [1], "table": [7.0, 1.0]},
    ]
    g = build_forney_graph(nodes, [{"id": 0, "ends": [0, 1]}, {"id": 1, "ends": [0, 2]}])
    assert exact_log_z(g) == pytest.approx(math.log(35.0))


def test_too_large():
    g = ising_grid_forney(IsingParams(3, 3, 1.0, 0.1, seed=0))
    assert len(g.edges) > 24
    with pytest.raises(TooLarge):
        exact_log_z(g)


def test_zero_partition():
    # both tables are nonzero but force incompatible spins
    g = leaf_pair((1.0, 0.0), (0.0, 1.0))
    with pytest.raises(ZeroPartition):
        exact_log_z(g)
    with pytest.raises(ZeroPartition):
        contract_log_z(g)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    g = random_planar_forney(rng, n_leaves=2)
    nmap = dict(zip(g.node_ids, (rng.permutation(len(g.nodes)) + 100).tolist()))
    emap = dict(zip(g.edge_ids, (rng.permutation(len(g.edges)) + 50).tolist()))
    h = g.relabeled(nmap, emap)
    assert abs(exact_log_z(g) - exact_log_z(h)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_contraction_matches_enumeration(seed):
    g = random_planar_forney(np.random.default_rng(seed))
    assert contract_log_z(g) == pytest.approx(exact_log_z(g), abs=1e-10)


# ---------------------------------------------------------------------------
# Ising grids


def test_grid_zero_parameters_2x2():
    g = ising_grid_forney(IsingParams(2, 2, 0.0, 0.0))
    # all weights are 1; each site is one free spin
    assert exact_log_z(g) == pytest.approx(4 * math.log(2), abs=1e-12)
    assert contract_log_z(g) == pytest.approx(4 * math.log(2), abs=1e-12)


def test_grid_3x3_matches_spin_enumeration():
    params = IsingParams(3, 3, 1.0, 0.1, "mixed", seed=7)
    c = sample_couplings(params)
    g = ising_grid_forney(params)
    ref = brute_grid_log_z(c)
    assert contract_log_z(g) == pytest.approx(ref, abs=1e-11)
    assert ising_log_z(c) == pytest.approx(ref, abs=1e-11)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 2)])
def test_small_grids_edge_enumeration(shape):
    c = sample_couplings(IsingParams(*shape, 0.8, 0.5, "mixed", seed=11))
    g = forney_from_couplings(c)
    assert len(g.edges) <= 24
    assert exact_log_z(g) == pytest.approx(brute_grid_log_z(c), abs=1e-11)


def test_grid_structure():
    g = ising_grid_forney(IsingParams(4, 4, 1.0, 1.0, seed=2))
    assert max(g.degree(a) for a in g.node_ids) <= 3
    assert g.n_components() == 1
    # every leaf is a field node
    assert sum(g.degree(a) == 1 for a in g.node_ids) == 16


def test_grid_determinism():
    p = IsingParams(3, 4, 1.0, 0.3, "mixed", seed=123)
    assert ising_grid_forney(p).to_dict() == ising_grid_forney(p).to_dict()
    q = IsingParams(3, 4, 1.0, 0.3, "mixed", seed=124)
    assert ising_grid_forney(p).to_dict() != ising_grid_forney(q).to_dict()


def test_attractive_mode_nonnegative():
    c = sample_couplings(IsingParams(4, 5, 2.0, 1.0, "attractive", seed=3))
    for a in (c.horizontal, c.vertical, c.fields):
        assert np.all(a >= 0)


def test_coupling_scales():
    c = sample_couplings(IsingParams(60, 60, 2.0, 0.5, "mixed", seed=0))
    j = np.concatenate([c.horizontal.ravel(), c.vertical.ravel()])
    assert np.std(j) == pytest.approx(1.0, rel=0.05)  # beta / 2
    assert np.std(c.fields) == pytest.approx(1.0, rel=0.05)  # beta * theta


@pytest.mark.parametrize("kw", [dict(rows=1), dict(beta=-1.0), dict(theta=-0.1), dict(mode="ferro"),
                                dict(seed=-1)])
def test_params_validation(kw):
    base = dict(rows=3, cols=3, beta=1.0, theta=0.1, mode="mixed", seed=0)
    base.update(kw)
    with pytest.raises(ValueError):
        IsingParams(**base)


# ---------------------------------------------------------------------------
# 2-core


def test_two_core_tree_is_null():
    g = random_tree_forney(12, np.random.default_rng(0))
    core, rec = two_core(g)
    assert core.is_empty()
    assert len(rec.nodes) == 12
    assert rec.log_scale == pytest.approx(exact_log_z(g), abs=1e-12)


def test_two_core_cycle_is_itself():
    g = ring(5, couplings=[0.3] * 5)
    core, rec = two_core(g)
    assert core.to_dict() == g.to_dict()
    assert rec.nodes == () and rec.log_scale == 0.0


def test_two_core_cycle_with_pendant_path():
    g = ring_with_pendant(4, 2)
    core, rec = two_core(g)
    assert sorted(core.node_ids) == [0, 1, 2, 3]
    assert set(rec.nodes) == {4, 5}
    assert exact_log_z(core) + rec.log_scale == pytest.approx(exact_log_z(g), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_two_core_properties(seed):
    g = random_planar_forney(np.random.default_rng(seed), drop=0.3)
    core, rec = two_core(g)
    assert all(core.degree(a) >= 2 for a in core.node_ids)
    again, rec2 = two_core(core)
    assert again.to_dict() == core.to_dict() and rec2.nodes == ()
    z_core = exact_log_z(core) if not core.is_empty() else 0.0
    assert z_core + rec.log_scale == pytest.approx(exact_log_z(g), abs=1e-10)


def test_ising_pair_helper_convention():
    # exp(J s s'): index 0 (-,-) and 3 (+,+) carry exp(J)
    t = ising_pair(0.7)
    assert t[0] == t[3] == math.exp(0.7) and t[1] == t[2] == math.exp(-0.7)
