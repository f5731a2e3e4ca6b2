"""Seeded random Forney graphs for tests, oracles and demos.

Planar graphs are built as straight-line drawings (brick-wall patches of
the hexagonal lattice, with subdivided edges and pendant leaves), and the
rotation at each node is read off by sorting neighbours by angle.
"""

from __future__ import annotations

import math

import numpy as np

from .forney import ForneyGraph, build_forney_graph


def random_table(degree: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Strictly positive table ``exp(scale * N(0, 1))`` with 2**degree entries."""
    return np.exp(scale * rng.standard_normal(2**degree))


def _from_drawing(pos, edge_ends, tables) -> ForneyGraph:
    incident = {n: [] for n in pos}
    for eid, (a, b) in enumerate(edge_ends):
        incident[a].append(eid)
        incident[b].append(eid)

    def angle(n, eid):
        a, b = edge_ends[eid]
        o = b if a == n else a
        return math.atan2(pos[o][1] - pos[n][1], pos[o][0] - pos[n][0]) % (2 * math.pi)

    nodes = [{"id": n, "edges": sorted(incident[n], key=lambda e: angle(n, e)), "table": tables[n]}
             for n in sorted(pos)]
    edges = [{"id": i, "ends": list(ab)} for i, ab in enumerate(edge_ends)]
    return build_forney_graph(nodes, edges)


def random_tree_forney(n_nodes: int, rng: np.random.Generator, scale: float = 1.0) -> ForneyGraph:
    """Random tree with max degree 3 and random positive tables."""
    parent_deg = [0]
    edge_ends = []
    for v in range(1, n_nodes):
        open_nodes = [u for u in range(v) if parent_deg[u] < 3]
        u = int(rng.choice(open_nodes))
        edge_ends.append((u, v))
        parent_deg[u] += 1
        parent_deg.append(1)
    incident = {v: [] for v in range(n_nodes)}
    for eid, (a, b) in enumerate(edge_ends):
        incident[a].append(eid)
        incident[b].append(eid)
    nodes = []
    for v in range(n_nodes):
        rot = list(incident[v])
        rng.shuffle(rot)
        nodes.append({"id": v, "edges": rot, "table": random_table(len(rot), rng, scale)})
    edges = [{"id": i, "ends": list(ab)} for i, ab in enumerate(edge_ends)]
    return build_forney_graph(nodes, edges)


def random_planar_forney(
    rng: np.random.Generator,
    rows: int = 3,
    cols: int = 4,
    drop: float = 0.15,
    n_subdivide: int = 2,
    n_leaves: int = 3,
    scale: float = 0.5,
) -> ForneyGraph:
    """Random planar Forney graph with max degree 3 and positive tables.

    Start from a ``rows x cols`` brick-wall patch (vertical rungs where
    ``r + c`` is even), drop each edge with probability ``drop``, discard
    isolated vertices, subdivide up to ``n_subdivide`` edges with degree-2
    nodes and hang up to ``n_leaves`` degree-1 leaves off nodes of degree
    <= 2.
    """
    pos = {}
    vid = {}
    for r in range(rows):
        for c in range(cols):
            vid[(r, c)] = len(pos)
            pos[len(pos)] = (float(c), -float(r))
    cand = []
    for r in range(rows):
        for c in range(cols - 1):
            cand.append((vid[(r, c)], vid[(r, c + 1)]))
    for r in range(rows - 1):
        for c in range(cols):
            if (r + c) % 2 == 0:
                cand.append((vid[(r, c)], vid[(r + 1, c)]))
    keep = rng.random(len(cand)) >= drop
    edge_ends = [ab for ab, k in zip(cand, keep) if k]
    used = {x for ab in edge_ends for x in ab}
    pos = {n: p for n, p in pos.items() if n in used}

    def new_node(xy):
        n = max(pos) + 1 if pos else 0
        pos[n] = xy
        return n

    for _ in range(n_subdivide):
        if not edge_ends:
            break
        i = int(rng.integers(len(edge_ends)))
        a, b = edge_ends.pop(i)
        m = new_node(((pos[a][0] + pos[b][0]) / 2, (pos[a][1] + pos[b][1]) / 2))
        edge_ends += [(a, m), (m, b)]

    for _ in range(n_leaves):
        deg = {n: 0 for n in pos}
        for a, b in edge_ends:
            deg[a] += 1
            deg[b] += 1
        open_nodes = sorted(n for n, d in deg.items() if d <= 2)
        if not open_nodes:
            break
        n = open_nodes[int(rng.integers(len(open_nodes)))]
        angles = sorted(
            math.atan2(pos[o][1] - pos[n][1], pos[o][0] - pos[n][0]) % (2 * math.pi)
            for a, b in edge_ends if n in (a, b) for o in [b if a == n else a]
        )
        if angles:
            gaps = [((angles[(i + 1) % len(angles)] - angles[i]) % (2 * math.pi) or 2 * math.pi, angles[i])
                    for i in range(len(angles))]
            gap, start = max(gaps)
            theta = start + gap / 2
        else:
            theta = 0.0
        leaf = new_node((pos[n][0] + 0.2 * math.cos(theta), pos[n][1] + 0.2 * math.sin(theta)))
        edge_ends.append((n, leaf))

    deg = {n: 0 for n in pos}
    for a, b in edge_ends:
        deg[a] += 1
        deg[b] += 1
    tables = {n: random_table(deg[n], rng, scale) for n in pos}
    return _from_drawing(pos, edge_ends, tables)


def random_loopy_forney(
    rng: np.random.Generator,
    min_triplets: int = 2,
    max_core_edges: int = 16,
    max_edges: int = 24,
    max_tries: int = 1000,
    **kwargs,
) -> ForneyGraph:
    """Draw :func:`random_planar_forney` graphs until the 2-core is small
    enough and has at least ``min_triplets`` degree-3 nodes."""
    from .forney import two_core

    for _ in range(max_tries):
        g = random_planar_forney(rng, **kwargs)
        if len(g.edges) > max_edges:
            continue
        core, _ = two_core(g)
        if len(core.edges) <= max_core_edges and len(core.triplets()) >= min_triplets:
            return g
    raise RuntimeError("no graph met the constraints; loosen them or change the size")
