"""Small hand-made Forney graphs shared by the tests."""

import math

import numpy as np

from loopcalc import build_forney_graph


def ising_pair(j):
    """exp(J s s') in the bit convention (bit 0 is spin -1)."""
    a, b = math.exp(j), math.exp(-j)
    return [a, b, b, a]


def ring(n, tables=None, couplings=None):
    """n degree-2 nodes on a cycle; edge i joins node i and node i+1."""
    if couplings is not None:
        tables = [ising_pair(j) for j in couplings]
    if tables is None:
        tables = [[1.0] * 4] * n
    nodes = [{"id": i, "edges": [(i - 1) % n, i], "table": tables[i]} for i in range(n)]
    edges = [{"id": i, "ends": [i, (i + 1) % n]} for i in range(n)]
    return build_forney_graph(nodes, edges)


def two_rings(n=3, m=3, rng=None):
    rng = rng or np.random.default_rng(0)
    nodes, edges = [], []
    for off, k in ((0, n), (n, m)):
        for i in range(k):
            nodes.append({"id": off + i, "edges": [off + (i - 1) % k, off + i],
                          "table": np.exp(rng.normal(size=4)).tolist()})
            edges.append({"id": off + i, "ends": [off + i, off + (i + 1) % k]})
    return build_forney_graph(nodes, edges)


def ring_with_pendant(n=4, path_len=2, rng=None):
    """Cycle 0..n-1; node 0 also carries a path of ``path_len`` extra nodes."""
    rng = rng or np.random.default_rng(1)
    nodes, edges = [], []
    for i in range(n):
        edges.append({"id": i, "ends": [i, (i + 1) % n]})
    prev = 0
    for k in range(path_len):
        edges.append({"id": n + k, "ends": [prev, n + k]})
        prev = n + k
    inc = {v: [] for v in range(n + path_len)}
    for e in edges:
        for x in e["ends"]:
            inc[x].append(e["id"])
    for v, es in inc.items():
        nodes.append({"id": v, "edges": es, "table": np.exp(rng.normal(size=2 ** len(es))).tolist()})
    return build_forney_graph(nodes, edges)


def theta_graph(tables=None):
    """Two degree-3 nodes joined by three paths through degree-2 nodes.

    Nodes 0 and 1 are the triplets; paths go through nodes 2, 3, 4.
    Drawn with 0 on the left, 1 on the right, paths top/middle/bottom.
    """
    ends = {0: (0, 2), 1: (2, 1), 2: (0, 3), 3: (3, 1), 4: (0, 4), 5: (4, 1)}
    # rotations counter-clockwise: node 0 sees top(0), middle(2), bottom(4) in cw order
    rot = {0: [0, 2, 4][::-1], 1: [1, 3, 5], 2: [0, 1], 3: [2, 3], 4: [4, 5]}
    rng = np.random.default_rng(5)
    if tables is None:
        tables = {v: np.exp(0.5 * rng.normal(size=2 ** len(r))).tolist() for v, r in rot.items()}
    nodes = [{"id": v, "edges": r, "table": tables[v]} for v, r in rot.items()]
    edges = [{"id": e, "ends": list(ab)} for e, ab in ends.items()]
    return build_forney_graph(nodes, edges)


def leaf_pair(t1=(1.0, 1.0), t2=(1.0, 1.0)):
    return build_forney_graph(
        [{"id": 0, "edges": [0], "table": list(t1)}, {"id": 1, "edges": [0], "table": list(t2)}],
        [{"id": 0, "ends": [0, 1]}],
    )


def cube(rng=None, scale=0.5):
    """Planar drawing of the 3-cube: outer square 0-3, inner square 4-7."""
    from loopcalc.random_graphs import _from_drawing

    rng = rng or np.random.default_rng(2)
    pos = {0: (0, 0), 1: (4, 0), 2: (4, 4), 3: (0, 4), 4: (1, 1), 5: (3, 1), 6: (3, 3), 7: (1, 3)}
    ends = [(i, (i + 1) % 4) for i in range(4)] + [(4 + i, 4 + (i + 1) % 4) for i in range(4)] \
        + [(i, i + 4) for i in range(4)]
    tables = {v: np.exp(scale * rng.normal(size=8)).tolist() for v in pos}
    return _from_drawing(pos, ends, tables)
