"""Fisher gadget expansion of a 2-core, Kasteleyn orientation, matching oracles.

Every (node, incident edge) pair of the core becomes a port. A degree-2
node's two ports are joined by one internal edge weighted mu_{a;{b,c}}; a
degree-3 node's three ports form a triangle whose edge between the ports
of edges x and y is weighted mu_{a;{x,y}}. Each core edge becomes an
external edge of weight 1 between its two ports. A perfect matching then
encodes a 2-regular loop: an external edge is matched exactly when its
variable edge is *not* in the loop.

For a triplet set Psi the gadgets of the nodes in Psi and their external
edges are deleted; ports on the far side of those edges must then be
matched internally, which forces those edges into the loop.
"""

from __future__ import annotations

import json
import sys
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bp import BPResult, loop_vertex_term
from .embedding import Face, connected_components, trace_faces
from .errors import OddPsi, PsiNotTriplet, TooLarge
from .forney import ForneyGraph


@dataclass(frozen=True)
class ExtEdge:
    u: int
    v: int
    weight: float
    internal: bool
    owner: int | None = None     # gadget node for internal edges
    variable: int | None = None  # core edge for external edges


@dataclass(frozen=True)
class ExtendedGraph:
    """Ports in canonical (core node id, rotation slot) order."""

    ports: tuple[tuple[int, int], ...]
    edges: tuple[ExtEdge, ...]
    rotation: tuple[tuple[int, ...], ...]
    psi: frozenset

    @property
    def n_nodes(self) -> int:
        return len(self.ports)

    @property
    def endpoints(self) -> list[tuple[int, int]]:
        return [(e.u, e.v) for e in self.edges]

    def faces(self) -> list[Face]:
        return trace_faces(self.n_nodes, self.endpoints, self.rotation)

    def components(self) -> list[int]:
        return connected_components(self.n_nodes, self.endpoints)

    def to_dict(self, orientation: "KasteleynOrientation | None" = None) -> dict:
        out = {
            "psi": sorted(self.psi),
            "ports": [{"id": i, "node": a, "edge": e} for i, (a, e) in enumerate(self.ports)],
            "edges": [],
            "rotation": [list(r) for r in self.rotation],
        }
        for k, e in enumerate(self.edges):
            item = {"ends": [e.u, e.v], "weight": e.weight, "kind": "internal" if e.internal else "external"}
            if orientation is not None:
                item["oriented"] = [e.u, e.v] if orientation.forward[k] else [e.v, e.u]
            out["edges"].append(item)
        return out

    @classmethod
    def from_dict(cls, data) -> "ExtendedGraph":
        ports = tuple((p["node"], p["edge"]) for p in data["ports"])
        edges = tuple(
            ExtEdge(int(e["ends"][0]), int(e["ends"][1]), float(e["weight"]), e["kind"] == "internal")
            for e in data["edges"]
        )
        rotation = tuple(tuple(r) for r in data["rotation"])
        return cls(ports, edges, rotation, frozenset(data.get("psi", ())))


def check_psi(core: ForneyGraph, psi: Iterable[int]) -> frozenset:
    psi = frozenset(psi)
    bad = [a for a in psi if a not in core.nodes or core.degree(a) != 3]
    if bad:
        raise PsiNotTriplet(f"not triplets of the core: {sorted(bad)}")
    if len(psi) % 2:
        raise OddPsi(f"|Psi| = {len(psi)} is odd")
    return psi


def fisher_extend(core: ForneyGraph, bp: BPResult | None, psi: Iterable[int] = (),
                  weights: dict | None = None) -> ExtendedGraph:
    """Build the extended graph for triplet set ``psi``.

    Internal weights come from ``weights[a][frozenset(pair)]`` when given
    (see :func:`loopcalc.loops.vertex_terms`), else from ``bp``.
    """
    psi = check_psi(core, psi)
    ports = [(a, e) for a, n in core.nodes.items() if a not in psi for e in n.edges]
    index = {p: i for i, p in enumerate(ports)}
    edges = []
    rot = [[] for _ in ports]

    def mu(a, pair):
        if weights is not None:
            return float(weights[a][frozenset(pair)])
        return loop_vertex_term(bp, a, pair)

    ext_of = {}
    for e, edge in core.edges.items():
        a, b = edge.ends
        if a in psi or b in psi:
            continue
        ext_of[e] = len(edges)
        edges.append(ExtEdge(index[(a, e)], index[(b, e)], 1.0, False, variable=e))

    for a, n in core.nodes.items():
        if a in psi:
            continue
        p = [index[(a, e)] for e in n.edges]
        if n.degree == 2:
            k = len(edges)
            edges.append(ExtEdge(p[0], p[1], mu(a, n.edges), True, owner=a))
            for i in range(2):
                ext = ext_of.get(n.edges[i])
                rot[p[i]] = ([ext] if ext is not None else []) + [k]
        elif n.degree == 3:
            tri = {}
            for i, j in ((0, 1), (1, 2), (0, 2)):
                tri[(i, j)] = tri[(j, i)] = len(edges)
                edges.append(ExtEdge(p[i], p[j], mu(a, (n.edges[i], n.edges[j])), True, owner=a))
            for i in range(3):
                ext = ext_of.get(n.edges[i])
                # same rotational sense as the core node: outward edge, then
                # the side towards the next slot, then the previous slot
                rot[p[i]] = ([ext] if ext is not None else []) + [tri[(i, (i + 1) % 3)],
                                                                  tri[(i, (i + 2) % 3)]]
        else:
            raise ValueError(f"core node {a} has degree {n.degree}; expected 2 or 3")

    return ExtendedGraph(tuple(ports), tuple(edges), tuple(tuple(r) for r in rot), psi)


# ---------------------------------------------------------------------------
# orientation


@dataclass(frozen=True)
class KasteleynOrientation:
    """``forward[k]`` is True when edge k points u -> v."""

    forward: np.ndarray
    faces: tuple[Face, ...]
    outer: tuple[int, ...]  # index into faces, one per component with edges

    def co_oriented(self, face: Face) -> int:
        return sum(1 for e, s in face.darts if self.forward[e] == (s == 0))

    def bounded_faces(self):
        outer = set(self.outer)
        return [f for i, f in enumerate(self.faces) if i not in outer]


def kasteleyn_orient(ext: ExtendedGraph) -> KasteleynOrientation:
    """Orient edges so every bounded face has an odd number of co-oriented darts.

    Per component: a spanning tree (graph search from the lowest port) is oriented u -> v; the remaining
    edges form a spanning tree of the dual rooted at the outer face (the
    longest face), and are fixed leaf-to-root so each face ends up odd.
    """
    n = ext.n_nodes
    endpoints = ext.endpoints
    faces = ext.faces()
    forward = np.ones(len(endpoints), dtype=bool)

    adj = [[] for _ in range(n)]
    for k, (u, v) in enumerate(endpoints):
        adj[u].append((v, k))
        adj[v].append((u, k))
    in_tree = np.zeros(len(endpoints), dtype=bool)
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack = [s]
        while stack:
            x = stack.pop()
            for y, k in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    in_tree[k] = True
                    stack.append(y)

    face_of = {}
    for i, f in enumerate(faces):
        for d in f.darts:
            face_of[d] = i

    outer = {}
    for i, f in enumerate(faces):
        c = f.component
        if c not in outer or len(f) > len(faces[outer[c]]):
            outer[c] = i

    # BFS over the dual tree from each outer face
    parent_edge = {}
    order = []
    for c, root in sorted(outer.items()):
        queue = deque([root])
        visited = {root}
        while queue:
            f = queue.popleft()
            order.append(f)
            for e, s in faces[f].darts:
                if in_tree[e]:
                    continue
                g = face_of[(e, 1 - s)]
                if g not in visited:
                    visited.add(g)
                    parent_edge[g] = e
                    queue.append(g)

    for f in reversed(order):
        if f not in parent_edge:
            continue
        pe = parent_edge[f]
        count = 0
        side = None
        for e, s in faces[f].darts:
            if e == pe:
                side = s
            elif forward[e] == (s == 0):
                count += 1
        # want count + [pe co-oriented] odd
        co = count % 2 == 0
        forward[pe] = co if side == 0 else not co

    forward.setflags(write=False)
    return KasteleynOrientation(forward, tuple(faces), tuple(outer[c] for c in sorted(outer)))


def check_kasteleyn(orient: KasteleynOrientation) -> bool:
    return all(orient.co_oriented(f) % 2 == 1 for f in orient.bounded_faces())


# ---------------------------------------------------------------------------
# matching oracles


def _adjacency(ext: ExtendedGraph):
    adj = [[] for _ in range(ext.n_nodes)]
    for k, e in enumerate(ext.edges):
        adj[e.u].append((e.v, k))
        adj[e.v].append((e.u, k))
    for lst in adj:
        lst.sort()
    return adj


def enumerate_perfect_matchings(ext: ExtendedGraph, max_nodes: int = 24):
    """All perfect matchings (as sorted edge-index tuples) and their weighted sum.

    Backtracking always covers the lowest-numbered uncovered port next.
    """
    n = ext.n_nodes
    if n > max_nodes:
        raise TooLarge(f"{n} ports exceeds the matching-enumeration cap of {max_nodes}")
    adj = _adjacency(ext)
    covered = [False] * n
    chosen = []
    out = []

    def rec(start):
        i = start
        while i < n and covered[i]:
            i += 1
        if i == n:
            out.append(tuple(sorted(chosen)))
            return
        covered[i] = True
        for j, k in adj[i]:
            if not covered[j]:
                covered[j] = True
                chosen.append(k)
                rec(i + 1)
                chosen.pop()
                covered[j] = False
        covered[i] = False

    rec(0)
    out.sort()
    total = sum(float(np.prod([ext.edges[k].weight for k in m])) for m in out)
    return out, total


def perfect_matching_sum(ext: ExtendedGraph, unit: bool = False) -> float:
    """Weighted (or, with ``unit``, plain) count of perfect matchings.

    Same branching as :func:`enumerate_perfect_matchings` but memoized on
    the covered set, so it scales to graphs whose matchings cannot be listed.
    """
    n = ext.n_nodes
    adj = [[(j, 1.0 if unit else ext.edges[k].weight) for j, k in row] for row in _adjacency(ext)]
    memo = {}

    def rec(i, mask):
        while i < n and mask >> i & 1:
            i += 1
        if i == n:
            return 1.0
        key = mask >> i
        hit = memo.get((i, key))
        if hit is not None:
            return hit
        total = 0.0
        m = mask | (1 << i)
        for j, w in adj[i]:
            if not m >> j & 1:
                total += w * rec(i + 1, m | (1 << j))
        memo[(i, key)] = total
        return total

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        return rec(0, 0)
    finally:
        sys.setrecursionlimit(limit)


def matching_sign(matching: Iterable[int], ext: ExtendedGraph, orient: KasteleynOrientation) -> int:
    """Sign of this matching's term in the Pfaffian of the oriented matrix."""
    pairs = []
    sign = 1
    for k in matching:
        e = ext.edges[k]
        i, j = (e.u, e.v) if orient.forward[k] else (e.v, e.u)
        if i > j:
            i, j = j, i
            sign = -sign
        pairs.append((i, j))
    pairs.sort()
    seq = [x for p in pairs for x in p]
    # parity of the permutation seq
    seen = [False] * len(seq)
    for s in range(len(seq)):
        if seen[s]:
            continue
        length = 0
        x = s
        while not seen[x]:
            seen[x] = True
            x = seq[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def save_extended(ext: ExtendedGraph, orient: KasteleynOrientation | None, path) -> None:
    with open(path, "w") as fh:
        json.dump(ext.to_dict(orient), fh, indent=1)


def load_extended(path) -> ExtendedGraph:
    with open(path) as fh:
        return ExtendedGraph.from_dict(json.load(fh))
