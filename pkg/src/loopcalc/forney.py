"""Binary Forney graphs: nodes are interactions, edges are +/-1 variables.

Factor tables are flat arrays of length ``2**degree``. Bit ``i`` of the
table index (least significant first) is the spin on the edge at rotation
slot ``i`` of the node, with bit value 0 meaning -1 and 1 meaning +1. In
tensor form, axis ``i`` of ``table.reshape((2,) * d, order="F")`` is slot ``i``.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.special import logsumexp

from .embedding import Face, connected_components, trace_faces
from .errors import (
    DanglingEdge,
    DegreeTooHigh,
    InvalidGraph,
    MalformedTable,
    TooLarge,
    ZeroPartition,
)

MAX_DEGREE = 3


@dataclass(frozen=True)
class InteractionNode:
    id: int
    edges: tuple[int, ...]
    table: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return len(self.edges)

    def tensor(self) -> np.ndarray:
        """Table as a ``(2,)*degree`` array, axis i = rotation slot i."""
        return self.table.reshape((2,) * self.degree, order="F")

    def slot(self, edge_id: int) -> int:
        return self.edges.index(edge_id)


@dataclass(frozen=True)
class VariableEdge:
    id: int
    ends: tuple[int, int]

    def other(self, node_id: int) -> int:
        a, b = self.ends
        return b if node_id == a else a


class ForneyGraph:
    """Validated, immutable Forney graph with a planar rotation system.

    Use :func:`build_forney_graph` rather than calling this directly.
    """

    def __init__(self, nodes: Mapping[int, InteractionNode], edges: Mapping[int, VariableEdge]):
        self._nodes = dict(sorted(nodes.items()))
        self._edges = dict(sorted(edges.items()))
        self._faces = None

    @property
    def nodes(self) -> dict[int, InteractionNode]:
        return self._nodes

    @property
    def edges(self) -> dict[int, VariableEdge]:
        return self._edges

    @property
    def node_ids(self) -> list[int]:
        return list(self._nodes)

    @property
    def edge_ids(self) -> list[int]:
        return list(self._edges)

    def degree(self, node_id: int) -> int:
        return self._nodes[node_id].degree

    def endpoint_slots(self, edge_id: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """``((node, slot), (node, slot))`` for both ends of an edge."""
        a, b = self._edges[edge_id].ends
        return (a, self._nodes[a].slot(edge_id)), (b, self._nodes[b].slot(edge_id))

    def triplets(self) -> list[int]:
        return [a for a, n in self._nodes.items() if n.degree == 3]

    def is_empty(self) -> bool:
        return not self._nodes

    def _index_form(self):
        vid = {a: i for i, a in enumerate(self._nodes)}
        eid = {e: i for i, e in enumerate(self._edges)}
        endpoints = [(vid[ed.ends[0]], vid[ed.ends[1]]) for ed in self._edges.values()]
        rotation = [[eid[e] for e in n.edges] for n in self._nodes.values()]
        return vid, eid, endpoints, rotation

    def faces(self) -> list[Face]:
        """Faces traced from the rotation system, darts in index form."""
        if self._faces is None:
            _, _, endpoints, rotation = self._index_form()
            self._faces = trace_faces(len(self._nodes), endpoints, rotation)
        return self._faces

    def n_components(self) -> int:
        _, _, endpoints, _ = self._index_form()
        return max(connected_components(len(self._nodes), endpoints), default=-1) + 1

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "edges": list(n.edges), "table": [float(x) for x in n.table]}
                for n in self._nodes.values()
            ],
            "edges": [{"id": e.id, "ends": list(e.ends)} for e in self._edges.values()],
        }

    def relabeled(self, node_map: Mapping[int, int], edge_map: Mapping[int, int]) -> "ForneyGraph":
        """Same graph under new node and edge ids (rotations and tables unchanged)."""
        nodes = [
            {"id": node_map[n.id], "edges": [edge_map[e] for e in n.edges], "table": n.table}
            for n in self._nodes.values()
        ]
        edges = [
            {"id": edge_map[e.id], "ends": [node_map[x] for x in e.ends]}
            for e in self._edges.values()
        ]
        return build_forney_graph(nodes, edges)

    def __repr__(self) -> str:
        return f"ForneyGraph(n_nodes={len(self._nodes)}, n_edges={len(self._edges)})"


def _spec_get(spec, key, pos):
    if isinstance(spec, Mapping):
        return spec[key]
    return spec[pos]


def build_forney_graph(node_specs: Iterable, edge_specs: Iterable, check_planar: bool = True) -> ForneyGraph:
    """Validate node and edge specs and return a :class:`ForneyGraph`.

    Node specs are mappings with ``id``, ``edges`` (rotation order) and
    ``table``, or ``(id, edges, table)`` tuples; edge specs are mappings
    with ``id`` and ``ends`` or ``(id, ends)`` tuples.
    """
    edges = {}
    pairs = set()
    for spec in edge_specs:
        eid = int(_spec_get(spec, "id", 0))
        ends = tuple(int(x) for x in _spec_get(spec, "ends", 1))
        if eid in edges:
            raise InvalidGraph(f"duplicate edge id {eid}")
        if len(ends) != 2:
            raise DanglingEdge(f"edge {eid} has {len(ends)} endpoint(s)")
        if ends[0] == ends[1]:
            raise InvalidGraph(f"edge {eid} is a self-loop")
        key = frozenset(ends)
        if key in pairs:
            raise InvalidGraph(f"edge {eid} is parallel to another edge between {ends}")
        pairs.add(key)
        edges[eid] = VariableEdge(eid, ends)

    nodes = {}
    for spec in node_specs:
        nid = int(_spec_get(spec, "id", 0))
        rot = tuple(int(e) for e in _spec_get(spec, "edges", 1))
        if nid in nodes:
            raise InvalidGraph(f"duplicate node id {nid}")
        if len(rot) > MAX_DEGREE:
            raise DegreeTooHigh(f"node {nid} has degree {len(rot)} > {MAX_DEGREE}")
        if len(set(rot)) != len(rot):
            raise InvalidGraph(f"node {nid} lists an edge twice")
        table = np.array(_spec_get(spec, "table", 2), dtype=float).ravel()
        if table.size != 2 ** len(rot):
            raise MalformedTable(f"node {nid}: table has {table.size} entries, need {2 ** len(rot)}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise MalformedTable(f"node {nid}: table entries must be finite and non-negative")
        if not np.any(table > 0):
            raise MalformedTable(f"node {nid}: table is identically zero")
        table.setflags(write=False)
        nodes[nid] = InteractionNode(nid, rot, table)

    incident = {a: set() for a in nodes}
    for e in edges.values():
        for x in e.ends:
            if x not in nodes:
                raise DanglingEdge(f"edge {e.id} ends at unknown node {x}")
            incident[x].add(e.id)
    for a, n in nodes.items():
        if set(n.edges) != incident[a]:
            raise InvalidGraph(
                f"node {a}: rotation {list(n.edges)} is not a permutation of incident edges "
                f"{sorted(incident[a])}"
            )

    g = ForneyGraph(nodes, edges)
    if check_planar:
        g.faces()
    return g


def graph_from_dict(data: Mapping) -> ForneyGraph:
    return build_forney_graph(data["nodes"], data["edges"])


def load_graph(path) -> ForneyGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def save_graph(graph: ForneyGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph.to_dict(), fh, indent=1)


# ---------------------------------------------------------------------------
# exact oracles


def exact_log_z(graph: ForneyGraph, max_edges: int = 24, chunk_bits: int = 20) -> float:
    """log Z by summing over all 2**|E| edge-spin assignments.

    Raises TooLarge above ``max_edges`` and ZeroPartition when every
    assignment has zero weight.
    """
    n_edges = len(graph.edges)
    if n_edges > max_edges:
        raise TooLarge(f"{n_edges} edges exceeds the enumeration cap of {max_edges}")
    bit = {e: i for i, e in enumerate(graph.edges)}
    with np.errstate(divide="ignore"):
        log_tables = [(np.log(n.table), [bit[e] for e in n.edges]) for n in graph.nodes.values()]

    total = 2**n_edges
    step = 2 ** min(chunk_bits, n_edges)
    parts = []
    for start in range(0, total, step):
        states = np.arange(start, start + step, dtype=np.int64)
        logw = np.zeros(step)
        for lt, bits in log_tables:
            idx = np.zeros(step, dtype=np.int64)
            for slot, b in enumerate(bits):
                idx |= ((states >> b) & 1) << slot
            logw += lt[idx]
        parts.append(logsumexp(logw))
    result = float(logsumexp(parts))
    if not np.isfinite(result):
        raise ZeroPartition("all configurations have zero weight")
    return result


def contract_log_z(graph: ForneyGraph) -> float:
    """log Z by greedy pairwise contraction of the node tables.

    Exact (no approximation), and feasible far beyond the enumeration cap
    for grid-like graphs. Used as an independent route to cross-check
    :func:`exact_log_z` and the spin-level Ising oracle.
    """
    tensors = []
    for n in graph.nodes.values():
        tensors.append([n.tensor().astype(float), list(n.edges)])
    log_scale = 0.0

    def rescale(t):
        nonlocal log_scale
        s = t.max()
        if s <= 0:
            raise ZeroPartition("contraction produced an all-zero tensor")
        log_scale += np.log(s)
        return t / s

    for item in tensors:
        item[0] = rescale(item[0])

    while len(tensors) > 1:
        owner = {}
        for i, (_, labels) in enumerate(tensors):
            for lab in labels:
                owner.setdefault(lab, []).append(i)
        best = None
        for lab, (i, j) in ((lab, own) for lab, own in owner.items() if len(own) == 2):
            li, lj = set(tensors[i][1]), set(tensors[j][1])
            rank = len(li ^ lj)
            key = (rank, i, j)
            if best is None or key < best:
                best = key
        if best is None:
            # disconnected pieces: multiply scalars / outer products of components
            t0, l0 = tensors.pop()
            t1, l1 = tensors.pop()
            tensors.append([rescale(np.multiply.outer(t1, t0)), l1 + l0])
            continue
        _, i, j = best
        ti, li = tensors[i]
        tj, lj = tensors[j]
        shared = [lab for lab in li if lab in lj]
        out = [lab for lab in li if lab not in shared] + [lab for lab in lj if lab not in shared]
        letters = {lab: k for k, lab in enumerate(dict.fromkeys(li + lj))}
        t = np.einsum(ti, [letters[x] for x in li], tj, [letters[x] for x in lj],
                      [letters[x] for x in out])
        for k in sorted((i, j), reverse=True):
            tensors.pop(k)
        tensors.append([rescale(np.asarray(t)), out])

    (t, labels), = tensors
    total = float(np.sum(t))
    if total <= 0:
        raise ZeroPartition("all configurations have zero weight")
    return log_scale + float(np.log(total))


# ---------------------------------------------------------------------------
# 2-core


@dataclass(frozen=True)
class RemovalRecord:
    """What :func:`two_core` peeled, in peeling order.

    ``log_scale`` is the log of the mass absorbed from peeled trees, so
    ``log Z(graph) = log Z(core) + log_scale`` (with log Z of the null graph 0).
    """

    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    log_scale: float


def two_core(graph: ForneyGraph) -> tuple[ForneyGraph, RemovalRecord]:
    """Peel degree <= 1 nodes recursively.

    Peeled leaves are summed out exactly into their neighbour's table, so the
    core keeps the same partition function up to ``record.log_scale``. The
    surviving nodes keep their ids and the cyclic order of their remaining
    edges.
    """
    tensors = {a: n.tensor().astype(float) for a, n in graph.nodes.items()}
    labels = {a: list(n.edges) for a, n in graph.nodes.items()}
    alive = set(graph.nodes)
    queue = [a for a in graph.nodes if len(labels[a]) <= 1]
    heapq.heapify(queue)
    peeled_nodes, peeled_edges = [], []
    log_scale = 0.0

    while queue:
        x = heapq.heappop(queue)
        if x not in alive:
            continue
        alive.discard(x)
        peeled_nodes.append(x)
        if not labels[x]:
            total = float(np.sum(tensors[x]))
            log_scale += np.log(total) if total > 0 else -np.inf
            continue
        (e,) = labels[x]
        peeled_edges.append(e)
        y = graph.edges[e].other(x)
        ax = labels[y].index(e)
        t = np.tensordot(tensors[y], tensors[x], axes=([ax], [0]))
        s = t.max()
        if s > 0:
            t = t / s
            log_scale += np.log(s)
        tensors[y] = t
        labels[y].pop(ax)
        if len(labels[y]) <= 1:
            heapq.heappush(queue, y)

    core_nodes = []
    for a in graph.nodes:
        if a in alive:
            core_nodes.append({"id": a, "edges": labels[a], "table": tensors[a].ravel(order="F")})
    peeled = set(peeled_edges)
    core_edges = [{"id": e.id, "ends": list(e.ends)} for e in graph.edges.values() if e.id not in peeled]
    core = build_forney_graph(core_nodes, core_edges)
    return core, RemovalRecord(tuple(peeled_nodes), tuple(peeled_edges), float(log_scale))
