"""Generalized loops of a 2-core and the loop series built on them.

A generalized loop is a nonempty edge subset in which every touched node
has degree >= 2. Its weight is the product over touched nodes of the
vertex term mu_{a; edges of a in the loop}. The full series
``Z = Z_BP * (1 + sum_C r_C)`` is exact at a BP fixed point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .bp import BPResult, loop_vertex_term
from .errors import NonPositiveSumWarning, TooLarge
from .forney import ForneyGraph


@dataclass(frozen=True, order=True)
class GeneralizedLoop:
    """Edge subset plus, for every touched node, its edges inside the loop.

    Ordering is the canonical one: by size, then lexicographic edge ids.
    """

    size: int
    edges: tuple[int, ...]
    incidence: tuple[tuple[int, tuple[int, ...]], ...]

    @classmethod
    def from_edges(cls, graph: ForneyGraph, edges: Iterable[int]) -> "GeneralizedLoop":
        edges = tuple(sorted(edges))
        at = {}
        for e in edges:
            for x in graph.edges[e].ends:
                at.setdefault(x, []).append(e)
        return cls(len(edges), edges, tuple(sorted((a, tuple(es)) for a, es in at.items())))

    @property
    def degrees(self) -> tuple[tuple[int, int], ...]:
        return tuple((a, len(es)) for a, es in self.incidence)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.degrees)

    def is_two_regular(self) -> bool:
        return all(d == 2 for _, d in self.degrees)

    def triplets(self) -> tuple[int, ...]:
        """Nodes at degree 3 within the loop."""
        return tuple(a for a, d in self.degrees if d == 3)


@dataclass(frozen=True)
class LoopTerm:
    loop: GeneralizedLoop
    weight: float


def enumerate_generalized_loops(core: ForneyGraph, max_edges: int = 20,
                                chunk_bits: int = 20) -> list[GeneralizedLoop]:
    """All generalized loops by a scan over every edge subset.

    Subsets are tested as integer bit masks, ``2**chunk_bits`` at a time.
    """
    edge_ids = core.edge_ids
    n = len(edge_ids)
    if n > max_edges:
        raise TooLarge(f"{n} edges exceeds the subset-scan cap of {max_edges}")
    if n == 0:
        return []
    bit = {e: i for i, e in enumerate(edge_ids)}
    node_bits = [[bit[e] for e in node.edges] for node in core.nodes.values()]
    step = 1 << chunk_bits
    loops = []
    for start in range(1, 2**n, step):
        masks = np.arange(start, min(start + step, 2**n), dtype=np.int64)
        ok = np.ones(masks.shape, dtype=bool)
        for bits in node_bits:
            deg = np.zeros(masks.shape, dtype=np.int8)
            for b in bits:
                deg += ((masks >> b) & 1).astype(np.int8)
            ok &= deg != 1
        for m in masks[ok].tolist():
            loops.append(GeneralizedLoop.from_edges(core, [edge_ids[i] for i in range(n) if m >> i & 1]))
    loops.sort()
    return loops


def _chains(core: ForneyGraph):
    """Split the core into maximal paths through degree-2 nodes.

    Returns ``(ends, edges)`` pairs; ``ends`` holds the degree-3 nodes at
    the two ends (the same node twice for a chain returning to its start),
    or is empty for a cycle made only of degree-2 nodes.
    """
    used = set()
    chains = []
    for a in core.triplets():
        for e in core.nodes[a].edges:
            if e in used:
                continue
            path = [e]
            used.add(e)
            prev, cur = a, core.edges[e].other(a)
            while core.degree(cur) == 2:
                e2 = next(x for x in core.nodes[cur].edges if x != path[-1])
                path.append(e2)
                used.add(e2)
                prev, cur = cur, core.edges[e2].other(cur)
            chains.append(((a, cur), path))
    for e in core.edge_ids:
        if e in used:
            continue
        # component with no triplets: a plain cycle
        path = [e]
        used.add(e)
        start = core.edges[e].ends[0]
        cur = core.edges[e].ends[1]
        while cur != start:
            e2 = next(x for x in core.nodes[cur].edges if x != path[-1])
            path.append(e2)
            used.add(e2)
            cur = core.edges[e2].other(cur)
        chains.append(((), path))
    return chains


def search_generalized_loops(core: ForneyGraph) -> list[GeneralizedLoop]:
    """All generalized loops by backtracking over degree-2 chains.

    A chain is either fully inside a loop or fully outside, so the search
    only branches on chains and prunes a triplet as soon as all its chains
    are decided and its degree is 1. No cap on the edge count; the cost
    grows with the number of loops instead.
    """
    chains = _chains(core)
    triplets = core.triplets()
    pending = {a: 0 for a in triplets}
    for ends, _ in chains:
        for x in ends:
            pending[x] += 1
    # decide chains in an order that closes triplets early
    order, placed = [], set()
    for a in triplets:
        for i, (ends, _) in enumerate(chains):
            if i not in placed and a in ends:
                order.append(i)
                placed.add(i)
    order += [i for i in range(len(chains)) if i not in placed]

    deg = {a: 0 for a in triplets}
    chosen = []
    found = []

    def rec(k):
        if k == len(order):
            if chosen:
                found.append([e for i in chosen for e in chains[i][1]])
            return
        i = order[k]
        ends, _ = chains[i]
        for take in (False, True):
            ok = True
            for x in ends:
                pending[x] -= 1
                if take:
                    deg[x] += 1
            for x in set(ends):
                if deg[x] > 3 or (pending[x] == 0 and deg[x] == 1):
                    ok = False
            if ok:
                if take:
                    chosen.append(i)
                rec(k + 1)
                if take:
                    chosen.pop()
            for x in ends:
                pending[x] += 1
                if take:
                    deg[x] -= 1

    rec(0)
    loops = [GeneralizedLoop.from_edges(core, edges) for edges in found]
    loops.sort()
    return loops


def two_regular_filter(loops: Iterable[GeneralizedLoop]) -> list[GeneralizedLoop]:
    return [c for c in loops if c.is_two_regular()]


def vertex_terms(bp: BPResult, core: ForneyGraph) -> dict[int, dict[frozenset, float]]:
    """mu_{a;S} for every core node and every subset S of its core edges with |S| >= 2."""
    table = {}
    for a, node in core.nodes.items():
        table[a] = {
            frozenset(s): loop_vertex_term(bp, a, s)
            for k in range(2, node.degree + 1)
            for s in combinations(node.edges, k)
        }
    return table


def loop_weight(bp: BPResult, loop: GeneralizedLoop, mu: dict | None = None) -> float:
    """r_C: product of vertex terms over the nodes of the loop.

    ``mu`` is an optional cache from :func:`vertex_terms`.
    """
    r = 1.0
    for a, es in loop.incidence:
        r *= mu[a][frozenset(es)] if mu is not None else loop_vertex_term(bp, a, es)
    return r


def loop_terms(bp: BPResult, core: ForneyGraph, loops: Sequence[GeneralizedLoop]) -> list[LoopTerm]:
    """Loop terms sorted by |r_C| descending, ties in canonical loop order."""
    mu = vertex_terms(bp, core)
    terms = [LoopTerm(c, loop_weight(bp, c, mu)) for c in loops]
    terms.sort(key=lambda t: (-abs(t.weight), t.loop))
    return terms


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series ``Z_BP * s``.

    ``log_z`` is None when the bracket ``s`` is not positive; then
    ``signed_z`` carries the linear value.
    """

    bracket: float
    log_z: float | None
    signed_z: float

    @property
    def positive(self) -> bool:
        return self.log_z is not None


def series_value(bethe_log_z: float, bracket: float) -> SeriesValue:
    if bracket > 0:
        log_z = bethe_log_z + math.log(bracket)
        return SeriesValue(bracket, log_z, math.exp(log_z) if log_z < 700 else math.inf)
    warnings.warn(f"partial sum {bracket!r} is not positive", NonPositiveSumWarning, stacklevel=3)
    return SeriesValue(bracket, None, bracket * math.exp(bethe_log_z))


def truncated_loop_series(bp: BPResult, loop_terms: Sequence[LoopTerm], l: int | None = None) -> SeriesValue:
    """Z_BP * (1 + sum of the first ``l`` terms); ``l=None`` uses all of them."""
    chosen = loop_terms if l is None else loop_terms[:l]
    bracket = 1.0 + math.fsum(t.weight for t in chosen)
    return series_value(bp.bethe_log_z, bracket)
