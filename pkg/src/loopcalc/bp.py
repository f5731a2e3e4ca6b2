"""Sum-product belief propagation on binary Forney graphs.

Messages live on darts: ``(a, e)`` is the message node ``a`` sends along
edge ``e``. They are kept as normalized log-probabilities over
``(sigma=-1, sigma=+1)``; damping and the convergence test act on the
linear probabilities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DegenerateBeliefWarning, DomainError, NumericalUnderflow
from .forney import ForneyGraph

MEAN_CLAMP = 1.0 - 1e-12
SPINS = np.array([-1.0, 1.0])


@dataclass(frozen=True)
class BPConfig:
    damping: float = 0.5
    tolerance: float = 1e-12
    max_iters: int = 10000
    schedule: str = "sequential"

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.schedule not in ("sequential", "parallel"):
            raise ValueError("schedule must be 'sequential' or 'parallel'")


@dataclass(frozen=True)
class BPResult:
    """Fixed point (or last iterate) of BP.

    ``node_beliefs[a]`` has shape ``(2,)*deg(a)`` with axis i the edge at
    rotation slot i of ``node_edges[a]``. ``edge_beliefs[e]`` and
    ``messages[(a, e)]`` are probability pairs over (-1, +1).
    """

    messages: dict = field(repr=False)
    node_beliefs: dict = field(repr=False)
    edge_beliefs: dict = field(repr=False)
    edge_means: dict = field(repr=False)
    node_edges: dict = field(repr=False)
    converged: bool
    iterations: int
    residual: float
    bethe_log_z: float


def _lse(x, axis=None):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def _expand(vec, axis, ndim):
    shape = [1] * ndim
    shape[axis] = 2
    return vec.reshape(shape)


class _Plan:
    """Index form of the graph used by the message loop.

    Nodes are greedily colored so that no two nodes of one color share an
    edge, then grouped by (color, degree). Updating a whole group at once
    equals updating its nodes one after another, so the sequential
    schedule is the fixed node order sorted by (color, id).
    """

    def __init__(self, graph: ForneyGraph):
        self.dart = {}
        for a, n in graph.nodes.items():
            for e in n.edges:
                self.dart[(a, e)] = len(self.dart)
        color = {}
        for a, n in graph.nodes.items():
            used = {color.get(graph.edges[e].other(a)) for e in n.edges}
            c = 0
            while c in used:
                c += 1
            color[a] = c
        buckets = {}
        for a, n in graph.nodes.items():
            buckets.setdefault((color[a], n.degree), []).append(a)
        self.groups = []
        with np.errstate(divide="ignore"):
            for (_, d), members in sorted(buckets.items()):
                if d == 0:
                    continue
                lt = np.stack([np.log(graph.nodes[a].tensor()) for a in members])
                out = np.array([[self.dart[(a, e)] for e in graph.nodes[a].edges] for a in members])
                inc = np.array([[self.dart[(graph.edges[e].other(a), e)] for e in graph.nodes[a].edges]
                                for a in members])
                self.groups.append((members, lt, out, inc))

    @staticmethod
    def group_messages(lt, inc, logm):
        """Outgoing log-messages, shape (G, d, 2), for one group."""
        g, d = inc.shape
        incoming = logm[inc]
        outs = np.empty((g, d, 2))
        for j in range(d):
            t = lt
            for k in range(d):
                if k != j:
                    shape = [g] + [1] * d
                    shape[k + 1] = 2
                    t = t + incoming[:, k].reshape(shape)
            axes = tuple(k + 1 for k in range(d) if k != j)
            o = _lse(t, axis=axes) if axes else t
            outs[:, j] = o
        z = _lse(outs, axis=2)
        if not np.all(np.isfinite(z)):
            raise NumericalUnderflow("outgoing message has zero mass")
        return outs - z[..., None]


def run_bp(graph: ForneyGraph, config: BPConfig | None = None) -> BPResult:
    """Iterate BP from uniform messages until the largest change drops below tolerance."""
    config = config or BPConfig()
    plan = _Plan(graph)
    logm = np.full((len(plan.dart), 2), -math.log(2.0))
    delta = config.damping

    def update(out, outs):
        old = np.exp(logm[out])
        new = np.exp(outs)
        if delta:
            new = (1.0 - delta) * new + delta * old
            new /= new.sum(axis=-1, keepdims=True)
        with np.errstate(divide="ignore"):
            logm[out] = np.log(new)
        return float(np.max(np.abs(new - old)))

    converged = False
    residual = math.inf
    it = 0
    for it in range(1, config.max_iters + 1):
        residual = 0.0
        if config.schedule == "sequential":
            for _, lt, out, inc in plan.groups:
                residual = max(residual, update(out, plan.group_messages(lt, inc, logm)))
        else:
            computed = [plan.group_messages(lt, inc, logm) for _, lt, _, inc in plan.groups]
            for (_, _, out, _), outs in zip(plan.groups, computed):
                residual = max(residual, update(out, outs))
        if residual < config.tolerance:
            converged = True
            break

    return _finish(graph, plan, logm, converged, it, residual)


def _finish(graph, plan, logm, converged, iterations, residual):
    messages = {key: np.exp(logm[i]) for key, i in plan.dart.items()}
    node_beliefs = {}
    with np.errstate(divide="ignore"):
        for a, n in graph.nodes.items():
            t = np.log(n.tensor())
            for k, e in enumerate(n.edges):
                t = t + _expand(logm[plan.dart[(graph.edges[e].other(a), e)]], k, n.degree)
            z = _lse(t)
            if not np.isfinite(z):
                raise NumericalUnderflow(f"belief at node {a} has zero normalizer")
            node_beliefs[a] = np.exp(t - z)

    edge_beliefs, edge_means = {}, {}
    for e, edge in graph.edges.items():
        a, b = edge.ends
        t = logm[plan.dart[(a, e)]] + logm[plan.dart[(b, e)]]
        z = _lse(t)
        if not np.isfinite(z):
            raise NumericalUnderflow(f"belief at edge {e} has zero normalizer")
        edge_beliefs[e] = np.exp(t - z)
        edge_means[e] = float(edge_beliefs[e] @ SPINS)

    node_edges = {a: n.edges for a, n in graph.nodes.items()}
    partial = BPResult(messages, node_beliefs, edge_beliefs, edge_means, node_edges,
                       converged, iterations, residual, math.nan)
    return BPResult(messages, node_beliefs, edge_beliefs, edge_means, node_edges,
                    converged, iterations, residual, bethe_log_z(partial, graph))


def _xlogy(x, y):
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log(y[nz])
    return out


def bethe_log_z(result: BPResult, graph: ForneyGraph) -> float:
    """-F_Bethe from the beliefs; each edge entropy is counted once."""
    energy = 0.0
    for a, n in graph.nodes.items():
        b = result.node_beliefs[a]
        f = n.tensor()
        if np.any((b > 0) & (f == 0)):
            raise DomainError(f"node {a}: positive belief on a zero-weight configuration")
        energy += float(np.sum(_xlogy(b, b))) - float(np.sum(_xlogy(b, np.where(b > 0, f, 1.0))))
    for e in graph.edges:
        b = result.edge_beliefs[e]
        energy -= float(np.sum(_xlogy(b, b)))
    return -energy


def loop_vertex_term(result: BPResult, node: int, neighbor_subset: Iterable[int]) -> float:
    """mu_{a;S}: centred moment of the node belief over the edges in S,
    divided by the product of edge standard deviations.

    ``neighbor_subset`` names the edges (variables) joining ``node`` to the
    neighbours in S.
    """
    edges = result.node_edges[node]
    subset = list(neighbor_subset)
    if len(set(subset)) != len(subset) or not set(subset) <= set(edges):
        raise ValueError(f"{subset} is not a subset of the edges of node {node}")
    b = result.node_beliefs[node]
    t = b
    denom = 1.0
    for e in subset:
        m = result.edge_means[e]
        if abs(m) >= MEAN_CLAMP:
            warnings.warn(f"edge {e}: |m| = {abs(m):.16f} clamped", DegenerateBeliefWarning,
                          stacklevel=2)
            m = math.copysign(MEAN_CLAMP, m)
        t = t * _expand(SPINS - m, edges.index(e), b.ndim)
        denom *= math.sqrt(1.0 - m * m)
    return float(np.sum(t)) / denom
