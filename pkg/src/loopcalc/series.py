"""The 2-regular correction z_empty and the full Pfaffian series.

For every even set Psi of triplets (degree-3 nodes of the 2-core),

    Z_Psi = sign(Pf(B_Psi)) * Pf(A_Psi) * prod_{a in Psi} mu_{a; all three edges}

and ``Z = Z_BP * sum_Psi Z_Psi``. Psi = {} gives z_empty, the sum over all
2-regular loops. Terms are produced in a fixed order (|Psi| ascending,
then lexicographic node ids) so that the series can be cut at any point.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from .bp import BPResult
from .extended import check_psi, fisher_extend, kasteleyn_orient
from .forney import ForneyGraph, two_core
from .loops import vertex_terms
from .pfaffian import build_skew_matrices, slogpf


@dataclass(frozen=True)
class PfaffianTerm:
    psi: tuple[int, ...]
    z_psi: float
    mu_prefactor: float
    contribution: float
    n_gext: int
    seconds: float


@dataclass(frozen=True)
class SeriesLimits:
    max_subset_size: int | None = None
    max_terms: int | None = None
    time_budget: float | None = None  # seconds

    def __post_init__(self):
        for name in ("max_subset_size", "max_terms", "time_budget"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class SeriesResult:
    bethe_log_z: float
    terms: tuple[PfaffianTerm, ...] = field(repr=False)
    running: tuple[float, ...] = field(repr=False)
    z: float
    log_z: float | None
    bp_converged: bool
    truncation: str
    n_triplets: int

    @property
    def nonpositive(self) -> bool:
        return self.log_z is None


class _Core:
    """2-core and cached vertex terms shared by all terms of one series."""

    def __init__(self, graph: ForneyGraph, bp: BPResult):
        self.core, self.record = two_core(graph)
        self.weights = vertex_terms(bp, self.core)
        self.triplets = sorted(self.core.triplets())


def _signed_z(ext) -> float:
    orient = kasteleyn_orient(ext)
    a, b = build_skew_matrices(ext, orient)
    sb, _ = slogpf(b)
    if sb == 0:
        return 0.0
    sa, la = slogpf(a)
    if sa == 0:
        return 0.0
    return sa * sb * math.exp(la)


def _term(prep: _Core, psi) -> PfaffianTerm:
    t0 = time.perf_counter()
    psi = check_psi(prep.core, psi)
    ext = fisher_extend(prep.core, None, psi, weights=prep.weights)
    z_psi = _signed_z(ext)
    pref = 1.0
    for a in sorted(psi):
        pref *= prep.weights[a][frozenset(prep.core.nodes[a].edges)]
    return PfaffianTerm(tuple(sorted(psi)), z_psi, pref, z_psi * pref, ext.n_nodes,
                        time.perf_counter() - t0)


def z_empty(graph: ForneyGraph, bp: BPResult) -> float:
    """Sum of 1 and all 2-regular loop terms, through one Pfaffian pair."""
    prep = _Core(graph, bp)
    if prep.core.is_empty():
        return 1.0
    return _term(prep, ()).z_psi


def pfaffian_term(graph: ForneyGraph, bp: BPResult, psi=()) -> PfaffianTerm:
    prep = _Core(graph, bp)
    if prep.core.is_empty():
        check_psi(prep.core, psi)
        return PfaffianTerm((), 1.0, 1.0, 1.0, 0, 0.0)
    return _term(prep, psi)


def psi_order(triplets, max_subset_size=None) -> Iterator[tuple[int, ...]]:
    """Even subsets of ``triplets``: size ascending, then lexicographic."""
    triplets = sorted(triplets)
    top = len(triplets) if max_subset_size is None else min(max_subset_size, len(triplets))
    for k in range(0, top + 1, 2):
        yield from combinations(triplets, k)


def iter_pfaffian_terms(graph: ForneyGraph, bp: BPResult, max_subset_size=None) -> Iterator[PfaffianTerm]:
    """Stream terms in canonical order; stop consuming to truncate."""
    prep = _Core(graph, bp)
    if prep.core.is_empty():
        yield PfaffianTerm((), 1.0, 1.0, 1.0, 0, 0.0)
        return
    for psi in psi_order(prep.triplets, max_subset_size):
        yield _term(prep, psi)


def run_series(graph: ForneyGraph, bp: BPResult, limits: SeriesLimits | None = None) -> SeriesResult:
    """Accumulate Pfaffian terms until exhaustion or the first limit hit."""
    limits = limits or SeriesLimits()
    prep = _Core(graph, bp)
    n_t = len(prep.triplets)
    total_subsets = 2 ** (n_t - 1) if n_t else 1
    t_start = time.perf_counter()

    terms, running = [], []
    z = 0.0
    if prep.core.is_empty():
        gen = iter([PfaffianTerm((), 1.0, 1.0, 1.0, 0, 0.0)])
    else:
        gen = (_term(prep, psi) for psi in psi_order(prep.triplets, limits.max_subset_size))
    truncation = "exhausted"
    while True:
        if limits.max_terms is not None and len(terms) >= limits.max_terms:
            truncation = "term_cap"
            break
        if (terms and limits.time_budget is not None
                and time.perf_counter() - t_start >= limits.time_budget):
            truncation = "budget"
            break
        term = next(gen, None)
        if term is None:
            break
        terms.append(term)
        z += term.contribution
        running.append(z)
    if truncation == "exhausted" and len(terms) < total_subsets:
        truncation = "term_cap"
    if truncation == "term_cap" and len(terms) == total_subsets:
        truncation = "exhausted"

    log_z = bp.bethe_log_z + math.log(z) if z > 0 else None
    return SeriesResult(bp.bethe_log_z, tuple(terms), tuple(running), z, log_z,
                        bp.converged, truncation, n_t)
