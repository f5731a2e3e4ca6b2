"""Random Ising grids and their planar Forney-graph encoding.

The grid model is

    p(s) ~ exp( sum_<ij> J_ij s_i s_j + sum_i h_i s_i ),  s_i in {-1, +1}

with couplings ``J ~ N(0, beta/2)`` and fields ``h ~ N(0, beta*theta)``
(second argument read as the standard deviation). In attractive mode the
absolute values are used.

Random numbers come from numpy's PCG64 bit generator seeded with the
64-bit ``seed``; normals use ``Generator.standard_normal`` (ziggurat).
Draw order: horizontal couplings (row-major), vertical couplings
(row-major), fields (row-major).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import TooLarge
from .forney import ForneyGraph, build_forney_graph

MODES = ("mixed", "attractive")


@dataclass(frozen=True)
class IsingParams:
    rows: int
    cols: int
    beta: float
    theta: float
    mode: str = "mixed"
    seed: int = 0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError("rows and cols must be >= 2")
        if self.beta < 0 or self.theta < 0:
            raise ValueError("beta and theta must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class IsingCouplings:
    """Grid parameters: ``horizontal[r, c]`` couples (r, c)-(r, c+1),
    ``vertical[r, c]`` couples (r, c)-(r+1, c)."""

    horizontal: np.ndarray
    vertical: np.ndarray
    fields: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.fields.shape


def sample_couplings(params: IsingParams) -> IsingCouplings:
    rng = np.random.Generator(np.random.PCG64(params.seed))
    r, c = params.rows, params.cols
    horizontal = rng.standard_normal((r, c - 1)) * (params.beta / 2)
    vertical = rng.standard_normal((r - 1, c)) * (params.beta / 2)
    fields = rng.standard_normal((r, c)) * (params.beta * params.theta)
    if params.mode == "attractive":
        horizontal, vertical, fields = np.abs(horizontal), np.abs(vertical), np.abs(fields)
    for a in (horizontal, vertical, fields):
        a.setflags(write=False)
    return IsingCouplings(horizontal, vertical, fields)


def ising_grid_forney(params: IsingParams) -> ForneyGraph:
    return forney_from_couplings(sample_couplings(params))


def _coupling_table(j):
    a, b = math.exp(j), math.exp(-j)
    return [a, b, b, a]


def _equality_table(d):
    t = [0.0] * (2**d)
    t[0] = t[-1] = 1.0
    return t


def forney_from_couplings(couplings: IsingCouplings) -> ForneyGraph:
    """Encode an Ising grid as a planar Forney graph with max degree 3.

    Each bond becomes a degree-2 coupling node at the bond midpoint, each
    field a degree-1 leaf, and each site a chain of equality nodes: a site
    with k incidences (bonds plus its field) gets one node if k <= 3, else
    a path of k - 2 degree-3 nodes. Incidences are split over the chain in
    angular order, so the straight-line drawing is planar and the rotation
    at every node is read off by sorting neighbours by angle.
    """
    rows, cols = couplings.shape
    pos = {}
    tables = {}
    edge_ends = []
    next_id = [0]

    def new_node(xy, table):
        nid = next_id[0]
        next_id[0] += 1
        pos[nid] = xy
        tables[nid] = table
        return nid

    # directions in angular order; the field leaf sits on the NE diagonal
    dirs = {"E": 0.0, "F": 45.0, "N": 90.0, "W": 180.0, "S": 270.0}
    site_slots = {}
    for r in range(rows):
        for c in range(cols):
            present = ["E", "F", "N", "W", "S"]
            if c == cols - 1:
                present.remove("E")
            if r == 0:
                present.remove("N")
            if c == 0:
                present.remove("W")
            if r == rows - 1:
                present.remove("S")
            k = len(present)
            if k <= 3:
                groups = [present]
            else:
                groups = [present[:2]] + [[d] for d in present[2:-2]] + [present[-2:]]
            x0, y0 = float(c), -float(r)
            chain = []
            for grp in groups:
                vx = sum(math.cos(math.radians(dirs[d])) for d in grp)
                vy = sum(math.sin(math.radians(dirs[d])) for d in grp)
                norm = math.hypot(vx, vy)
                idx = len(chain)
                deg = len(grp) + (idx > 0) + (idx < len(groups) - 1)
                nid = new_node((x0 + 0.15 * vx / norm, y0 + 0.15 * vy / norm), _equality_table(deg))
                chain.append(nid)
                for d in grp:
                    site_slots[(r, c, d)] = nid
            for a, b in zip(chain, chain[1:]):
                edge_ends.append((a, b))
            h = float(couplings.fields[r, c])
            leaf = new_node((x0 + 0.3, y0 + 0.3), [math.exp(-h), math.exp(h)])
            edge_ends.append((site_slots[(r, c, "F")], leaf))
            if c + 1 < cols:
                j = float(couplings.horizontal[r, c])
                mid = new_node((x0 + 0.5, y0), _coupling_table(j))
                edge_ends.append((site_slots[(r, c, "E")], mid))
                site_slots[("pendingW", r, c + 1)] = mid
            if r + 1 < rows:
                j = float(couplings.vertical[r, c])
                mid = new_node((x0, y0 - 0.5), _coupling_table(j))
                edge_ends.append((site_slots[(r, c, "S")], mid))
                site_slots[("pendingN", r + 1, c)] = mid
    for r in range(rows):
        for c in range(cols):
            if c > 0:
                edge_ends.append((site_slots[("pendingW", r, c)], site_slots[(r, c, "W")]))
            if r > 0:
                edge_ends.append((site_slots[("pendingN", r, c)], site_slots[(r, c, "N")]))

    incident = {n: [] for n in pos}
    for eid, (a, b) in enumerate(edge_ends):
        incident[a].append(eid)
        incident[b].append(eid)

    def angle(n, eid):
        a, b = edge_ends[eid]
        other = b if a == n else a
        return math.atan2(pos[other][1] - pos[n][1], pos[other][0] - pos[n][0]) % (2 * math.pi)

    node_specs = []
    for n in sorted(pos):
        rot = sorted(incident[n], key=lambda e: angle(n, e))
        node_specs.append({"id": n, "edges": rot, "table": tables[n]})
    edge_specs = [{"id": eid, "ends": list(ends)} for eid, ends in enumerate(edge_ends)]
    return build_forney_graph(node_specs, edge_specs)


def ising_log_z(couplings: IsingCouplings, max_sites: int = 24, chunk_bits: int = 18) -> float:
    """log Z by direct enumeration of all 2**(rows*cols) site configurations."""
    rows, cols = couplings.shape
    n = rows * cols
    if n > max_sites:
        raise TooLarge(f"{n} sites exceeds the enumeration cap of {max_sites}")
    step = 2 ** min(n, chunk_bits)
    parts = []
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, 2**n, step):
        states = np.arange(start, start + step, dtype=np.int64)
        s = (2 * ((states[:, None] >> shifts) & 1) - 1).reshape(step, rows, cols).astype(float)
        energy = np.einsum("kij,ij->k", s, couplings.fields)
        energy += np.einsum("kij,kij,ij->k", s[:, :, :-1], s[:, :, 1:], couplings.horizontal)
        energy += np.einsum("kij,kij,ij->k", s[:, :-1, :], s[:, 1:, :], couplings.vertical)
        parts.append(logsumexp(energy))
    return float(logsumexp(parts))
