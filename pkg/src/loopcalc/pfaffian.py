"""Signed Pfaffians of real skew-symmetric matrices.

:func:`slogpf` runs Parlett-Reid elimination: at step k the largest entry
of column k below the diagonal is swapped into row k+1 (with the matching
column swap), then a skew rank-2 update clears column and row k beyond
k+1. The Pfaffian is the product of the pivots A[k, k+1], with one sign
flip per swap. Updates are restricted to the rows that are actually
nonzero in the pivot column pair, so banded matrices (extended graphs of
grids in canonical port order) cost far less than n**3.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NotSkew, OddDimension
from .extended import ExtendedGraph, KasteleynOrientation

ZERO_PIVOT = 1e-13


def _checked(a, atol=0.0):
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSkew(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotSkew("matrix has non-finite entries")
    scale = max(float(np.max(np.abs(a))) if a.size else 0.0, 1.0)
    if np.any(np.abs(a + a.T) > atol * scale) or np.any(np.diag(a) != 0):
        raise NotSkew("matrix is not skew-symmetric")
    if a.shape[0] % 2:
        raise OddDimension(f"Pfaffian needs even dimension, got {a.shape[0]}")
    return a


def slogpf(a, atol: float = 1e-12) -> tuple[float, float]:
    """``(sign, log|Pf(a)|)``; sign is 0.0 (and log -inf) for a zero Pfaffian."""
    a = _checked(a, atol)
    n = a.shape[0]
    if n == 0:
        return 1.0, 0.0
    threshold = ZERO_PIVOT * float(np.max(np.abs(a)))
    sign = 1.0
    logabs = 0.0
    for k in range(0, n - 1, 2):
        col = np.abs(a[k + 1:, k])
        kp = k + 1 + int(np.argmax(col))
        if col[kp - k - 1] <= threshold:
            return 0.0, -math.inf
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            sign = -sign
        piv = a[k, k + 1]
        sign *= math.copysign(1.0, piv)
        logabs += math.log(abs(piv))
        if k + 2 < n:
            tau = a[k, k + 2:] / piv
            v = a[k + 2:, k + 1]
            nz = np.flatnonzero((tau != 0) | (v != 0))
            if nz.size:
                lo, hi = k + 2 + nz[0], k + 2 + nz[-1] + 1
                t = tau[lo - k - 2:hi - k - 2]
                w = v[lo - k - 2:hi - k - 2]
                # columns outside [lo, hi) of rows in [lo, hi) are unchanged
                a[lo:hi, lo:hi] += np.outer(t, w) - np.outer(w, t)
    return sign, logabs


def pfaffian(a, atol: float = 1e-12) -> float:
    sign, logabs = slogpf(a, atol)
    return sign * math.exp(logabs) if sign else 0.0


def pfaffian_pairings(a) -> float:
    """Pfaffian as the signed sum over all (n-1)!! pairings. Small n only."""
    a = _checked(a)
    n = a.shape[0]

    def rec(items):
        if not items:
            return 1.0
        i = items[0]
        total = 0.0
        for pos in range(1, len(items)):
            j = items[pos]
            if a[i, j] == 0:
                continue
            rest = items[1:pos] + items[pos + 1:]
            # moving j next to i passes pos-1 elements
            total += (-1) ** (pos - 1) * a[i, j] * rec(rest)
        return total

    return rec(list(range(n)))


def permutation_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for s in range(len(perm)):
        if seen[s]:
            continue
        length = 0
        x = s
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def build_skew_matrices(ext: ExtendedGraph, orient: KasteleynOrientation) -> tuple[np.ndarray, np.ndarray]:
    """Weighted matrix A and its unit-magnitude twin B for an oriented extended graph.

    ``A[i, j] = +w`` if the edge is oriented i -> j and ``-w`` if j -> i.
    """
    n = ext.n_nodes
    if n % 2:
        raise OddDimension(f"extended graph has {n} ports")
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    for k, e in enumerate(ext.edges):
        i, j = (e.u, e.v) if orient.forward[k] else (e.v, e.u)
        a[i, j], a[j, i] = e.weight, -e.weight
        b[i, j], b[j, i] = 1.0, -1.0
    return a, b


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    u = np.triu(rng.uniform(-1.0, 1.0, (n, n)), 1)
    return u - u.T


def to_debug_text(a) -> str:
    """``n`` on the first line, then the strict upper triangle row by row."""
    a = _checked(a)
    n = a.shape[0]
    lines = [str(n)]
    for i in range(n - 1):
        lines.append(" ".join(repr(float(x)) for x in a[i, i + 1:]))
    return "\n".join(lines) + "\n"


def from_debug_text(text: str) -> np.ndarray:
    rows = text.strip().splitlines()
    n = int(rows[0])
    a = np.zeros((n, n))
    for i, line in enumerate(rows[1:n]):
        vals = [float(x) for x in line.split()]
        a[i, i + 1:] = vals
    return a - a.T
