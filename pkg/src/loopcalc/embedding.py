"""Combinatorial maps: face tracing and Euler checks for rotation systems.

A graph is given as a list of edge endpoints ``(u, v)`` over vertices
``0..n-1`` plus a rotation: for every vertex, the cyclic order of its
incident edge indices. A dart is ``(edge, side)`` where side 0 runs
``u -> v`` and side 1 runs ``v -> u``.

Faces are traced with the usual rule: after arriving at ``y`` along edge
``e``, leave along the successor of ``e`` in the rotation at ``y``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import InconsistentRotation, NonPlanarEmbedding

Dart = tuple[int, int]


@dataclass(frozen=True)
class Face:
    darts: tuple[Dart, ...]
    component: int

    def __len__(self) -> int:
        return len(self.darts)


def dart_tail(endpoints: Sequence[tuple[int, int]], dart: Dart) -> int:
    e, s = dart
    return endpoints[e][s]


def dart_head(endpoints: Sequence[tuple[int, int]], dart: Dart) -> int:
    e, s = dart
    return endpoints[e][1 - s]


def check_rotation(n_vertices, endpoints, rotation):
    """Raise InconsistentRotation unless each rotation lists exactly the incident edges."""
    if len(rotation) != n_vertices:
        raise InconsistentRotation(f"expected {n_vertices} rotations, got {len(rotation)}")
    incident = [[] for _ in range(n_vertices)]
    for e, (u, v) in enumerate(endpoints):
        if u == v:
            raise InconsistentRotation(f"edge {e} is a self-loop")
        incident[u].append(e)
        incident[v].append(e)
    for x in range(n_vertices):
        if sorted(rotation[x]) != sorted(incident[x]):
            raise InconsistentRotation(
                f"rotation at vertex {x} is {list(rotation[x])}, incident edges are {incident[x]}"
            )


def connected_components(n_vertices, endpoints) -> list[int]:
    """Component label per vertex, labels assigned in order of lowest vertex."""
    adj = [[] for _ in range(n_vertices)]
    for u, v in endpoints:
        adj[u].append(v)
        adj[v].append(u)
    label = [-1] * n_vertices
    c = 0
    for s in range(n_vertices):
        if label[s] >= 0:
            continue
        label[s] = c
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if label[y] < 0:
                    label[y] = c
                    queue.append(y)
        c += 1
    return label


def trace_faces(n_vertices, endpoints, rotation, check_euler=True) -> list[Face]:
    """Trace every face of the map; each dart lies on exactly one face.

    Isolated vertices contribute no face walk. With ``check_euler`` the
    identity V - E + F = 2 is enforced per connected component (an isolated
    vertex counts as one face) and NonPlanarEmbedding is raised otherwise.
    """
    check_rotation(n_vertices, endpoints, rotation)
    position = {}
    for x, rot in enumerate(rotation):
        for i, e in enumerate(rot):
            position[(x, e)] = i
    comp = connected_components(n_vertices, endpoints)

    seen = set()
    faces = []
    for e0 in range(len(endpoints)):
        for s0 in (0, 1):
            if (e0, s0) in seen:
                continue
            walk = []
            dart = (e0, s0)
            while dart not in seen:
                seen.add(dart)
                walk.append(dart)
                e, s = dart
                y = endpoints[e][1 - s]
                rot = rotation[y]
                nxt = rot[(position[(y, e)] + 1) % len(rot)]
                dart = (nxt, 0 if endpoints[nxt][0] == y else 1)
            if dart != (e0, s0):
                raise InconsistentRotation("face walk did not close")
            faces.append(Face(tuple(walk), comp[endpoints[e0][0]]))

    if check_euler:
        check_euler_identity(n_vertices, endpoints, faces, comp)
    return faces


def check_euler_identity(n_vertices, endpoints, faces, comp=None):
    if comp is None:
        comp = connected_components(n_vertices, endpoints)
    n_comp = max(comp, default=-1) + 1
    v = [0] * n_comp
    e = [0] * n_comp
    f = [0] * n_comp
    for x in range(n_vertices):
        v[comp[x]] += 1
    for a, _ in endpoints:
        e[comp[a]] += 1
    for face in faces:
        f[face.component] += 1
    for c in range(n_comp):
        faces_c = f[c] if e[c] else 1
        if v[c] - e[c] + faces_c != 2:
            raise NonPlanarEmbedding(
                f"component {c}: V - E + F = {v[c]} - {e[c]} + {faces_c} != 2"
            )
