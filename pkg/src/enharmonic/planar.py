"""Planar embeddings, face tracing, the dual network and enharmonic conjugates.

A dart is a pair ``(edge index, s)`` with ``s = +1`` for the stored direction
tail -> head and ``s = -1`` for the reverse.  Faces are traced with the face
kept on the left of each dart, so bounded faces come out counterclockwise and
the outer face clockwise.  The outer face is split into one arc per gap
between consecutive boundary vertices, as if rays were drawn from every
boundary vertex to infinity.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import BoundaryNotOnOuterFace, NotIntegrable, NotPlanar
from .network import Network

log = logging.getLogger(__name__)

INTEGRABILITY_TOL = 1e-9


def dart_ends(net: Network, dart) -> tuple:
    """``(origin index, destination index)`` of a dart."""
    k, s = dart
    t, h = int(net.tails[k]), int(net.heads[k])
    return (t, h) if s > 0 else (h, t)


@dataclass(frozen=True, eq=False)
class PlanarEmbedding:
    """Rotation system of a network plus a choice of outer face.

    ``rotation`` maps each vertex id to its incident edge ids in counterclockwise
    order.  ``outer`` is a dart ``(edge id, +1 or -1)`` whose left face is the
    outer face; when omitted the face containing every boundary vertex is used.
    """

    net: Network
    rotation: dict
    outer: tuple | None = None

    @cached_property
    def _rot(self) -> list:
        ei = self.net.edge_index
        rot = []
        for i, v in enumerate(self.net.vertices):
            ids = [ei[e] for e in self.rotation.get(v, ())]
            expected = sorted(k for k, _ in self.net.incident[i])
            if sorted(ids) != expected:
                raise NotPlanar(f"rotation at {v!r} does not list exactly its incident edges")
            rot.append(ids)
        return rot

    @cached_property
    def _position(self) -> dict:
        return {(i, k): j for i, ids in enumerate(self._rot) for j, k in enumerate(ids)}

    def next_dart(self, dart) -> tuple:
        """Successor of ``dart`` along its left face."""
        net = self.net
        k, _ = dart
        _, y = dart_ends(net, dart)
        ids = self._rot[y]
        j = self._position[(y, k)]
        k2 = ids[(j - 1) % len(ids)]
        return (k2, 1) if int(net.tails[k2]) == y else (k2, -1)

    @cached_property
    def faces(self) -> list:
        """Every face as the list of darts having it on their left."""
        seen = set()
        faces = []
        for k in range(self.net.n_edges):
            for s in (1, -1):
                if (k, s) in seen:
                    continue
                face, d = [], (k, s)
                while d not in seen:
                    seen.add(d)
                    face.append(d)
                    d = self.next_dart(d)
                faces.append(face)
        return faces

    @cached_property
    def face_of(self) -> dict:
        return {d: i for i, face in enumerate(self.faces) for d in face}

    def face_vertices(self, i: int) -> list:
        return [self.net.vertices[dart_ends(self.net, d)[0]] for d in self.faces[i]]

    @cached_property
    def outer_face(self) -> int:
        net = self.net
        if self.outer is not None:
            eid, s = self.outer
            return self.face_of[(net.edge_index[eid], 1 if s > 0 else -1)]
        b = net.boundary_set
        best = None
        for i, face in enumerate(self.faces):
            if b <= set(self.face_vertices(i)):
                if best is None or len(face) > len(self.faces[best]):
                    best = i
        if best is None:
            raise BoundaryNotOnOuterFace("no face contains every boundary vertex")
        return best

    def check(self) -> None:
        """Raise unless the rotation system is planar with the boundary outside."""
        v, e, f = self.net.n_vertices, self.net.n_edges, len(self.faces)
        if v - e + f != 2:
            raise NotPlanar(f"Euler characteristic V - E + F = {v - e + f}, expected 2")
        missing = self.net.boundary_set - set(self.face_vertices(self.outer_face))
        if missing:
            raise BoundaryNotOnOuterFace(f"boundary vertices {sorted(map(str, missing))} "
                                         "are not on the outer face")

    @cached_property
    def boundary_cycle(self) -> tuple:
        """Boundary vertices in the order met along the (clockwise) outer walk."""
        walk = self.face_vertices(self.outer_face)
        b = self.net.boundary_set
        out = []
        for v in walk:
            if v in b and v not in out:
                out.append(v)
        return tuple(out)


def rotation_from_positions(net: Network, pos: Mapping) -> dict:
    """Counterclockwise rotation system of a straight-line drawing."""
    rot = {}
    for i, v in enumerate(net.vertices):
        p = np.asarray(pos[v], dtype=float)
        angles = []
        for k, w in net.incident[i]:
            q = np.asarray(pos[net.vertices[w]], dtype=float)
            angles.append((np.arctan2(q[1] - p[1], q[0] - p[0]), k))
        rot[v] = [net.edges[k].id for _, k in sorted(angles)]
    return rot


def embedding_from_positions(net: Network, pos: Mapping) -> PlanarEmbedding:
    """Embedding of a straight-line drawing; the outer face is the one of
    negative signed area (traced clockwise)."""
    emb = PlanarEmbedding(net, rotation_from_positions(net, pos))
    areas = []
    for face in emb.faces:
        a = 0.0
        for d in face:
            x, y = dart_ends(net, d)
            p, q = pos[net.vertices[x]], pos[net.vertices[y]]
            a += p[0] * q[1] - q[0] * p[1]
        areas.append(a / 2)
    i = int(np.argmin(areas))
    k, s = emb.faces[i][0]
    return PlanarEmbedding(net, emb.rotation, (net.edges[k].id, s))


@dataclass(frozen=True, eq=False)
class DualNetwork:
    """Dual vertices are bounded faces ``"f{i}"`` and outer arcs ``"o{j}"``.

    ``left[k]`` and ``right[k]`` are the dual vertices on either side of primal
    edge ``k`` traversed tail -> head.  ``rays`` joins consecutive outer arcs
    across the boundary vertex between them.
    """

    embedding: PlanarEmbedding
    vertices: tuple
    left: tuple
    right: tuple
    rays: tuple  # (arc before, arc after, boundary vertex)
    face_vertex: dict  # face index (or ("arc", j)) -> dual vertex id

    @property
    def n_bounded_faces(self) -> int:
        return sum(1 for v in self.vertices if v.startswith("f"))

    @property
    def arcs(self) -> tuple:
        return tuple(v for v in self.vertices if v.startswith("o"))


def build_dual(embedding: PlanarEmbedding) -> DualNetwork:
    embedding.check()
    net = embedding.net
    outer = embedding.outer_face
    walk = embedding.faces[outer]
    if len(net.boundary) < 2:
        raise BoundaryNotOnOuterFace("need at least two boundary vertices")
    b = net.boundary_set
    corners, seen = [], set()
    for p, d in enumerate(walk):
        v = net.vertices[dart_ends(net, d)[0]]
        if v in b and v not in seen:
            seen.add(v)
            corners.append((p, v))
    n_arcs = len(corners)
    arc_of = {}
    for j, (p, _) in enumerate(corners):
        end = corners[(j + 1) % n_arcs][0]
        q = p
        while True:
            arc_of[walk[q]] = j
            q = (q + 1) % len(walk)
            if q == end:
                break

    face_vertex = {}
    names = []
    for i in range(len(embedding.faces)):
        if i != outer:
            face_vertex[i] = f"f{len(names)}"
            names.append(face_vertex[i])
    for j in range(n_arcs):
        face_vertex[("arc", j)] = f"o{j}"
        names.append(f"o{j}")

    def side(dart):
        i = embedding.face_of[dart]
        return face_vertex[("arc", arc_of[dart])] if i == outer else face_vertex[i]

    left = tuple(side((k, 1)) for k in range(net.n_edges))
    right = tuple(side((k, -1)) for k in range(net.n_edges))
    rays = tuple((f"o{(j - 1) % n_arcs}", f"o{j}", corners[j][1]) for j in range(n_arcs))
    return DualNetwork(embedding, tuple(names), left, right, rays, face_vertex)


@dataclass(frozen=True, eq=False)
class ConjugateFunction:
    dual: DualNetwork
    g: dict
    base: str

    def jump(self, k: int) -> float:
        """``g(right) - g(left)`` across primal edge index ``k``."""
        return self.g[self.dual.right[k]] - self.g[self.dual.left[k]]


def default_base(dual: DualNetwork, f: np.ndarray) -> str:
    """Outer arc that follows the lowest boundary vertex along the clockwise walk."""
    net = dual.embedding.net
    vi = net.vertex_index
    low = min(net.boundary, key=lambda v: f[vi[v]])
    for before, after, v in dual.rays:
        if v == low:
            return after
    raise BoundaryNotOnOuterFace(f"boundary vertex {low!r} has no outer arc")


def conjugate(embedding: PlanarEmbedding, solution, base: str | None = None,
              dual: DualNetwork | None = None) -> ConjugateFunction:
    """Dual function ``g`` with ``(g(right) - g(left)) * (f(head) - f(tail)) = E``.

    ``solution`` needs ``h`` (the primal function f) and ``energies``.
    """
    net = embedding.net
    f = np.asarray(solution.h, dtype=float)
    E = np.asarray(solution.energies, dtype=float)
    dual = build_dual(embedding) if dual is None else dual
    dh = f[net.heads] - f[net.tails]
    jump = E / dh

    n = net.n_vertices
    res = (np.bincount(net.tails, weights=jump, minlength=n)
           - np.bincount(net.heads, weights=jump, minlength=n))
    tol = INTEGRABILITY_TOL * float(E.sum())
    for i in np.argsort(-np.abs(res)):
        v = net.vertices[i]
        if v in net.boundary_set:
            continue
        if abs(res[i]) > tol:
            raise NotIntegrable(v, float(abs(res[i])))
        break

    adj = {v: [] for v in dual.vertices}
    for k in range(net.n_edges):
        adj[dual.left[k]].append((dual.right[k], jump[k]))
        adj[dual.right[k]].append((dual.left[k], -jump[k]))
    ray_adj = {v: [] for v in dual.vertices}
    for a, b, _ in dual.rays:
        ray_adj[a].append(b)
        ray_adj[b].append(a)

    base = default_base(dual, f) if base is None else base
    g = {base: 0.0}
    queue = deque([base])
    while True:
        while queue:
            s = queue.popleft()
            for t, dj in adj[s]:
                if t not in g:
                    g[t] = g[s] + dj
                    queue.append(t)
        if len(g) == len(dual.vertices):
            break
        # a component reachable only across a ray: continue g across the ray
        for a in dual.vertices:
            if a in g:
                continue
            nb = [b for b in ray_adj[a] if b in g]
            if nb:
                g[a] = g[nb[0]]
                queue.append(a)
                break
        else:
            raise NotIntegrable(None, float("nan"))

    defect = max((abs(g[dual.right[k]] - g[dual.left[k]] - jump[k]) for k in range(net.n_edges)),
                 default=0.0)
    if defect > tol:
        raise NotIntegrable(None, defect)
    return ConjugateFunction(dual, g, base)


@dataclass(frozen=True, eq=False)
class SmithDiagram:
    """One rectangle ``(x0, y0, x1, y1)`` per primal edge, x from g and y from f."""

    edge_ids: tuple
    rects: np.ndarray
    energies: np.ndarray

    @property
    def bounds(self) -> tuple:
        r = self.rects
        return (float(r[:, 0].min()), float(r[:, 1].min()), float(r[:, 2].max()), float(r[:, 3].max()))

    @property
    def width(self) -> float:
        x0, _, x1, _ = self.bounds
        return x1 - x0

    @property
    def height(self) -> float:
        _, y0, _, y1 = self.bounds
        return y1 - y0

    @property
    def areas(self) -> np.ndarray:
        r = self.rects
        return (r[:, 2] - r[:, 0]) * (r[:, 3] - r[:, 1])

    def rect(self, edge_id) -> tuple:
        return tuple(float(x) for x in self.rects[self.edge_ids.index(edge_id)])

    def horizontal_levels(self, tol: float = 1e-12) -> list:
        ys = np.unique(np.concatenate([self.rects[:, 1], self.rects[:, 3]]))
        out = []
        for y in ys:
            if not out or y - out[-1] > tol:
                out.append(float(y))
        return out

    def max_overlap(self) -> float:
        """Largest pairwise intersection area (zero for a valid diagram)."""
        r = self.rects
        worst = 0.0
        for i in range(len(r)):
            w = np.minimum(r[i, 2], r[i + 1:, 2]) - np.maximum(r[i, 0], r[i + 1:, 0])
            h = np.minimum(r[i, 3], r[i + 1:, 3]) - np.maximum(r[i, 1], r[i + 1:, 1])
            ov = np.clip(w, 0, None) * np.clip(h, 0, None)
            if ov.size:
                worst = max(worst, float(ov.max()))
        return worst

    def to_json(self) -> dict:
        x0, y0, x1, y1 = self.bounds
        return {
            "bounds": [x0, y0, x1, y1],
            "tiles": [{"id": eid, "x0": float(r[0]), "y0": float(r[1]), "x1": float(r[2]), "y1": float(r[3])}
                      for eid, r in zip(self.edge_ids, self.rects)],
        }


def smith_diagram(embedding: PlanarEmbedding, solution, base: str | None = None) -> SmithDiagram:
    net = embedding.net
    conj = conjugate(embedding, solution, base=base)
    f = np.asarray(solution.h, dtype=float)
    gl = np.array([conj.g[v] for v in conj.dual.left])
    gr = np.array([conj.g[v] for v in conj.dual.right])
    ft, fh = f[net.tails], f[net.heads]
    rects = np.column_stack([np.minimum(gl, gr), np.minimum(ft, fh), np.maximum(gl, gr), np.maximum(ft, fh)])
    return SmithDiagram(tuple(e.id for e in net.edges), rects, np.asarray(solution.energies, dtype=float))
