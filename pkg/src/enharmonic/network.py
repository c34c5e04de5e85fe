"""Graphs with boundary, orientations and the edge chain spaces.

Vertex functions are numpy arrays aligned with ``net.vertices`` and edge
functions are arrays aligned with ``net.edges``; most entry points also accept
plain mappings keyed by id.  An orientation is a tuple of signs, one per edge,
where ``+1`` means the edge is directed from its stored tail to its head.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Mapping, Sequence

import networkx as nx
import numpy as np
import scipy.linalg

from .errors import InvalidNetwork, TooLarge, ZeroDifference

Orientation = tuple  # tuple[int, ...] of +1/-1, aligned with net.edges

DEFAULT_ENUMERATION_CAP = 24


@dataclass(frozen=True)
class Edge:
    id: Hashable
    tail: Hashable
    head: Hashable


@dataclass(frozen=True, eq=False)
class Network:
    """A finite multigraph with a designated ordered boundary vertex set."""

    vertices: tuple
    edges: tuple
    boundary: tuple

    @classmethod
    def build(cls, vertices: Sequence, edges: Sequence, boundary: Sequence) -> "Network":
        """Build from ``(id, tail, head)`` triples (or :class:`Edge` objects)."""
        es = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
        return cls(tuple(vertices), es, tuple(boundary))

    @cached_property
    def vertex_index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> dict:
        return {e.id: i for i, e in enumerate(self.edges)}

    @cached_property
    def tails(self) -> np.ndarray:
        vi = self.vertex_index
        return np.array([vi[e.tail] for e in self.edges], dtype=np.intp)

    @cached_property
    def heads(self) -> np.ndarray:
        vi = self.vertex_index
        return np.array([vi[e.head] for e in self.edges], dtype=np.intp)

    @cached_property
    def boundary_set(self) -> frozenset:
        return frozenset(self.boundary)

    @cached_property
    def interior(self) -> tuple:
        b = self.boundary_set
        return tuple(v for v in self.vertices if v not in b)

    @cached_property
    def incident(self) -> list:
        """Per vertex index, the list of ``(edge index, other vertex index)``."""
        out = [[] for _ in self.vertices]
        for k, (t, h) in enumerate(zip(self.tails, self.heads)):
            out[t].append((k, int(h)))
            out[h].append((k, int(t)))
        return out

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_array(self, values, default=np.nan) -> np.ndarray:
        """Coerce a vertex function (mapping or sequence) to an aligned array."""
        if isinstance(values, Mapping):
            arr = np.full(self.n_vertices, default, dtype=float)
            vi = self.vertex_index
            for v, x in values.items():
                arr[vi[v]] = float(x)
            return arr
        arr = np.asarray(values, dtype=float)
        if arr.shape != (self.n_vertices,):
            raise ValueError(f"expected {self.n_vertices} vertex values, got shape {arr.shape}")
        return arr

    def edge_array(self, values) -> np.ndarray:
        if isinstance(values, Mapping):
            ei = self.edge_index
            arr = np.full(self.n_edges, np.nan)
            for e, x in values.items():
                arr[ei[e]] = float(x)
            if np.isnan(arr).any():
                missing = [self.edges[k].id for k in np.flatnonzero(np.isnan(arr))]
                raise ValueError(f"missing edge values for {missing}")
            return arr
        arr = np.asarray(values, dtype=float)
        if arr.shape != (self.n_edges,):
            raise ValueError(f"expected {self.n_edges} edge values, got shape {arr.shape}")
        return arr

    def vertex_dict(self, arr) -> dict:
        return {v: float(x) for v, x in zip(self.vertices, arr)}

    def edge_dict(self, arr) -> dict:
        return {e.id: (int(x) if isinstance(x, (int, np.integer)) else float(x))
                for e, x in zip(self.edges, arr)}

    def orientation(self, signs) -> Orientation:
        """Coerce a sign mapping or sequence to an orientation tuple."""
        if isinstance(signs, Mapping):
            signs = [signs[e.id] for e in self.edges]
        sigma = tuple(int(np.sign(s)) for s in signs)
        if len(sigma) != self.n_edges or any(s not in (1, -1) for s in sigma):
            raise ValueError("orientation needs a sign of +1 or -1 on every edge")
        return sigma

    def directed_pairs(self, sigma: Orientation):
        """Yield ``(from index, to index)`` per edge under ``sigma``."""
        for t, h, s in zip(self.tails, self.heads, sigma):
            yield (int(t), int(h)) if s > 0 else (int(h), int(t))


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    bad_edges: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations),
                "bad_edges": list(self.bad_edges)}


def _simple_graph(net: Network, extra_hub=None) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(net.n_vertices))
    g.add_edges_from(zip(net.tails.tolist(), net.heads.tolist()))
    if extra_hub is not None:
        for b in net.boundary:
            g.add_edge(extra_hub, net.vertex_index[b])
    return g


def edges_on_boundary_paths(net: Network) -> np.ndarray:
    """Boolean mask: does each edge lie on a simple path joining two boundary vertices?

    An edge lies on such a path exactly when it shares a biconnected block with
    a hub vertex joined to every boundary vertex (the path closes into a cycle
    through the hub).
    """
    hub = -1
    g = _simple_graph(net, extra_hub=hub)
    good_pairs = set()
    for block in nx.biconnected_component_edges(g):
        block = list(block)
        if any(hub in pair for pair in block):
            good_pairs.update(frozenset(p) for p in block)
    return np.array([frozenset((int(t), int(h))) in good_pairs
                     for t, h in zip(net.tails, net.heads)], dtype=bool)


def validate_network(net: Network) -> ValidationReport:
    violations, bad = [], []
    if len(set(net.vertices)) != len(net.vertices):
        violations.append("duplicate vertex ids")
    if len(set(e.id for e in net.edges)) != len(net.edges):
        violations.append("duplicate edge ids")
    known = set(net.vertices)
    dangling = [e.id for e in net.edges if e.tail not in known or e.head not in known]
    if dangling:
        violations.append(f"edges with unknown endpoints: {dangling}")
    loops = [e.id for e in net.edges if e.tail == e.head]
    if loops:
        violations.append(f"self-loops: {loops}")
        bad.extend(loops)
    if len(set(net.boundary)) != len(net.boundary):
        violations.append("duplicate boundary vertices")
    if not set(net.boundary) <= known:
        violations.append("boundary vertices not in vertex set")
    if len(set(net.boundary)) < 2:
        violations.append("boundary needs at least two vertices")
    if violations:
        return ValidationReport(False, violations, bad)

    if net.n_vertices and not nx.is_connected(_simple_graph(net)):
        violations.append("graph is not connected")
    mask = edges_on_boundary_paths(net)
    for k in np.flatnonzero(~mask):
        eid = net.edges[k].id
        bad.append(eid)
        violations.append(f"edge {eid!r} is not on a simple path between two boundary vertices")
    return ValidationReport(not violations, violations, bad)


def check_network(net: Network) -> None:
    report = validate_network(net)
    if not report.ok:
        raise InvalidNetwork("; ".join(report.violations))


def orientation_from_function(net: Network, h) -> Orientation:
    h = net.vertex_array(h)
    dh = h[net.tails] - h[net.heads]
    zero = np.flatnonzero(dh == 0)
    if zero.size:
        raise ZeroDifference(net.edges[zero[0]].id)
    return tuple(int(s) for s in np.sign(dh))


def _topological_order(n: int, pairs) -> list | None:
    succ = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in pairs:
        succ[a].append(b)
        indeg[b] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return order if len(order) == n else None


def is_compatible(net: Network, u: Mapping, sigma) -> bool:
    """Acyclic, no interior sinks or sources, and boundary paths only run downhill."""
    sigma = net.orientation(sigma)
    n = net.n_vertices
    pairs = list(net.directed_pairs(sigma))
    order = _topological_order(n, pairs)
    if order is None:
        return False
    outdeg = [0] * n
    indeg = [0] * n
    preds = [[] for _ in range(n)]
    for a, b in pairs:
        outdeg[a] += 1
        indeg[b] += 1
        preds[b].append(a)
    vi = net.vertex_index
    bval = {vi[b]: float(u[b]) for b in net.boundary}
    for i in range(n):
        if i not in bval and (outdeg[i] == 0 or indeg[i] == 0):
            return False
    # lowest boundary value from which each vertex can be reached
    lowest = [np.inf] * n
    for v in order:
        m = np.inf
        for p in preds[v]:
            m = min(m, lowest[p], bval.get(p, np.inf))
        lowest[v] = m
    return all(lowest[b] > val for b, val in bval.items())


def orientation_key(sigma: Orientation) -> tuple:
    """Sort key: lexicographic in the signs, with ``+1`` before ``-1``."""
    return tuple(0 if s > 0 else 1 for s in sigma)


def enumerate_compatible_orientations(net: Network, u: Mapping,
                                      cap: int = DEFAULT_ENUMERATION_CAP) -> list:
    """All orientations compatible with ``u``, in :func:`orientation_key` order.

    Depth-first over edge signs in stored edge order.  Branches are cut as soon
    as a directed cycle appears, a boundary vertex reaches another one that is
    not strictly lower, or a finished interior vertex is a sink or source.
    """
    m = net.n_edges
    if m > cap:
        raise TooLarge(f"{m} edges exceeds the enumeration cap of {cap}")
    n = net.n_vertices
    vi = net.vertex_index
    bval = {vi[b]: float(u[b]) for b in net.boundary}
    tails = net.tails.tolist()
    heads = net.heads.tolist()
    last_edge = [-1] * n
    for k in range(m):
        last_edge[tails[k]] = k
        last_edge[heads[k]] = k
    finishing = [[] for _ in range(m)]
    for v in range(n):
        if v not in bval and last_edge[v] >= 0:
            finishing[last_edge[v]].append(v)

    succ = [[] for _ in range(n)]
    pred = [[] for _ in range(n)]
    signs = [0] * m
    found = []

    def reach(start, adj):
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def admissible(a, b):
        down = reach(b, succ)
        if a in down:
            return False
        up = reach(a, pred)
        highs = [bval[x] for x in up if x in bval]
        lows = [bval[x] for x in down if x in bval]
        if highs and lows and min(highs) <= max(lows):
            return False
        return True

    def finished_ok(k):
        return all(succ[v] and pred[v] for v in finishing[k])

    def descend(k):
        if k == m:
            found.append(tuple(signs))
            return
        for s in (1, -1):
            a, b = (tails[k], heads[k]) if s > 0 else (heads[k], tails[k])
            if not admissible(a, b):
                continue
            succ[a].append(b)
            pred[b].append(a)
            signs[k] = s
            if finished_ok(k):
                descend(k + 1)
            succ[a].pop()
            pred[b].pop()
        signs[k] = 0

    descend(0)
    return found


@dataclass(frozen=True, eq=False)
class ChainSpaces:
    """Incidence operator on interior-vertex functions and orthonormal bases of
    the coboundary and cycle subspaces of edge space."""

    d: np.ndarray
    cob: np.ndarray
    cyc: np.ndarray
    interior: tuple

    @property
    def p_cob(self) -> np.ndarray:
        return self.cob @ self.cob.T

    @property
    def p_cyc(self) -> np.ndarray:
        return self.cyc @ self.cyc.T


def incidence_matrix(net: Network, columns=None) -> np.ndarray:
    """``d[e, v] = 1`` at the head of ``e`` and ``-1`` at its tail, so that
    ``(d f)(e) = f(head) - f(tail)``."""
    cols = net.interior if columns is None else tuple(columns)
    ci = {v: j for j, v in enumerate(cols)}
    d = np.zeros((net.n_edges, len(cols)))
    for k, e in enumerate(net.edges):
        if e.head in ci:
            d[k, ci[e.head]] += 1.0
        if e.tail in ci:
            d[k, ci[e.tail]] -= 1.0
    return d


def chain_spaces(net: Network) -> ChainSpaces:
    d = incidence_matrix(net)
    m = net.n_edges
    if d.shape[1]:
        cob = scipy.linalg.orth(d)
        cyc = scipy.linalg.null_space(d.T)
    else:
        cob = np.zeros((m, 0))
        cyc = np.eye(m)
    return ChainSpaces(d, cob, cyc, net.interior)
