"""Rectangle tilings: reading a network off a tiling, retiling to prescribed
areas (rectangular cartograms) and SVG output."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import CrossPoint, NotATiling
from .network import Network
from .planar import PlanarEmbedding, SmithDiagram, smith_diagram
from .solver import ConstraintSet, solve_enharmonic

SNAP = 1e-9
CROSS_MODES = (None, "horizontal", "vertical")


@dataclass(frozen=True)
class RectTiling:
    bounds: tuple  # (x0, y0, x1, y1)
    tiles: tuple  # (id, x0, y0, x1, y1)

    @classmethod
    def from_rects(cls, rects: Sequence, bounds=None) -> "RectTiling":
        tiles = tuple((t[0], *(float(x) for x in t[1:5])) for t in rects)
        if bounds is None:
            arr = np.array([t[1:] for t in tiles])
            bounds = (arr[:, 0].min(), arr[:, 1].min(), arr[:, 2].max(), arr[:, 3].max())
        return cls(tuple(float(b) for b in bounds), tiles)

    @classmethod
    def from_diagram(cls, diagram: SmithDiagram) -> "RectTiling":
        return cls.from_rects([(eid, *r) for eid, r in zip(diagram.edge_ids, diagram.rects)],
                              diagram.bounds)

    @classmethod
    def from_json(cls, data: Mapping) -> "RectTiling":
        return cls.from_rects([(t["id"], t["x0"], t["y0"], t["x1"], t["y1"]) for t in data["tiles"]],
                              data.get("bounds"))

    def to_json(self) -> dict:
        return {"bounds": list(self.bounds),
                "tiles": [dict(zip(("id", "x0", "y0", "x1", "y1"), t)) for t in self.tiles]}

    @property
    def ids(self) -> tuple:
        return tuple(t[0] for t in self.tiles)

    @property
    def rects(self) -> np.ndarray:
        return np.array([t[1:] for t in self.tiles], dtype=float).reshape(-1, 4)

    @property
    def areas(self) -> np.ndarray:
        r = self.rects
        return (r[:, 2] - r[:, 0]) * (r[:, 3] - r[:, 1])


@dataclass(frozen=True)
class Segment:
    y: float
    x0: float
    x1: float
    below: tuple  # tile indices whose top lies on the segment, by x
    above: tuple  # tile indices whose bottom lies on the segment, by x


@dataclass(frozen=True, eq=False)
class TilingNetwork:
    net: Network
    embedding: PlanarEmbedding
    u: dict
    sigma: tuple
    energies: np.ndarray
    segments: tuple


def _cluster(values: np.ndarray, tol: float) -> np.ndarray:
    """Snap values closer than ``tol`` to a common representative."""
    order = np.argsort(values)
    out = values.copy()
    rep = None
    for i in order:
        if rep is None or values[i] - rep > tol:
            rep = values[i]
        out[i] = rep
    return out


def validate_tiling(tiling: RectTiling, tol: float | None = None) -> None:
    r = tiling.rects
    bx0, by0, bx1, by1 = tiling.bounds
    size = max(bx1 - bx0, by1 - by0)
    if not size > 0 or r.shape[0] == 0:
        raise NotATiling("empty tiling")
    tol = SNAP * size if tol is None else tol
    if not ((r[:, 2] - r[:, 0] > tol) & (r[:, 3] - r[:, 1] > tol)).all():
        raise NotATiling("degenerate tile")
    if (r[:, 0] < bx0 - tol).any() or (r[:, 1] < by0 - tol).any() \
            or (r[:, 2] > bx1 + tol).any() or (r[:, 3] > by1 + tol).any():
        raise NotATiling("tile outside the bounding rectangle")
    for i in range(len(r) - 1):
        w = np.minimum(r[i, 2], r[i + 1:, 2]) - np.maximum(r[i, 0], r[i + 1:, 0])
        h = np.minimum(r[i, 3], r[i + 1:, 3]) - np.maximum(r[i, 1], r[i + 1:, 1])
        hit = np.flatnonzero((w > tol) & (h > tol))
        if hit.size:
            raise NotATiling(f"tiles {tiling.tiles[i][0]!r} and {tiling.tiles[i + 1 + hit[0]][0]!r} overlap")
    total = (bx1 - bx0) * (by1 - by0)
    if abs(tiling.areas.sum() - total) > 1e-9 * total:
        raise NotATiling("tiles do not cover the bounding rectangle")


def horizontal_segments(tiling: RectTiling, cross: str | None = None) -> list:
    """Maximal horizontal segments, bottom to top and left to right."""
    if cross not in CROSS_MODES:
        raise ValueError(f"cross must be one of {CROSS_MODES}")
    r = tiling.rects
    bx0, by0, bx1, by1 = tiling.bounds
    tol = SNAP * max(bx1 - bx0, by1 - by0)
    ys = _cluster(np.concatenate([r[:, 1], r[:, 3]]), tol)
    n = len(r)
    bottom, top = ys[:n], ys[n:]
    xs = _cluster(np.concatenate([r[:, 0], r[:, 2]]), tol)
    left, right = xs[:n], xs[n:]

    segments = []
    for y in np.unique(ys):
        below = np.flatnonzero(top == y)
        above = np.flatnonzero(bottom == y)
        items = sorted([(left[i], right[i], i, 0) for i in below] + [(left[i], right[i], i, 1) for i in above])
        groups, cur, end = [], [], None
        for item in items:
            if cur and item[0] > end + tol:
                groups.append(cur)
                cur = []
            if not cur:
                end = item[1]
            cur.append(item)
            end = max(end, item[1])
        if cur:
            groups.append(cur)
        for group in groups:
            for part in _split_at_crosses(group, float(y), cross):
                lo = min(it[0] for it in part)
                hi = max(it[1] for it in part)
                segments.append(Segment(
                    float(y), float(lo), float(hi),
                    tuple(it[2] for it in part if it[3] == 0),
                    tuple(it[2] for it in part if it[3] == 1)))
    segments.sort(key=lambda s: (s.y, s.x0))
    return segments


def _split_at_crosses(group, y: float, cross: str | None) -> list:
    ends = {0: set(), 1: set()}
    starts = {0: set(), 1: set()}
    for x0, x1, _, side in group:
        starts[side].add(x0)
        ends[side].add(x1)
    points = sorted(ends[0] & starts[0] & ends[1] & starts[1])
    if not points:
        return [group]
    if cross is None:
        raise CrossPoint((float(points[0]), y))
    if cross == "vertical":
        return [group]
    parts, lo = [], -np.inf
    for x in points + [np.inf]:
        part = [it for it in group if it[0] >= lo and it[1] <= x]
        if part:
            parts.append(part)
        lo = x
    return parts


def tiling_to_network(tiling: RectTiling, cross: str | None = None) -> TilingNetwork:
    """Network with a vertex per maximal horizontal segment and an edge per tile.

    Each edge runs from the segment on top of its tile to the one below, so the
    downhill orientation is all ``+1``.  The boundary vertices are the bottom
    and top sides of the bounding rectangle.
    """
    validate_tiling(tiling)
    segs = horizontal_segments(tiling, cross)
    names = [f"s{k}" for k in range(len(segs))]
    top_of, bottom_of = {}, {}
    for k, s in enumerate(segs):
        for i in s.below:
            top_of[i] = names[k]
        for i in s.above:
            bottom_of[i] = names[k]
    n = len(tiling.tiles)
    if len(top_of) != n or len(bottom_of) != n:
        raise NotATiling("a tile side does not lie on a horizontal segment")
    edges = [(tiling.tiles[i][0], top_of[i], bottom_of[i]) for i in range(n)]
    low, high = names[0], names[-1]
    if segs[0].above == () or segs[-1].below == ():
        raise NotATiling("bounding rectangle sides are not segments")
    net = Network.build(names, edges, (low, high))

    r = tiling.rects
    rotation = {}
    for k, s in enumerate(segs):
        up = sorted(s.above, key=lambda i: -r[i, 0])
        down = sorted(s.below, key=lambda i: r[i, 0])
        rotation[names[k]] = [tiling.tiles[i][0] for i in up + down]
    # the edge of a tile on the left side has the outer face to its west
    first = min(range(n), key=lambda i: (r[i, 0], r[i, 1]))
    embedding = PlanarEmbedding(net, rotation, (tiling.tiles[first][0], -1))
    u = {low: segs[0].y, high: segs[-1].y}
    return TilingNetwork(net, embedding, u, (1,) * n, tiling.areas, tuple(segs))


def retile_with_areas(tiling: RectTiling, areas, cross: str | None = None) -> SmithDiagram:
    """Isotopic tiling of the same height whose tile areas are ``areas``."""
    tn = tiling_to_network(tiling, cross)
    net = tn.net
    if isinstance(areas, Mapping):
        areas = net.edge_array(areas)
    sol = solve_enharmonic(net, ConstraintSet.dirichlet(net, tn.u), areas, tn.sigma)
    diagram = smith_diagram(tn.embedding, sol)
    shift = tiling.bounds[0] - diagram.bounds[0]
    rects = diagram.rects + np.array([shift, 0.0, shift, 0.0])
    return SmithDiagram(diagram.edge_ids, rects, diagram.energies)


def isotopy_signature(tiling: RectTiling, cross: str | None = None) -> frozenset:
    """Combinatorial type: for each maximal horizontal segment, the tile ids
    below it and above it in left-to-right order."""
    ids = tiling.ids
    return frozenset((tuple(ids[i] for i in s.below), tuple(ids[i] for i in s.above))
                     for s in horizontal_segments(tiling, cross))


def same_adjacency(net_a: Network, sigma_a, net_b: Network, sigma_b) -> bool:
    """True when a vertex bijection carries every directed edge of one network
    to the equally named directed edge of the other."""
    if net_a.n_edges != net_b.n_edges or net_a.n_vertices != net_b.n_vertices:
        return False
    ends_b = {}
    for e, s in zip(net_b.edges, sigma_b):
        ends_b[e.id] = (e.tail, e.head) if s > 0 else (e.head, e.tail)
    fwd, back = {}, {}
    for e, s in zip(net_a.edges, sigma_a):
        if e.id not in ends_b:
            return False
        pa = (e.tail, e.head) if s > 0 else (e.head, e.tail)
        for x, y in zip(pa, ends_b[e.id]):
            if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
                return False
    return True


def _fmt(x: float) -> str:
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def render_svg(diagram: SmithDiagram, scale_to_unit: bool = False, labels: bool = False,
               stroke: float | None = None) -> str:
    """Deterministic SVG 1.1 document, one ``rect`` per tile, larger y drawn higher."""
    x0, y0, x1, y1 = diagram.bounds
    sx = 1.0 / (x1 - x0) if scale_to_unit else 1.0
    sy = 1.0 / (y1 - y0) if scale_to_unit else 1.0
    w, h = (x1 - x0) * sx, (y1 - y0) * sy
    if stroke is None:
        stroke = 0.002 * max(w, h)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<g fill="none" stroke="black" stroke-width="{_fmt(stroke)}">',
    ]
    for eid, r in zip(diagram.edge_ids, diagram.rects):
        rx, ry = (r[0] - x0) * sx, (y1 - r[3]) * sy
        rw, rh = (r[2] - r[0]) * sx, (r[3] - r[1]) * sy
        lines.append(f'<rect id="{eid}" x="{_fmt(rx)}" y="{_fmt(ry)}" width="{_fmt(rw)}" height="{_fmt(rh)}"/>')
    lines.append("</g>")
    if labels:
        size = 0.04 * min(w, h) if min(w, h) > 0 else 1
        lines.append(f'<g font-family="sans-serif" font-size="{_fmt(size)}" text-anchor="middle">')
        for eid, r in zip(diagram.edge_ids, diagram.rects):
            cx, cy = ((r[0] + r[2]) / 2 - x0) * sx, (y1 - (r[1] + r[3]) / 2) * sy
            lines.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}">{eid}</text>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
