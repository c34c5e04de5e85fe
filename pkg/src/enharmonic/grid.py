"""Lattice discretizations, scaling experiments and the map to a rectangle.

Lattice vertices ``"i,j"`` sit at ``(i*eps, j*eps)``.  Horizontal edges
``"h{i},{j}"`` join ``(i,j)`` and ``(i+1,j)``; vertical edges ``"v{i},{j}"``
join ``(i,j)`` and ``(i,j+1)``.  Every edge is stored with its north or east
end as the tail, so the south-west orientation is all ``+1``.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import networkx as nx
import numpy as np
import shapely
from scipy.interpolate import RegularGridInterpolator
from shapely.geometry import LineString, Polygon

from .errors import DegenerateGradient, EmptyGrid, Infeasible, InfeasibleOrientation
from .network import Network, edges_on_boundary_paths
from .planar import PlanarEmbedding, build_dual, conjugate, embedding_from_positions
from .solver import ConstraintSet, EnharmonicSolution, solve_enharmonic

log = logging.getLogger(__name__)

EVAL_POINTS = 64
ARC_NAMES = ("ab", "bc", "cd", "da")
# allowed (sign dx, sign dy) along each arc, walking counterclockwise
_ARC_DIRECTIONS = {"ab": (1, 1), "bc": (-1, 1), "cd": (-1, -1), "da": (1, -1)}


@dataclass(frozen=True, eq=False)
class FourArcDomain:
    """Polygonal Jordan domain with marked points a, b, c, d counterclockwise.

    ``marks`` index the polygon vertices.  Walking counterclockwise the arcs
    run north-east (a to b), north-west (b to c), south-west (c to d) and
    south-east (d to a).
    """

    coords: tuple
    marks: tuple
    name: str = "polygon"

    def __post_init__(self):
        pts = np.asarray(self.coords, dtype=float)
        if len(set(self.marks)) != 4:
            raise InfeasibleOrientation("marked points must be distinct")
        area2 = np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
        if area2 <= 0:
            raise ValueError("polygon must be given counterclockwise")

    @cached_property
    def polygon(self) -> Polygon:
        return Polygon(self.coords)

    @property
    def area(self) -> float:
        return float(self.polygon.area)

    @property
    def bounds(self) -> tuple:
        return self.polygon.bounds

    def arc_points(self, name: str) -> np.ndarray:
        pts = np.asarray(self.coords, dtype=float)
        i = ARC_NAMES.index(name)
        start, stop = self.marks[i], self.marks[(i + 1) % 4]
        idx = [start]
        while idx[-1] != stop:
            idx.append((idx[-1] + 1) % len(pts))
        return pts[idx]

    @cached_property
    def arcs(self) -> dict:
        return {name: LineString(self.arc_points(name)) for name in ARC_NAMES}

    def is_monotone(self, tol: float = 1e-12) -> bool:
        for name in ARC_NAMES:
            steps = np.diff(self.arc_points(name), axis=0)
            sx, sy = _ARC_DIRECTIONS[name]
            if (sx * steps[:, 0] < -tol).any() or (sy * steps[:, 1] < -tol).any():
                return False
        return True

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return shapely.intersects_xy(self.polygon, x, y)

    def nearest_arc(self, x: float, y: float) -> str:
        p = shapely.Point(x, y)
        return min(ARC_NAMES, key=lambda n: self.arcs[n].distance(p))

    def to_json(self) -> dict:
        return {"polygon": [list(map(float, p)) for p in self.coords], "marks": list(self.marks)}


def square_domain(side: float = 1.0) -> FourArcDomain:
    s = float(side)
    return FourArcDomain(((0, 0), (s, 0), (s, s), (0, s)), (1, 2, 3, 0), "square")


def diamond_domain(center=(0.51, 0.53), radius: float = 0.5) -> FourArcDomain:
    """Square rotated by 45 degrees; the default centre is off the lattice of
    the usual mesh sizes so the boundary cuts cells generically."""
    cx, cy = center
    r = radius
    pts = ((cx, cy - r), (cx + r, cy), (cx, cy + r), (cx - r, cy))
    return FourArcDomain(pts, (0, 1, 2, 3), "diamond")


def disk_domain(radius: float = 1.0, center=(0.0, 0.0), segments: int = 256) -> FourArcDomain:
    cx, cy = center
    t = 2 * np.pi * np.arange(segments) / segments - np.pi / 2
    pts = tuple((cx + radius * np.cos(a), cy + radius * np.sin(a)) for a in t)
    q = segments // 4
    return FourArcDomain(pts, (0, q, 2 * q, 3 * q), "disk")


def domain_from_json(data: dict) -> FourArcDomain:
    return FourArcDomain(tuple(tuple(p) for p in data["polygon"]), tuple(data["marks"]),
                         data.get("name", "polygon"))


def load_domain(path: str) -> FourArcDomain:
    with open(path) as fh:
        return domain_from_json(json.load(fh))


def default_f0(x, y):
    return (x + y) / 2


@dataclass(frozen=True, eq=False)
class GridProblem:
    eps: float
    net: Network
    constraints: ConstraintSet
    energies: np.ndarray
    sigma: tuple
    cells: dict  # vertex id -> (i, j)
    boundary_mode: str
    labels: dict = field(default_factory=dict)  # vertex id -> arc name (four-arc mode)
    domain: FourArcDomain | None = None

    @cached_property
    def embedding(self) -> PlanarEmbedding:
        pos = {v: (i * self.eps, j * self.eps) for v, (i, j) in self.cells.items()}
        return embedding_from_positions(self.net, pos)

    @property
    def index_bounds(self) -> tuple:
        ij = np.array(list(self.cells.values()))
        return int(ij[:, 0].min()), int(ij[:, 1].min()), int(ij[:, 0].max()), int(ij[:, 1].max())

    def to_array(self, h) -> np.ndarray:
        """Vertex values as a 2-D array indexed ``[i - imin, j - jmin]``, NaN outside."""
        i0, j0, i1, j1 = self.index_bounds
        arr = np.full((i1 - i0 + 1, j1 - j0 + 1), np.nan)
        h = np.asarray(h, dtype=float)
        for k, v in enumerate(self.net.vertices):
            i, j = self.cells[v]
            arr[i - i0, j - j0] = h[k]
        return arr

    def axes(self) -> tuple:
        i0, j0, i1, j1 = self.index_bounds
        return np.arange(i0, i1 + 1) * self.eps, np.arange(j0, j1 + 1) * self.eps


def _lattice(domain: FourArcDomain, eps: float) -> set:
    x0, y0, x1, y1 = domain.bounds
    i = np.arange(int(np.floor(x0 / eps)) - 1, int(np.ceil(x1 / eps)) + 2)
    j = np.arange(int(np.floor(y0 / eps)) - 1, int(np.ceil(y1 / eps)) + 2)
    ii, jj = np.meshgrid(i, j, indexing="ij")
    inside = domain.contains(ii * eps, jj * eps)
    pts = set(zip(ii[inside].tolist(), jj[inside].tolist()))
    if not pts:
        raise EmptyGrid(f"no lattice points of spacing {eps} inside the domain")
    g = nx.Graph()
    g.add_nodes_from(pts)
    for (i, j) in pts:
        for q in ((i + 1, j), (i, j + 1)):
            if q in pts:
                g.add_edge((i, j), q)
    comp = max(nx.connected_components(g), key=len)
    if len(comp) < 2:
        raise EmptyGrid("lattice graph inside the domain has no edges")
    return comp


def build_grid(domain: FourArcDomain | None = None, eps: float | None = None, n: int | None = None,
               boundary: str = "corners", energy: str = "unit",
               f0: Callable | None = None) -> GridProblem:
    """Lattice network of spacing ``eps`` inside ``domain`` (unit square by default).

    ``boundary`` is ``"corners"`` (0 at the south-west-most vertex, 1 at the
    north-east-most), ``"full"`` (``f0`` on every vertex missing a neighbour) or
    ``"four-arc"`` (1 on arc bc, 0 on arc da, free elsewhere).
    """
    if domain is None:
        domain = square_domain()
    if eps is None:
        if n is None:
            raise ValueError("give eps or n")
        eps = 1.0 / n
    eps = float(eps)
    pts = _lattice(domain, eps)

    def has(i, j):
        return (i, j) in pts

    fixed = {}
    labels = {}
    if boundary == "corners":
        lo = min(pts, key=lambda p: (p[0] + p[1], p[1]))
        hi = max(pts, key=lambda p: (p[0] + p[1], p[1]))
        fixed = {lo: 0.0, hi: 1.0}
    elif boundary == "full":
        f0 = default_f0 if f0 is None else f0
        for (i, j) in pts:
            if not all(has(*q) for q in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1))):
                fixed[(i, j)] = float(f0(i * eps, j * eps))
    elif boundary == "four-arc":
        if not domain.is_monotone():
            raise InfeasibleOrientation("domain arcs are not monotone in the required directions")
        for (i, j) in pts:
            ne = has(i + 1, j) or has(i, j + 1)
            sw = has(i - 1, j) or has(i, j - 1)
            full = all(has(*q) for q in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)))
            if not ne:
                arc = "bc"
            elif not sw:
                arc = "da"
            elif full:
                continue
            else:
                arc = domain.nearest_arc(i * eps, j * eps)
            labels[f"{i},{j}"] = arc
            if arc == "bc":
                fixed[(i, j)] = 1.0
            elif arc == "da":
                fixed[(i, j)] = 0.0
        if not any(v == 1.0 for v in fixed.values()) or not any(v == 0.0 for v in fixed.values()):
            raise InfeasibleOrientation("arc bc or arc da contains no lattice vertex")
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")

    edges = []
    for (i, j) in sorted(pts):
        for q, name in (((i + 1, j), f"h{i},{j}"), ((i, j + 1), f"v{i},{j}")):
            if q not in pts:
                continue
            if (i, j) in fixed and q in fixed and fixed[(i, j)] == fixed[q]:
                continue
            edges.append((name, q, (i, j)))
    g = nx.Graph()
    g.add_edges_from((a, b) for _, a, b in edges)
    comp = max(nx.connected_components(g), key=len)
    edges = [e for e in edges if e[1] in comp]
    verts = sorted(comp)
    vid = {p: f"{p[0]},{p[1]}" for p in verts}
    bnd = [vid[p] for p in verts if p in fixed]
    net = Network.build([vid[p] for p in verts], [(name, vid[a], vid[b]) for name, a, b in edges], bnd)
    # dangling trees (lattice points hanging off a single edge) carry no current
    keep = edges_on_boundary_paths(net)
    if not keep.all():
        edges = [e for e, k in zip(edges, keep) if k]
        used = {p for _, a, b in edges for p in (a, b)}
        verts = [p for p in verts if p in used]
        bnd = [vid[p] for p in verts if p in fixed]
        net = Network.build([vid[p] for p in verts], [(name, vid[a], vid[b]) for name, a, b in edges], bnd)
    cs = ConstraintSet({vid[p]: fixed[p] for p in verts if p in fixed})
    if len(set(cs.fixed.values())) < 2:
        raise InfeasibleOrientation("fixed values are all equal")
    if energy == "unit":
        E = np.ones(net.n_edges)
    elif energy == "eps2":
        E = np.full(net.n_edges, eps * eps)
    else:
        raise ValueError(f"unknown energy mode {energy!r}")
    cells = {vid[p]: p for p in verts}
    labels = {v: a for v, a in labels.items() if v in cells}
    return GridProblem(eps, net, cs, E, (1,) * net.n_edges, cells, boundary, labels, domain)


def solve_grid(problem: GridProblem) -> EnharmonicSolution:
    return solve_enharmonic(problem.net, problem.constraints, problem.energies, problem.sigma)


def pde_residual(f: np.ndarray, eps: float, stride: int = 1, origin=(0, 0)) -> float:
    """RMS of ``f_xx / f_x**2 + f_yy / f_y**2`` by central differences.

    ``f`` is indexed ``[x, y]`` with ``f[0, 0]`` at lattice index ``origin``.
    Only points whose four neighbours are present are used, and of those only
    the ones whose lattice indices are multiples of ``stride``; with nested mesh
    sizes this pins the sample points to the same physical locations.
    """
    f = np.asarray(f, dtype=float)
    c = f[1:-1, 1:-1]
    e, w, n, s = f[2:, 1:-1], f[:-2, 1:-1], f[1:-1, 2:], f[1:-1, :-2]
    ok = ~(np.isnan(c) | np.isnan(e) | np.isnan(w) | np.isnan(n) | np.isnan(s))
    if stride > 1:
        ii = np.arange(1, f.shape[0] - 1) + origin[0]
        jj = np.arange(1, f.shape[1] - 1) + origin[1]
        ok &= (ii[:, None] % stride == 0) & (jj[None, :] % stride == 0)
    if not ok.any():
        raise EmptyGrid("no sample point has all four neighbours")
    fx = (e - w)[ok] / (2 * eps)
    fy = (n - s)[ok] / (2 * eps)
    small = (np.abs(fx) < 1e-12) | (np.abs(fy) < 1e-12)
    if small.any():
        k = np.flatnonzero(ok.ravel())[np.flatnonzero(small)[0]]
        i, j = np.unravel_index(k, ok.shape)
        raise DegenerateGradient(((int(i) + 1 + origin[0]) * eps, (int(j) + 1 + origin[1]) * eps))
    fxx = (e - 2 * c + w)[ok] / eps**2
    fyy = (n - 2 * c + s)[ok] / eps**2
    r = fxx / fx**2 + fyy / fy**2
    return float(np.sqrt(np.mean(r * r)))


def grid_pde_residual(problem: "GridProblem", h, sample_eps: float | None = None) -> float:
    """:func:`pde_residual` of a grid solution, sampled on the lattice of
    spacing ``sample_eps`` when it is a multiple of the mesh size."""
    i0, j0, _, _ = problem.index_bounds
    stride = 1
    if sample_eps is not None:
        ratio = sample_eps / problem.eps
        if abs(ratio - round(ratio)) < 1e-9 and round(ratio) >= 1:
            stride = int(round(ratio))
    return pde_residual(problem.to_array(h), problem.eps, stride, (i0, j0))


def cr_residual(f: np.ndarray, g: np.ndarray, eps: float, energy: float | None = None) -> tuple:
    """Staggered Cauchy-Riemann defects ``(rms(f_x g_y + 1), rms(f_y g_x - 1))``.

    ``f`` lives on lattice points ``[i, j]`` and ``g`` on cells ``[i, j]`` (the
    square with lower-left corner ``(i, j)``).  Differences are taken across
    each edge at its midpoint and scaled by ``eps**2 / energy``.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    energy = eps * eps if energy is None else energy
    scale = eps * eps / energy
    # horizontal edge (i,j)-(i+1,j): cells (i,j) above and (i,j-1) below
    fx = (f[1:, 1:-1] - f[:-1, 1:-1]) / eps
    gy = (g[:, 1:] - g[:, :-1]) / eps
    # vertical edge (i,j)-(i,j+1): cells (i,j) east and (i-1,j) west
    fy = (f[1:-1, 1:] - f[1:-1, :-1]) / eps
    gx = (g[1:, :] - g[:-1, :]) / eps
    r1 = fx * gy * scale + 1
    r2 = fy * gx * scale - 1
    r1, r2 = r1[~np.isnan(r1)], r2[~np.isnan(r2)]
    if r1.size == 0 or r2.size == 0:
        raise EmptyGrid("no edge has both adjacent cells")
    return float(np.sqrt(np.mean(r1 * r1))), float(np.sqrt(np.mean(r2 * r2)))


def conjugate_array(problem: GridProblem, conj) -> np.ndarray:
    """Conjugate values on unit cells as an array ``[i - imin, j - jmin]``, NaN elsewhere."""
    i0, j0, i1, j1 = problem.index_bounds
    arr = np.full((i1 - i0, j1 - j0), np.nan)
    emb = problem.embedding
    for face_idx, name in conj.dual.face_vertex.items():
        if not isinstance(face_idx, int) or len(emb.faces[face_idx]) != 4:
            continue
        ij = np.array([problem.cells[v] for v in emb.face_vertices(face_idx)])
        i, j = ij.min(axis=0)
        arr[i - i0, j - j0] = conj.g[name]
    return arr


def sample(problem: GridProblem, h, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of the vertex values onto ``xs x ys`` (NaN outside)."""
    ax, ay = problem.axes()
    interp = RegularGridInterpolator((ax, ay), problem.to_array(h), bounds_error=False, fill_value=np.nan)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return interp(np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)


@dataclass
class ScalingReport:
    eps: list
    n_vertices: list
    n_edges: list
    newton_residuals: list
    iterations: list
    sup_distances: list
    pde_residuals: list  # at the interior nodes of the coarsest lattice
    pde_residuals_all_nodes: list
    seconds: list
    samples: list = field(repr=False, default_factory=list)

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "newton_residual": self.newton_residuals,
            "iterations": self.iterations,
            "sup_distance": self.sup_distances,
            "pde_residual": self.pde_residuals,
            "pde_residual_all_nodes": self.pde_residuals_all_nodes,
            "seconds": self.seconds,
        }


def solve_grid_sequence(domain: FourArcDomain | None = None, boundary: str = "corners",
                        eps_list: Sequence = (0.1, 0.05, 0.025), energy: str = "unit",
                        f0: Callable | None = None, workers: int = 1,
                        eval_points: int = EVAL_POINTS) -> ScalingReport:
    """Solve at each mesh size and compare on a common evaluation lattice."""
    domain = square_domain() if domain is None else domain
    x0, y0, x1, y1 = domain.bounds
    xs = np.linspace(x0, x1, eval_points)
    ys = np.linspace(y0, y1, eval_points)

    eps_list = [float(e) for e in eps_list]
    coarse = max(eps_list)

    def residual_or_nan(prob, h, sample_eps):
        try:
            return grid_pde_residual(prob, h, sample_eps)
        except (EmptyGrid, DegenerateGradient):
            return float("nan")

    def run(eps):
        t = time.perf_counter()
        prob = build_grid(domain, eps=eps, boundary=boundary, energy=energy, f0=f0)
        sol = solve_grid(prob)
        dt = time.perf_counter() - t
        pde = (residual_or_nan(prob, sol.h, coarse), residual_or_nan(prob, sol.h, None))
        return prob, sol, sample(prob, sol.h, xs, ys), pde, dt

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, eps_list))
    else:
        runs = [run(e) for e in eps_list]
    dists = []
    for (_, _, a, _, _), (_, _, b, _, _) in zip(runs, runs[1:]):
        diff = np.abs(a - b)
        dists.append(float(np.nanmax(diff)) if np.isfinite(diff).any() else float("nan"))
    return ScalingReport(
        eps=eps_list,
        n_vertices=[r[0].net.n_vertices for r in runs],
        n_edges=[r[0].net.n_edges for r in runs],
        newton_residuals=[r[1].residual_norm for r in runs],
        iterations=[r[1].iterations for r in runs],
        sup_distances=dists,
        pde_residuals=[r[3][0] for r in runs],
        pde_residuals_all_nodes=[r[3][1] for r in runs],
        seconds=[r[4] for r in runs],
        samples=[r[2] for r in runs],
    )


@dataclass(frozen=True, eq=False)
class RiemannMap:
    problem: GridProblem
    solution: EnharmonicSolution
    conjugate: object
    R: float
    points: np.ndarray  # (g minus its value on the left free arc, mean f) per bounded face
    diagnostics: dict


def _gap_arcs(problem: GridProblem, dual) -> tuple:
    """Outer arcs spanning the free arcs: ab runs from a 1-vertex to a 0-vertex
    along the clockwise outer walk, cd from a 0-vertex to a 1-vertex."""
    val = problem.constraints.fixed
    rays = dual.rays
    v_ab = v_cd = None
    for j in range(len(rays)):
        _, arc, start = rays[j]
        _, _, end = rays[(j + 1) % len(rays)]
        if val[start] == 1.0 and val[end] == 0.0:
            v_ab = arc
        elif val[start] == 0.0 and val[end] == 1.0:
            v_cd = arc
    if v_ab is None or v_cd is None:
        raise InfeasibleOrientation("could not locate the free arcs on the outer face")
    return v_ab, v_cd


def riemann_map(domain: FourArcDomain, eps: float) -> RiemannMap:
    """Discrete conformal-type map ``(g, f)`` of a four-arc domain onto a rectangle.

    ``f`` is enharmonic with energies ``eps**2``, 1 on arc bc, 0 on arc da and
    free on the other two arcs; ``g`` is its conjugate.  The width ``R`` of the
    image is the conjugate gap between the two free arcs.
    """
    prob = build_grid(domain, eps=eps, boundary="four-arc", energy="eps2")
    try:
        sol = solve_grid(prob)
    except Infeasible as exc:
        raise InfeasibleOrientation(str(exc)) from exc
    emb = prob.embedding
    dual = build_dual(emb)
    v_ab, v_cd = _gap_arcs(prob, dual)
    conj = conjugate(emb, sol, base=v_ab, dual=dual)
    gap = conj.g[v_cd] - conj.g[v_ab]
    R = abs(gap)
    f = sol.h
    vi = prob.net.vertex_index
    # the left edge of the image is whichever free arc has the smaller conjugate
    g_left = min(conj.g[v_ab], conj.g[v_cd])
    pts = []
    for face_idx, name in dual.face_vertex.items():
        if isinstance(face_idx, int):
            fv = np.mean([f[vi[v]] for v in emb.face_vertices(face_idx)])
            pts.append((conj.g[name] - g_left, fv))
    pts = np.array(pts).reshape(-1, 2)
    target = 2 * domain.area
    diag = {
        "eps": eps,
        "area": domain.area,
        "R": R,
        "target": target,
        "relative_error": abs(R - target) / target,
        "total_energy": float(sol.energies.sum()),
        "n_edges": prob.net.n_edges,
        "newton_residual": sol.residual_norm,
        "x_range": [float(pts[:, 0].min()), float(pts[:, 0].max())] if len(pts) else [],
        "y_range": [float(pts[:, 1].min()), float(pts[:, 1].max())] if len(pts) else [],
    }
    return RiemannMap(prob, sol, conj, R, pts, diag)
