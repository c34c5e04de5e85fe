"""Deterministic example networks with known answers.

Known answers carry a ``source`` tag: ``"closed-form"`` for values given by
an explicit formula or polynomial, ``"derived"`` for values worked out by
hand or by an independent computation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .grid import build_grid
from .network import Network
from .numtheory import RationalPolynomial, star_energies
from .planar import PlanarEmbedding, embedding_from_positions
from .tiling import RectTiling


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    net: Network
    u: dict
    energies: np.ndarray
    embedding: PlanarEmbedding | None = None
    known: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "vertices": list(self.net.vertices),
            "edges": [{"id": e.id, "tail": e.tail, "head": e.head} for e in self.net.edges],
            "boundary": list(self.net.boundary),
            "u": {b: float(self.u[b]) for b in self.net.boundary},
            "energies": self.net.edge_dict(self.energies),
        }
        if self.embedding is not None:
            out["embedding"] = {v: list(self.embedding.rotation[v]) for v in self.net.vertices}
            if self.embedding.outer is not None:
                out["outer"] = list(self.embedding.outer)
        return out


def known(value, source: str, note: str = "") -> dict:
    return {"value": value, "source": source, "note": note}


def make_path(k: int = 2, energies: Sequence | None = None) -> Fixture:
    """Path ``v0 - m1 - ... - v1`` with ``k`` edges, boundary values 0 and 1."""
    if k < 1:
        raise ValueError("a path needs at least one edge")
    names = ["v0"] + [f"m{i}" for i in range(1, k)] + ["v1"]
    edges = [(f"e{i + 1}", names[i + 1], names[i]) for i in range(k)]
    net = Network.build(names, edges, ("v0", "v1"))
    E = np.ones(k) if energies is None else np.asarray(energies, dtype=float)
    pos = {v: (float(i), 0.0) for i, v in enumerate(names)}
    info = {"n_orientations": known(1, "closed-form")}
    if k == 2:
        info["h_m"] = known(float(E[0] / (E[0] + E[1])), "closed-form", "h(m1) = E1 / (E1 + E2)")
    return Fixture(f"path{k}", net, {"v0": 0.0, "v1": 1.0}, E, embedding_from_positions(net, pos), info)


SMALL_GRAPH_POSITIONS = {"v0": (0.0, 0.0), "x": (-2.0, 3.0), "y": (2.0, 3.0), "v1": (0.0, 6.0)}


def small_graph_network() -> Network:
    return Network.build(
        ["v0", "x", "y", "v1"],
        [("a", "v1", "x"), ("b", "v1", "y"), ("c", "x", "y"), ("d", "x", "v0"), ("e", "y", "v0")],
        ("v0", "v1"))


def make_small_graph(energies: Sequence | None = None, u=(0.0, 1.0)) -> Fixture:
    """Bridge network: top vertex v1 joined to x and y, x joined to y, both to v0."""
    net = small_graph_network()
    E = np.ones(5) if energies is None else np.asarray(energies, dtype=float)
    emb = embedding_from_positions(net, SMALL_GRAPH_POSITIONS)
    r5 = np.sqrt(5.0)
    info = {}
    if energies is None and tuple(u) == (0.0, 1.0):
        info = {
            "n_orientations": known(2, "closed-form"),
            "h_interior": known(sorted([0.5 - r5 / 10, 0.5 + r5 / 10]), "closed-form",
                                "h(x) and h(y) are 1/2 +- sqrt(5)/10"),
            "conductance_a": known(sorted([(15 - 5 * r5) / 2, (15 + 5 * r5) / 2]), "closed-form",
                                   "edges a and e share this conductance"),
            "min_poly": known(RationalPolynomial((1, -5, 5)), "closed-form", "5z^2 - 5z + 1"),
            "discriminant": known(Fraction(45), "derived"),
        }
    return Fixture("small-graph", net, {"v0": float(u[0]), "v1": float(u[1])}, E, emb, info)


def make_four_cycle(energies: Sequence | None = None) -> Fixture:
    """Four-cycle with boundary at two opposite corners."""
    net = Network.build(["v0", "p", "v1", "q"],
                        [("e1", "p", "v0"), ("e2", "v1", "p"), ("e3", "v1", "q"), ("e4", "q", "v0")],
                        ("v0", "v1"))
    E = np.ones(4) if energies is None else np.asarray(energies, dtype=float)
    pos = {"v0": (0.0, 0.0), "p": (1.0, 1.0), "v1": (0.0, 2.0), "q": (-1.0, 1.0)}
    return Fixture("four-cycle", net, {"v0": 0.0, "v1": 1.0}, E, embedding_from_positions(net, pos),
                   {"n_orientations": known(1, "closed-form")})


def jacobi_polynomial(n: int, alpha: float, beta: float) -> Polynomial:
    """``P_n^(alpha, beta)`` from the three-term recurrence."""
    x = Polynomial([0.0, 1.0])
    p_prev = Polynomial([1.0])
    if n == 0:
        return p_prev
    p = (alpha + 1) + (alpha + beta + 2) * (x - 1) / 2
    for k in range(2, n + 1):
        s = 2 * k + alpha + beta
        a1 = 2 * k * (k + alpha + beta) * (s - 2)
        a2 = (s - 1) * (alpha**2 - beta**2)
        a3 = (s - 1) * s * (s - 2)
        a4 = 2 * (k + alpha - 1) * (k + beta - 1) * s
        p_prev, p = p, ((a2 + a3 * x) * p - a4 * p_prev) / a1
    return p


def jacobi_interior_values(n: int, a: float, b: float) -> list:
    """Sorted interior values of the Jacobi fixture: roots ``z`` of
    ``P_n^(a-1, b-1)`` sent to ``(1 - z) / 2``."""
    z = jacobi_polynomial(n, a - 1, b - 1).roots()
    return sorted(float(v) for v in (1 - np.real(z)) / 2)


def make_jacobi(n: int, a: float = 1.0, b: float = 1.0) -> Fixture:
    """Complete graph on ``v0, v1, w1..wn`` minus the edge ``v0 v1``.

    Energies are ``a`` on edges to v0, ``b`` on edges to v1 and 2 among the
    ``w`` vertices.
    """
    if n < 1 or a <= 0 or b <= 0:
        raise ValueError("need n >= 1 and positive a, b")
    ws = [f"w{i}" for i in range(1, n + 1)]
    edges, E = [], []
    for w in ws:
        edges.append((f"a_{w}", w, "v0"))
        E.append(a)
    for w in ws:
        edges.append((f"b_{w}", "v1", w))
        E.append(b)
    for i in range(n):
        for j in range(i + 1, n):
            edges.append((f"c_{ws[i]}_{ws[j]}", ws[j], ws[i]))
            E.append(2.0)
    net = Network.build(["v0", "v1"] + ws, edges, ("v0", "v1"))
    emb = None
    if n <= 2:
        pos = {"v0": (0.0, 0.0), "v1": (0.0, 6.0), "w1": (-2.0, 3.0), "w2": (2.0, 3.0)}
        emb = embedding_from_positions(net, {v: pos[v] for v in net.vertices})
    info = {
        "n_orientations": known(int(np.prod(np.arange(1, n + 1))), "derived",
                                "the interior vertices are totally ordered"),
        "h_sorted": known(jacobi_interior_values(n, a, b), "closed-form",
                          f"roots of P_{n}^({a - 1:g},{b - 1:g}) mapped by z -> (1 - z)/2"),
    }
    return Fixture(f"jacobi-{n}-{a:g}-{b:g}", net, {"v0": 0.0, "v1": 1.0}, np.asarray(E, float), emb, info)


def make_star(d: int, anchors: Sequence, energies: Sequence | None = None) -> Fixture:
    """Star with centre ``z`` and leaves ``l0..ld`` carrying the anchors."""
    if len(anchors) != d + 1:
        raise ValueError(f"need {d + 1} anchors")
    if any(x >= y for x, y in zip(anchors, anchors[1:])):
        raise ValueError("anchors must be strictly increasing")
    leaves = [f"l{i}" for i in range(d + 1)]
    net = Network.build(["z"] + leaves, [(f"e{i}", "z", leaves[i]) for i in range(d + 1)], tuple(leaves))
    E = np.ones(d + 1) if energies is None else np.array([float(x) for x in energies])
    u = {leaf: float(Fraction(a)) if isinstance(a, (str, Fraction)) else float(a)
         for leaf, a in zip(leaves, anchors)}
    pos = {"z": (0.0, 0.0)}
    for i, leaf in enumerate(leaves):
        t = 2 * np.pi * i / (d + 1)
        pos[leaf] = (np.cos(t), np.sin(t))
    return Fixture(f"star{d}", net, u, E, embedding_from_positions(net, pos),
                   {"n_orientations": known(d, "derived", "one per gap between anchors")})


def make_star_quadratic() -> Fixture:
    """Star whose centre values are the roots ``3 +- sqrt 5`` of ``x^2 - 6x + 4``."""
    p = RationalPolynomial((4, -6, 1))
    anchors = (0, 1, 6)
    e = star_energies(p, anchors)
    fx = make_star(2, anchors, [float(x) for x in e])
    info = dict(fx.known)
    info["energies"] = known(e, "derived", "exact rational energies")
    info["h_centre"] = known([3 - np.sqrt(5.0), 3 + np.sqrt(5.0)], "derived", "roots of x^2 - 6x + 4")
    return Fixture("star-quadratic", fx.net, fx.u, fx.energies, fx.embedding, info)


def make_grid(n: int) -> Fixture:
    """Square lattice ``[0, n]^2`` with unit energies and corner values 0 and 1."""
    prob = build_grid(n=n, boundary="corners", energy="unit")
    net = prob.net
    u = dict(prob.constraints.fixed)
    return Fixture(f"grid{n}", net, u, prob.energies, prob.embedding,
                   {"n_edges": known(2 * n * (n + 1), "closed-form")})


def five_tiles_tiling() -> RectTiling:
    """Left tiling of the bridge network drawn in a unit square (coordinates
    as read to two decimals on a 6 x 6 drawing)."""
    s = 1 / 6
    rects = [
        ("a", 0.0, 4.34 * s, 4.34 * s, 1.0),
        ("b", 4.34 * s, 1.66 * s, 1.0, 1.0),
        ("c", 1.66 * s, 1.66 * s, 4.34 * s, 4.34 * s),
        ("d", 0.0, 0.0, 1.66 * s, 4.34 * s),
        ("e", 1.66 * s, 0.0, 1.0, 1.66 * s),
    ]
    return RectTiling.from_rects(rects, (0.0, 0.0, 1.0, 1.0))


GALLERY: dict[str, Callable[[], Fixture]] = {
    "path1": lambda: make_path(1),
    "path2": lambda: make_path(2),
    "path5": lambda: make_path(5),
    "small-graph": make_small_graph,
    "four-cycle": make_four_cycle,
    "jacobi-1-1-1": lambda: make_jacobi(1, 1, 1),
    "jacobi-2-1-1": lambda: make_jacobi(2, 1, 1),
    "jacobi-3-1-1": lambda: make_jacobi(3, 1, 1),
    "jacobi-2-2-1": lambda: make_jacobi(2, 2, 1),
    "star-quadratic": make_star_quadratic,
    "star-equal": lambda: make_star(2, (0, 1, 2)),
    "grid4": lambda: make_grid(4),
}


def fixture(name: str) -> Fixture:
    try:
        return GALLERY[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(GALLERY)}") from None
