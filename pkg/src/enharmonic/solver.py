"""Fixed-energy (enharmonic) Dirichlet problem.

For energies ``E`` and an orientation ``sigma`` the enharmonic function is the
maximizer of ``sum_e E_e log|dh_e|`` over functions with the prescribed fixed
values whose edge differences have the signs ``sigma``.  The objective is
strictly concave on that open polytope, so a damped Newton iteration that never
leaves the polytope converges to the unique critical point, where

    sum_{y ~ x} E_xy / (h(x) - h(y)) = 0      at every free vertex x.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .errors import Infeasible, NoConvergence, NonPositive, ZeroDifference
from .harmonic import solve_spd, weighted_laplacian
from .network import (DEFAULT_ENUMERATION_CAP, Network, Orientation,
                      enumerate_compatible_orientations, is_compatible,
                      orientation_key, _topological_order)

log = logging.getLogger(__name__)

MAX_NEWTON_STEPS = 200
BOUNDARY_FRACTION = 0.9
ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Vertices with prescribed values; every other vertex is free."""

    fixed: dict

    @classmethod
    def dirichlet(cls, net: Network, u: Mapping) -> "ConstraintSet":
        return cls({b: float(u[b]) for b in net.boundary})

    def arrays(self, net: Network):
        """``(fixed mask, values with NaN at free vertices, free indices)``."""
        vi = net.vertex_index
        mask = np.zeros(net.n_vertices, dtype=bool)
        vals = np.full(net.n_vertices, np.nan)
        for v, x in self.fixed.items():
            mask[vi[v]] = True
            vals[vi[v]] = float(x)
        return mask, vals, np.flatnonzero(~mask)

    @property
    def spread(self) -> float:
        vals = list(self.fixed.values())
        return float(max(vals) - min(vals))

    def is_full_dirichlet(self, net: Network) -> bool:
        return set(self.fixed) == net.boundary_set


def as_constraints(net: Network, constraints) -> ConstraintSet:
    if isinstance(constraints, ConstraintSet):
        return constraints
    return ConstraintSet.dirichlet(net, constraints)


def positive_energies(net: Network, E) -> np.ndarray:
    E = net.edge_array(E)
    bad = np.flatnonzero(~(E > 0))
    if bad.size:
        raise NonPositive(f"energy on edge {net.edges[bad[0]].id!r}", E[bad[0]])
    return E


def _differences(net: Network, h: np.ndarray) -> np.ndarray:
    dh = h[net.tails] - h[net.heads]
    zero = np.flatnonzero(dh == 0)
    if zero.size:
        raise ZeroDifference(net.edges[zero[0]].id)
    return dh


def _full_h(net: Network, cs: ConstraintSet, h) -> np.ndarray:
    h = net.vertex_array(h).copy()
    mask, vals, _ = cs.arrays(net)
    h[mask] = vals[mask]
    return h


def free_vertices(net: Network, constraints) -> tuple:
    cs = as_constraints(net, constraints)
    return tuple(v for v in net.vertices if v not in cs.fixed)


def log_objective(net: Network, constraints, E, h) -> float:
    """``sum_e E_e log|h(tail) - h(head)|``."""
    cs = as_constraints(net, constraints)
    E = net.edge_array(E)
    dh = _differences(net, _full_h(net, cs, h))
    return float(np.dot(E, np.log(np.abs(dh))))


def _vertex_residual(net: Network, E: np.ndarray, dh: np.ndarray) -> np.ndarray:
    w = E / dh
    n = net.n_vertices
    return (np.bincount(net.tails, weights=w, minlength=n)
            - np.bincount(net.heads, weights=w, minlength=n))


def residual(net: Network, constraints, E, h) -> np.ndarray:
    """Enharmonic Laplacian ``sum_y E_xy / (h(x) - h(y))`` at the free vertices.

    This is the gradient of :func:`log_objective` in the free coordinates.
    """
    cs = as_constraints(net, constraints)
    E = net.edge_array(E)
    dh = _differences(net, _full_h(net, cs, h))
    _, _, free = cs.arrays(net)
    return _vertex_residual(net, E, dh)[free]


def hessian(net: Network, constraints, E, h) -> sp.csr_matrix:
    """Hessian of :func:`log_objective` in the free coordinates.

    It is minus the Laplacian weighted by ``E_e / dh_e**2``, hence negative
    definite whenever every free vertex connects to a fixed one.
    """
    cs = as_constraints(net, constraints)
    E = net.edge_array(E)
    dh = _differences(net, _full_h(net, cs, h))
    _, _, free = cs.arrays(net)
    lap = weighted_laplacian(net, E / (dh * dh))
    return -lap[free][:, free]


def check_orientation(net: Network, cs: ConstraintSet, sigma: Orientation) -> None:
    """Raise :class:`Infeasible` unless ``sigma`` can carry a solution for ``cs``."""
    if cs.is_full_dirichlet(net):
        if not is_compatible(net, cs.fixed, sigma):
            raise Infeasible("orientation is not compatible with the boundary values")
        return
    n = net.n_vertices
    pairs = list(net.directed_pairs(sigma))
    if _topological_order(n, pairs) is None:
        raise Infeasible("orientation has a directed cycle")
    mask, _, _ = cs.arrays(net)
    succ = [[] for _ in range(n)]
    pred = [[] for _ in range(n)]
    for a, b in pairs:
        succ[a].append(b)
        pred[b].append(a)

    def sweep(adj):
        seen = set(np.flatnonzero(mask).tolist())
        stack = list(seen)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    below, above = sweep(succ), sweep(pred)
    for i in np.flatnonzero(~mask):
        if i not in below or i not in above:
            raise Infeasible(f"free vertex {net.vertices[i]!r} is not on a directed path "
                             "between fixed vertices")


def initial_point(net: Network, constraints, sigma) -> np.ndarray:
    """Max-margin point of the open polytope of functions inducing ``sigma``.

    Solves the linear program maximizing the smallest signed edge difference
    subject to the fixed values.
    """
    cs = as_constraints(net, constraints)
    sigma = net.orientation(sigma)
    mask, vals, free = cs.arrays(net)
    nf = free.size
    col = np.full(net.n_vertices, -1)
    col[free] = np.arange(nf)
    sig = np.asarray(sigma, dtype=float)
    t, hd = net.tails, net.heads
    m = net.n_edges

    rows, cols, data = [], [], []
    rhs = np.zeros(m)
    for k in range(m):
        if mask[t[k]]:
            rhs[k] += sig[k] * vals[t[k]]
        else:
            rows.append(k); cols.append(col[t[k]]); data.append(-sig[k])
        if mask[hd[k]]:
            rhs[k] -= sig[k] * vals[hd[k]]
        else:
            rows.append(k); cols.append(col[hd[k]]); data.append(sig[k])
        rows.append(k); cols.append(nf); data.append(1.0)
    a_ub = sp.csr_matrix((data, (rows, cols)), shape=(m, nf + 1))
    spread = cs.spread
    cost = np.zeros(nf + 1)
    cost[-1] = -1.0
    bounds = [(None, None)] * nf + [(None, spread)]
    res = scipy.optimize.linprog(cost, A_ub=a_ub, b_ub=rhs, bounds=bounds, method="highs")
    if res.status != 0:
        raise Infeasible(f"margin program failed: {res.message}")
    h = vals.copy()
    h[free] = res.x[:nf]
    slack = sig * (h[t] - h[hd])
    if not slack.min() > 0:
        raise Infeasible("orientation polytope is empty for these fixed values")
    return h


@dataclass(frozen=True, eq=False)
class EnharmonicSolution:
    net: Network
    constraints: ConstraintSet
    h: np.ndarray
    sigma: Orientation
    energies: np.ndarray
    conductances: np.ndarray
    log_objective: float
    residual_norm: float
    iterations: int

    def to_json(self) -> dict:
        return {
            "sigma": self.net.edge_dict(self.sigma),
            "h": self.net.vertex_dict(self.h),
            "c": self.net.edge_dict(self.conductances),
            "residual": float(self.residual_norm),
            "logM": float(self.log_objective),
        }


def default_tolerance(E: np.ndarray, cs: ConstraintSet) -> float:
    return 1e-10 * float(E.sum()) / cs.spread


def solve_enharmonic(net: Network, constraints, E, sigma, h0=None, tol=None,
                     max_iter: int = MAX_NEWTON_STEPS, check: bool = True) -> EnharmonicSolution:
    """Unique enharmonic function with energies ``E`` inducing orientation ``sigma``."""
    cs = as_constraints(net, constraints)
    E = positive_energies(net, E)
    sigma = net.orientation(sigma)
    if check:
        check_orientation(net, cs, sigma)
    if tol is None:
        tol = default_tolerance(E, cs)
    mask, vals, free = cs.arrays(net)
    t, hd = net.tails, net.heads
    sig = np.asarray(sigma, dtype=float)

    if h0 is None:
        h = initial_point(net, cs, sigma)
    else:
        h = _full_h(net, cs, h0)
        if not (sig * (h[t] - h[hd])).min() > 0:
            raise Infeasible("starting point does not induce the requested orientation")

    def objective(x):
        return float(np.dot(E, np.log(sig * (x[t] - x[hd]))))

    f = objective(h)
    it = 0
    while True:
        dh = h[t] - h[hd]
        g = _vertex_residual(net, E, dh)[free]
        gnorm = float(np.abs(g).max()) if g.size else 0.0
        if gnorm <= tol:
            break
        if it >= max_iter:
            raise NoConvergence(it, gnorm)
        it += 1
        lap = weighted_laplacian(net, E / (dh * dh))
        p_free = solve_spd(lap[free][:, free], g)
        p = np.zeros(net.n_vertices)
        p[free] = p_free
        slack = sig * dh
        rate = sig * (p[t] - p[hd])
        shrinking = rate < 0
        step = 1.0
        if shrinking.any():
            step = min(1.0, BOUNDARY_FRACTION * float((-slack[shrinking] / rate[shrinking]).min()))
        slope = float(np.dot(g, p_free))
        while True:
            trial = h + step * p
            f_trial = objective(trial)
            if f_trial >= f + ARMIJO * step * slope:
                break
            # objective flat to rounding: accept when the gradient still shrinks
            if abs(f_trial - f) <= 1e-13 * max(1.0, abs(f)):
                g_trial = _vertex_residual(net, E, trial[t] - trial[hd])[free]
                if np.abs(g_trial).max() < gnorm:
                    break
            step *= 0.5
            if step < 1e-14:
                raise NoConvergence(it, gnorm)
        h, f = trial, f_trial

    dh = h[t] - h[hd]
    c = E / (dh * dh)
    log.debug("enharmonic solve: %d Newton steps, residual %.3e", it, gnorm)
    return EnharmonicSolution(net, cs, h, sigma, E, c, f, gnorm, it)


def conductances_of(net: Network, E, h) -> np.ndarray:
    """Conductances ``E_e / dh_e**2`` that make ``h`` harmonic with energies ``E``."""
    E = net.edge_array(E)
    dh = _differences(net, net.vertex_array(h))
    return E / (dh * dh)


def solve_all(net: Network, u: Mapping, E, cap: int = DEFAULT_ENUMERATION_CAP,
              workers: int | None = None) -> list:
    """One enharmonic solution per compatible orientation, in orientation-key order."""
    E = positive_energies(net, E)
    cs = ConstraintSet.dirichlet(net, u)
    sigmas = sorted(enumerate_compatible_orientations(net, u, cap=cap), key=orientation_key)
    if workers is None:
        workers = int(os.environ.get("ENHARMONIC_THREADS", "1") or 1)
    if workers > 1 and len(sigmas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: solve_enharmonic(net, cs, E, s), sigmas))
    return [solve_enharmonic(net, cs, E, s) for s in sigmas]
