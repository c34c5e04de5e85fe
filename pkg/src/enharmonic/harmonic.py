"""Linear Dirichlet problem and the conductance-to-energy map."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonPositive, SingularSystem
from .network import Network

DENSE_LIMIT = 500


@dataclass(frozen=True, eq=False)
class HarmonicSolution:
    net: Network
    h: np.ndarray
    omega: np.ndarray
    conductances: np.ndarray

    @property
    def energies(self) -> np.ndarray:
        dh = self.h[self.net.tails] - self.h[self.net.heads]
        return self.conductances * dh * dh

    def to_json(self) -> dict:
        return {"h": self.net.vertex_dict(self.h), "omega": self.net.edge_dict(self.omega)}


def weighted_laplacian(net: Network, weights: np.ndarray, n_vertices=None) -> sp.csr_matrix:
    """Sparse ``L`` with ``(L f)(x) = sum_e w_e (f(x) - f(y))`` over edges at ``x``."""
    n = net.n_vertices if n_vertices is None else n_vertices
    t, h = net.tails, net.heads
    rows = np.concatenate([t, h, t, h])
    cols = np.concatenate([t, h, h, t])
    vals = np.concatenate([weights, weights, -weights, -weights])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def solve_spd(a, b) -> np.ndarray:
    """Solve a symmetric positive definite system, dense below ``DENSE_LIMIT``."""
    if a.shape[0] == 0:
        return np.zeros(0)
    try:
        if a.shape[0] <= DENSE_LIMIT:
            dense = a.toarray() if sp.issparse(a) else np.asarray(a)
            return scipy.linalg.solve(dense, b, assume_a="pos")
        return spla.splu(sp.csc_matrix(a)).solve(np.asarray(b, dtype=float))
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise SingularSystem(str(exc)) from exc


def _positive(net: Network, c, what: str) -> np.ndarray:
    arr = net.edge_array(c)
    bad = np.flatnonzero(~(arr > 0))
    if bad.size:
        raise NonPositive(f"{what} on edge {net.edges[bad[0]].id!r}", arr[bad[0]])
    return arr


def solve_dirichlet(net: Network, u: Mapping, c) -> HarmonicSolution:
    """Harmonic extension of the boundary values ``u`` for conductances ``c``."""
    c = _positive(net, c, "conductance")
    vi = net.vertex_index
    h = np.zeros(net.n_vertices)
    is_b = np.zeros(net.n_vertices, dtype=bool)
    for b in net.boundary:
        h[vi[b]] = float(u[b])
        is_b[vi[b]] = True
    free = np.flatnonzero(~is_b)
    lap = weighted_laplacian(net, c)
    if free.size:
        l_ff = lap[free][:, free]
        rhs = -(lap[free][:, is_b] @ h[is_b])
        h[free] = solve_spd(l_ff, rhs)
        resid = np.abs(lap[free] @ h).max()
        scale = np.abs(h[is_b]).max() + 1.0
        if not resid <= 1e-10 * scale:
            raise SingularSystem(f"interior residual {resid:.3e} exceeds tolerance")
    omega = c * (h[net.tails] - h[net.heads])
    return HarmonicSolution(net, h, omega, c)


def current_flow(net: Network, solution: HarmonicSolution) -> np.ndarray:
    """Current along each stored edge direction, ``c * (h(tail) - h(head))``."""
    return solution.conductances * (solution.h[net.tails] - solution.h[net.heads])


def divergence(net: Network, omega: np.ndarray) -> np.ndarray:
    """Net outflow of an edge 1-form at every vertex."""
    n = net.n_vertices
    return (np.bincount(net.tails, weights=omega, minlength=n)
            - np.bincount(net.heads, weights=omega, minlength=n))


def psi(net: Network, u: Mapping, c) -> np.ndarray:
    """Edge energies ``c_e * dh_e**2`` of the harmonic extension."""
    sol = solve_dirichlet(net, u, c)
    dh = sol.h[net.tails] - sol.h[net.heads]
    return sol.conductances * dh * dh
