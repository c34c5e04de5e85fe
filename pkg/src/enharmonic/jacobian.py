"""Log-Jacobian of the conductance-to-energy map and its determinant.

In logarithmic coordinates the derivative of ``log c -> log E`` is an
involution: it is ``-1`` on the span of ``d1_v / dh`` (``v`` interior) and
``+1`` on the span of ``gamma / omega`` (``gamma`` a cycle, ``omega`` the
current).  These two spans form a direct but in general non-orthogonal
decomposition of edge space, so the map is an oblique projection difference.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ZeroEnergy
from .harmonic import psi, solve_dirichlet
from .network import Network, chain_spaces

FD_STEP = 1e-6
EIGEN_TOL = 1e-8


def _solve(net: Network, u: Mapping, c):
    sol = solve_dirichlet(net, u, c)
    dh = sol.h[net.tails] - sol.h[net.heads]
    energy = sol.conductances * dh * dh
    scale = max(float(energy.max()), 1e-300)
    tiny = np.flatnonzero(energy <= 1e-14 * scale)
    if tiny.size:
        raise ZeroEnergy(net.edges[tiny[0]].id)
    return sol, dh


def eigenbasis(net: Network, u: Mapping, c) -> tuple:
    """``(basis, signs)``: columns ``d1_v/dh`` with sign -1, then ``gamma/omega`` with +1."""
    sol, dh = _solve(net, u, c)
    spaces = chain_spaces(net)
    # d holds f(head) - f(tail); dh is h(tail) - h(head), so negate to match
    cob = -spaces.d / dh[:, None]
    cyc = spaces.cyc / sol.omega[:, None]
    basis = np.hstack([cob, cyc])
    signs = np.concatenate([-np.ones(cob.shape[1]), np.ones(cyc.shape[1])])
    return basis, signs


def predicted_jlog(net: Network, u: Mapping, c) -> np.ndarray:
    basis, signs = eigenbasis(net, u, c)
    return basis @ np.linalg.solve(basis.T, np.diag(signs)).T


def orthogonal_jlog(net: Network) -> np.ndarray:
    """``P_cyc - P_cob`` with orthogonal projections (independent of ``c``)."""
    spaces = chain_spaces(net)
    return spaces.p_cyc - spaces.p_cob


def fd_jlog(net: Network, u: Mapping, c, step: float = FD_STEP) -> np.ndarray:
    """Central differences of ``log psi(exp(x))`` at ``x = log c``."""
    x = np.log(net.edge_array(c))
    m = x.size
    jac = np.empty((m, m))
    for k in range(m):
        xp, xm = x.copy(), x.copy()
        xp[k] += step
        xm[k] -= step
        jac[:, k] = (np.log(psi(net, u, np.exp(xp))) - np.log(psi(net, u, np.exp(xm)))) / (2 * step)
    return jac


def predicted_det(net: Network, u: Mapping, c) -> float:
    """``(-1)^(#interior) * prod dh_e**2`` for the harmonic extension."""
    _, dh = _solve(net, u, c)
    return float((-1) ** len(net.interior) * np.prod(dh * dh))


def det_dpsi_check(net: Network, u: Mapping, c, step: float = FD_STEP) -> tuple:
    """``(predicted, finite-difference)`` values of ``det DPsi`` in raw coordinates."""
    c = net.edge_array(c)
    m = c.size
    jac = np.empty((m, m))
    for k in range(m):
        hk = step * c[k]
        cp, cm = c.copy(), c.copy()
        cp[k] += hk
        cm[k] -= hk
        jac[:, k] = (psi(net, u, cp) - psi(net, u, cm)) / (2 * hk)
    return predicted_det(net, u, c), float(np.linalg.det(jac))


def eigen_multiplicities(jac: np.ndarray, tol: float = EIGEN_TOL) -> tuple:
    """Counts of eigenvalues within ``tol`` of -1 and of +1."""
    ev = np.linalg.eigvals(jac)
    return int(np.sum(np.abs(ev + 1) <= tol)), int(np.sum(np.abs(ev - 1) <= tol))


@dataclass(frozen=True)
class JlogReport:
    predicted: np.ndarray
    finite_difference: np.ndarray
    max_deviation: float
    involution_defect: float
    multiplicities: tuple
    det_predicted: float
    det_finite_difference: float
    orthogonal_deviation: float

    @property
    def det_relative_error(self) -> float:
        return abs(self.det_predicted - self.det_finite_difference) / abs(self.det_predicted)

    def to_json(self) -> dict:
        return {
            "J_pred": self.predicted.tolist(),
            "J_fd": self.finite_difference.tolist(),
            "max_deviation": self.max_deviation,
            "involution_defect": self.involution_defect,
            "multiplicity_minus_one": self.multiplicities[0],
            "multiplicity_plus_one": self.multiplicities[1],
            "det_predicted": self.det_predicted,
            "det_fd": self.det_finite_difference,
            "orthogonal_deviation": self.orthogonal_deviation,
        }


def jlog_report(net: Network, u: Mapping, c, step: float = FD_STEP) -> JlogReport:
    pred = predicted_jlog(net, u, c)
    fd = fd_jlog(net, u, c, step)
    eye = np.eye(pred.shape[0])
    det_p, det_fd = det_dpsi_check(net, u, c, step)
    return JlogReport(
        predicted=pred,
        finite_difference=fd,
        max_deviation=float(np.abs(pred - fd).max()),
        involution_defect=float(np.abs(pred @ pred - eye).max()),
        multiplicities=eigen_multiplicities(pred),
        det_predicted=det_p,
        det_finite_difference=det_fd,
        orthogonal_deviation=float(np.abs(pred - orthogonal_jlog(net)).max()),
    )
