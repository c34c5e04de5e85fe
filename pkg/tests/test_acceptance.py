"""End-to-end acceptance checks, one test per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion (see conftest.py).
"""
import time
from fractions import Fraction as F

import numpy as np
import pytest

from enharmonic.gallery import GALLERY, five_tiles_tiling, jacobi_polynomial, make_four_cycle, make_jacobi, \
    make_path, make_small_graph, make_star
from enharmonic.grid import diamond_domain, riemann_map, solve_grid_sequence
from enharmonic.harmonic import psi
from enharmonic.jacobian import det_dpsi_check, jlog_report
from enharmonic.network import enumerate_compatible_orientations
from enharmonic.numtheory import (TWELVE_EDGE_WIDTH_POLYNOMIAL, RationalPolynomial, is_rational_square,
                                  min_poly_residual, quadratic_discriminant, quadratic_field_params,
                                  star_energies)
from enharmonic.planar import smith_diagram
from enharmonic.solver import solve_all, solve_enharmonic
from enharmonic.tiling import RectTiling, isotopy_signature, retile_with_areas, same_adjacency, tiling_to_network

from conftest import C_HIGH, C_LOW, H_HIGH, H_LOW, brute_force_compatible, planar_fixtures


def _interior_values(fx, sol):
    return sorted(sol.h[[fx.net.vertex_index[v] for v in fx.net.interior]])


@pytest.mark.criterion(1, "small-graph exactness")
def test_c01_small_graph_exactness():
    t = time.perf_counter()
    fx = make_small_graph()
    sols = solve_all(fx.net, fx.u, np.ones(5))
    assert len(sols) == 2
    vi, ei = fx.net.vertex_index, fx.net.edge_index
    hs = []
    for s in sols:
        x, y = s.h[vi["x"]], s.h[vi["y"]]
        assert sorted([x, y]) == pytest.approx([H_LOW, H_HIGH], abs=1e-10)
        hs += [x, y]
        hi = x > 0.5
        assert s.conductances[ei["a"]] == pytest.approx(C_HIGH if hi else C_LOW, abs=1e-8)
        assert s.conductances[ei["e"]] == pytest.approx(C_HIGH if hi else C_LOW, abs=1e-8)
    assert min_poly_residual(hs, RationalPolynomial.from_descending([5, -5, 1])) <= 1e-12
    assert time.perf_counter() - t < 1.0


@pytest.mark.criterion(2, "orientation count invariance")
def test_c02_count_invariance():
    t = time.perf_counter()
    fx = make_small_graph()
    for u0, u1 in [(0, 1), (0, 7), (3, -2)]:
        u = {"v0": u0, "v1": u1}
        got = enumerate_compatible_orientations(fx.net, u)
        assert len(got) == 2
        assert sorted(got) == sorted(brute_force_compatible(fx.net, u))
    assert time.perf_counter() - t < 1.0


@pytest.mark.criterion(3, "degree round trip")
def test_c03_degree_round_trip():
    t = time.perf_counter()
    rng = np.random.default_rng(20240601)
    for fx in (make_path(2), make_small_graph(), make_four_cycle()):
        n_sigma = len(enumerate_compatible_orientations(fx.net, fx.u))
        done = 0
        while done < 50:
            c = np.exp(rng.uniform(np.log(0.1), np.log(10.0), fx.net.n_edges))
            E = psi(fx.net, fx.u, c)
            if E.min() <= 1e-6:
                continue
            sols = solve_all(fx.net, fx.u, E)
            assert len(sols) == n_sigma
            hits = [s for s in sols if np.allclose(s.conductances, c, rtol=1e-6, atol=0)]
            assert len(hits) == 1, fx.name
            done += 1
    assert time.perf_counter() - t < 30.0


@pytest.mark.criterion(4, "Jacobi oracle")
def test_c04_jacobi_oracle():
    r3 = np.sqrt(3.0)
    cases = [
        (make_jacobi(2, 1, 1), [(1 - 1 / r3) / 2, (1 + 1 / r3) / 2]),
        (make_jacobi(3, 1, 1), [0.5 - np.sqrt(0.6) / 2, 0.5, 0.5 + np.sqrt(0.6) / 2]),
        (make_jacobi(2, 2, 1), sorted((1 - jacobi_polynomial(2, 1, 0).roots().real) / 2)),
    ]
    for fx, want in cases:
        for sol in solve_all(fx.net, fx.u, fx.energies):
            assert _interior_values(fx, sol) == pytest.approx(want, abs=1e-8)


@pytest.mark.criterion(5, "log-Jacobian involution and determinant")
def test_c05_jacobian():
    rng = np.random.default_rng(7)
    for fx in (make_path(2), make_small_graph()):
        n_int = len(fx.net.interior)
        n_cyc = fx.net.n_edges - n_int
        for _ in range(20):
            c = rng.uniform(0.2, 5.0, fx.net.n_edges)
            rep = jlog_report(fx.net, fx.u, c)
            assert rep.max_deviation <= 1e-5
            assert rep.involution_defect <= 1e-8
            assert rep.multiplicities == (n_int, n_cyc)
            assert rep.det_relative_error <= 1e-4
    fx = make_path(2)
    pred, fd = det_dpsi_check(fx.net, fx.u, [1.0, 2.0])
    assert pred == pytest.approx(-4 / 81, rel=1e-12)
    assert fd == pytest.approx(-4 / 81, rel=1e-4)


def _small_graph_diagrams():
    fx = make_small_graph()
    sols = solve_all(fx.net, fx.u, np.ones(5))
    return fx, sols, [smith_diagram(fx.embedding, s) for s in sols]


@pytest.mark.criterion(6, "Smith diagram")
def test_c06_smith_diagram():
    fx, sols, diags = _small_graph_diagrams()
    for d in diags:
        assert len(d.rects) == 5
        assert np.allclose(d.areas, 1.0, rtol=1e-12)
        assert (d.width, d.height) == pytest.approx((5.0, 1.0), abs=1e-9)
        assert d.horizontal_levels(1e-9) == pytest.approx([0.0, H_LOW, H_HIGH, 1.0], abs=1e-9)
        assert d.max_overlap() <= 1e-12
    nets = [tiling_to_network(RectTiling.from_diagram(d)) for d in diags]
    assert not same_adjacency(nets[0].net, nets[0].sigma, nets[1].net, nets[1].sigma)
    # two-terminal planar fixtures; stars have more than two boundary values
    fixtures = planar_fixtures() + [GALLERY["path5"](), GALLERY["grid4"]()]
    for f in fixtures:
        sigmas = enumerate_compatible_orientations(f.net, f.u) if f.net.n_edges <= 24 else [(1,) * f.net.n_edges]
        for sigma in sigmas:
            sol = solve_enharmonic(f.net, f.u, f.energies, sigma)
            d = smith_diagram(f.embedding, sol)
            assert d.width * d.height == pytest.approx(f.energies.sum(), rel=1e-9), f.name


@pytest.mark.criterion(7, "cartogram round trip and retiling")
def test_c07_cartogram():
    rng = np.random.default_rng(3)
    for fx in planar_fixtures():
        E = rng.uniform(0.5, 2.0, fx.net.n_edges)
        for sol in solve_all(fx.net, fx.u, E):
            tn = tiling_to_network(RectTiling.from_diagram(smith_diagram(fx.embedding, sol)), cross="horizontal")
            assert same_adjacency(tn.net, tn.sigma, fx.net, sol.sigma), fx.name
    tiling = five_tiles_tiling()
    retiled = retile_with_areas(tiling, np.full(5, 0.2))
    assert isotopy_signature(RectTiling.from_diagram(retiled)) == isotopy_signature(tiling)
    _, sols, diags = _small_graph_diagrams()
    match = [d for d in diags if isotopy_signature(RectTiling.from_diagram(d)) == isotopy_signature(tiling)]
    assert len(match) == 1
    ref = match[0].rects / np.array([5.0, 1.0, 5.0, 1.0])
    got = np.array([retiled.rect(e) for e in match[0].edge_ids])
    assert np.abs(got - ref).max() <= 1e-9


@pytest.mark.criterion(8, "star fields")
def test_c08_star_fields():
    p = RationalPolynomial.from_descending([1, -6, 4])
    anchors = (0, 1, 6)
    e = star_energies(p, anchors)
    assert e == (F(2, 3), F(1, 5), F(2, 15))
    fx = make_star(2, anchors, [float(x) for x in e])
    vals = sorted(s.h[fx.net.vertex_index["z"]] for s in solve_all(fx.net, fx.u, fx.energies))
    assert vals == pytest.approx([3 - np.sqrt(5), 3 + np.sqrt(5)], abs=1e-10)
    assert 0 < vals[0] < 1 < vals[1] < 6


@pytest.mark.criterion(9, "quadratic discriminant")
def test_c09_quadratic_discriminant():
    assert quadratic_discriminant(1, 1, 1, 1, 1) == 45
    for D in (2, 3, 5, 7, 11):
        s, ed, ee = quadratic_field_params(D)
        assert s > 0 and ed > 0 and ee > 0
        assert is_rational_square(quadratic_discriminant(1, 1, 1, ed, ee) / D)


@pytest.mark.criterion(10, "grid scaling")
def test_c10_scaling():
    rep = solve_grid_sequence(eps_list=(1 / 10, 1 / 20, 1 / 40))
    print(f"\nsup distances {rep.sup_distances}, sampled pde residuals {rep.pde_residuals}, "
          f"all-node pde residuals {rep.pde_residuals_all_nodes}, seconds {rep.seconds}")
    for r, m in zip(rep.newton_residuals, rep.n_edges):
        assert r <= 1e-10 * m  # unit energies, spread 1
    assert rep.sup_distances[0] > rep.sup_distances[1]
    p10, p20, p40 = rep.pde_residuals
    assert p40 < p20 < p10
    assert rep.seconds[2] < 30.0


@pytest.mark.criterion(11, "Riemann map to a rectangle")
def test_c11_riemann_map():
    coarse = riemann_map(diamond_domain(), 1 / 20)
    fine = riemann_map(diamond_domain(), 1 / 40)
    target = 2 * coarse.problem.domain.area
    assert target == pytest.approx(1.0)
    print(f"\nR(1/20) = {coarse.R:.6f}, R(1/40) = {fine.R:.6f}")
    assert abs(coarse.R - target) / target <= 0.10
    assert abs(fine.R - target) < abs(coarse.R - target)


@pytest.mark.criterion(12, "twelve-edge polynomial data shipped")
def test_c12_polynomial_data():
    p = TWELVE_EDGE_WIDTH_POLYNOMIAL
    assert p.degree == 12
    roots = p.real_roots()
    assert len(roots) == 12
    assert min_poly_residual(roots, p) <= 1e-9
