import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enharmonic.errors import Infeasible, NoConvergence, NonPositive, ZeroDifference
from enharmonic.gallery import make_four_cycle, make_jacobi, make_path, make_small_graph, make_star
from enharmonic.harmonic import psi, solve_dirichlet, weighted_laplacian
from enharmonic.network import enumerate_compatible_orientations, is_compatible, orientation_from_function
from enharmonic.solver import (ConstraintSet, conductances_of, hessian, initial_point, log_objective,
                               residual, solve_all, solve_enharmonic)

from conftest import C_HIGH, C_LOW, H_HIGH, H_LOW, single_edge

ENERGY_FIXTURES = [make_path(3), make_small_graph(), make_four_cycle(), make_jacobi(3, 1, 1),
                   make_star(3, (0, 1, 2, 5))]


def test_log_objective_examples(path2):
    net = single_edge()
    assert log_objective(net, {"v0": 0, "v1": 1}, [1.0], [0.0, 1.0]) == 0.0
    val = log_objective(path2.net, path2.u, [1.0, 1.0], [0.0, 0.5, 1.0])
    assert val == pytest.approx(2 * np.log(0.5), abs=1e-15)
    with pytest.raises(ZeroDifference):
        log_objective(path2.net, path2.u, [1.0, 1.0], [0.0, 0.0, 1.0])


def test_residual_examples(path2):
    assert residual(path2.net, path2.u, [1.0, 1.0], [0.0, 0.5, 1.0]) == pytest.approx([0.0], abs=1e-15)
    # E1 on the v0 side edge, E2 on the v1 side edge
    assert residual(path2.net, path2.u, [1.0, 2.0], [0.0, 0.5, 1.0]) == pytest.approx([-2.0])


def _interior_point(fx, sigma, rng):
    h0 = initial_point(fx.net, fx.u, sigma)
    free = [fx.net.vertex_index[v] for v in fx.net.interior]
    # random point in the polytope: move toward a random corner of the margin box
    for _ in range(50):
        h = h0.copy()
        h[free] += rng.uniform(-0.3, 0.3, len(free)) * (h0.max() - h0.min()) / len(fx.net.vertices)
        sig = np.asarray(sigma)
        if (sig * (h[fx.net.tails] - h[fx.net.heads])).min() > 0:
            return h
    return h0


@pytest.mark.parametrize("fx", ENERGY_FIXTURES, ids=lambda f: f.name)
def test_gradient_and_hessian_match_finite_differences(fx):
    rng = np.random.default_rng(7)
    net = fx.net
    E = rng.uniform(0.5, 2.0, net.n_edges)
    sigma = enumerate_compatible_orientations(net, fx.u)[0]
    h = _interior_point(fx, sigma, rng)
    free = [net.vertex_index[v] for v in net.interior]
    g = residual(net, fx.u, E, h)
    H = hessian(net, fx.u, E, h).toarray()
    step = 1e-7
    for j, i in enumerate(free):
        hp, hm = h.copy(), h.copy()
        hp[i] += step
        hm[i] -= step
        fd = (log_objective(net, fx.u, E, hp) - log_objective(net, fx.u, E, hm)) / (2 * step)
        assert fd == pytest.approx(g[j], abs=1e-6)
        col = (residual(net, fx.u, E, hp) - residual(net, fx.u, E, hm)) / (2 * step)
        assert np.abs(col - H[:, j]).max() <= 1e-4 * max(1.0, np.abs(H).max())
    # hessian is minus the weighted Laplacian
    dh = h[net.tails] - h[net.heads]
    lap = weighted_laplacian(net, E / dh**2).toarray()
    assert np.allclose(H, -lap[np.ix_(free, free)])


def test_path_closed_form(path2):
    sol = solve_enharmonic(path2.net, path2.u, [1.0, 2.0], (1, 1))
    assert sol.h[1] == pytest.approx(1 / 3, abs=1e-12)


def test_small_graph_solution(small):
    sigma = {"a": 1, "b": 1, "c": 1, "d": 1, "e": 1}
    sol = solve_enharmonic(small.net, small.u, np.ones(5), sigma)
    vi, ei = small.net.vertex_index, small.net.edge_index
    assert sol.h[vi["x"]] == pytest.approx(H_HIGH, abs=1e-10)
    assert sol.h[vi["y"]] == pytest.approx(H_LOW, abs=1e-10)
    assert sol.conductances[ei["a"]] == pytest.approx(C_HIGH, abs=1e-8)
    assert sol.conductances[ei["e"]] == pytest.approx(C_HIGH, abs=1e-8)
    assert sol.conductances[ei["b"]] == pytest.approx(C_LOW, abs=1e-8)
    assert sol.residual_norm <= 1e-10 * 5


def test_solve_all_small_graph(small):
    sols = solve_all(small.net, small.u, np.ones(5))
    assert len(sols) == 2
    vi = small.net.vertex_index
    pairs = sorted((round(s.h[vi["x"]], 8), round(s.h[vi["y"]], 8)) for s in sols)
    assert pairs == [(round(H_LOW, 8), round(H_HIGH, 8)), (round(H_HIGH, 8), round(H_LOW, 8))]
    assert len({s.sigma for s in sols}) == 2


def test_solve_all_threads_same_result(small, monkeypatch):
    serial = solve_all(small.net, small.u, np.ones(5), workers=1)
    threaded = solve_all(small.net, small.u, np.ones(5), workers=3)
    for a, b in zip(serial, threaded):
        assert a.sigma == b.sigma
        assert np.array_equal(a.h, b.h)


def test_jacobi_values():
    fx = make_jacobi(2, 1, 1)
    sols = solve_all(fx.net, fx.u, fx.energies)
    for s in sols:
        vals = sorted(s.h[2:])
        assert vals == pytest.approx([(1 - 1 / np.sqrt(3)) / 2, (1 + 1 / np.sqrt(3)) / 2], abs=1e-10)


def test_errors(small, path2):
    with pytest.raises(NonPositive):
        solve_enharmonic(path2.net, path2.u, [1.0, 0.0], (1, 1))
    with pytest.raises(Infeasible):
        solve_enharmonic(path2.net, path2.u, [1.0, 1.0], (1, -1))
    with pytest.raises(NoConvergence):
        solve_enharmonic(small.net, small.u, np.ones(5), (1, 1, 1, 1, 1), max_iter=1, tol=1e-300)


def test_conductances_of_examples(path2):
    assert conductances_of(single_edge(), [1.0], [0.0, 1.0]).tolist() == [1.0]
    assert conductances_of(path2.net, [1.0, 1.0], [0.0, 0.5, 1.0]).tolist() == [4.0, 4.0]
    with pytest.raises(ZeroDifference):
        conductances_of(path2.net, [1.0, 1.0], [0.0, 0.0, 1.0])


def test_initial_point_in_polytope(small):
    for sigma in enumerate_compatible_orientations(small.net, small.u):
        h = initial_point(small.net, small.u, sigma)
        assert orientation_from_function(small.net, h) == sigma
        assert is_compatible(small.net, small.u, sigma)
        assert h[0] == 0.0 and h[3] == 1.0


def test_json_schema(small):
    sol = solve_all(small.net, small.u, np.ones(5))[0]
    out = sol.to_json()
    assert set(out) == {"sigma", "h", "c", "residual", "logM"}
    assert set(out["sigma"].values()) <= {1, -1}


@pytest.mark.parametrize("fx", ENERGY_FIXTURES, ids=lambda f: f.name)
@settings(max_examples=15, deadline=None)
@given(data=st.data())
def test_fixed_point_and_invariants(fx, data):
    net = fx.net
    E = np.array(data.draw(st.lists(st.floats(0.1, 10.0), min_size=net.n_edges, max_size=net.n_edges)))
    lo, hi = min(fx.u.values()), max(fx.u.values())
    for sol in solve_all(net, fx.u, E):
        assert orientation_from_function(net, sol.h) == sol.sigma
        assert sol.residual_norm <= 1e-10 * E.sum() / (hi - lo)
        assert (sol.conductances > 0).all()
        interior = [net.vertex_index[v] for v in net.interior]
        assert (sol.h[interior] > lo).all() and (sol.h[interior] < hi).all()
        assert np.allclose(psi(net, fx.u, sol.conductances), E, rtol=1e-8, atol=0)
        rebuilt = solve_dirichlet(net, fx.u, sol.conductances)
        assert np.abs(rebuilt.h - sol.h).max() <= 1e-9


def test_uniqueness_from_random_starts(small):
    rng = np.random.default_rng(11)
    E = np.array([1.0, 2.0, 0.5, 1.5, 3.0])
    for sigma in enumerate_compatible_orientations(small.net, small.u):
        ref = solve_enharmonic(small.net, small.u, E, sigma).h
        for _ in range(20):
            h0 = _interior_point(small, sigma, rng)
            h = solve_enharmonic(small.net, small.u, E, sigma, h0=h0).h
            assert np.abs(h - ref).max() <= 1e-8


def test_degree_round_trip(small):
    rng = np.random.default_rng(3)
    for _ in range(10):
        c = rng.uniform(0.2, 5.0, 5)
        E = psi(small.net, small.u, c)
        sols = solve_all(small.net, small.u, E)
        assert len(sols) == 2
        hits = [s for s in sols if np.allclose(s.conductances, c, rtol=1e-6, atol=0)]
        assert len(hits) == 1


def test_free_boundary_constraints():
    # a two-by-one ladder with fixed values only at opposite corners
    from enharmonic.network import Network
    net = Network.build(["a", "b", "c", "d"], [("ab", "b", "a"), ("bc", "c", "b"), ("dc", "c", "d"),
                                              ("ad", "d", "a")], ["a", "c"])
    cs = ConstraintSet({"a": 0.0, "c": 1.0})
    sol = solve_enharmonic(net, cs, np.ones(4), (1, 1, 1, 1))
    assert sol.h[1] == pytest.approx(0.5) and sol.h[3] == pytest.approx(0.5)
    with pytest.raises(Infeasible):
        solve_enharmonic(net, ConstraintSet({"a": 0.0}), np.ones(4), (1, 1, 1, 1))
