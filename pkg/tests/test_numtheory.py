from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from enharmonic.errors import EnharmonicError, NonPositive, NotInterlaced
from enharmonic.gallery import make_small_graph, make_star
from enharmonic.numtheory import (TWELVE_EDGE_WIDTH_POLYNOMIAL, RationalPolynomial, check_interlaced,
                                  field_params_from_s, is_rational_square, is_squarefree, min_poly_residual,
                                  quadratic_discriminant, quadratic_field_params, star_energies)
from enharmonic.solver import solve_all

from conftest import H_HIGH, H_LOW

rationals = st.fractions(min_value=F(1, 7), max_value=7, max_denominator=7)


def test_polynomial_basics():
    p = RationalPolynomial.from_descending([1, -6, 4])
    assert p.degree == 2
    assert p(F(3)) == F(-5)
    assert p.real_roots() == pytest.approx([3 - np.sqrt(5), 3 + np.sqrt(5)])
    assert RationalPolynomial.from_roots([1, 2]).coeffs == (2, -3, 1)
    assert (p * RationalPolynomial((0, 1))).degree == 3
    assert p.scaled(3).monic() == p
    assert str(RationalPolynomial((F(1, 2), 1))) == "(1)z + (1/2)"
    with pytest.raises(ValueError):
        RationalPolynomial((0, 0))


def test_star_energies_linear():
    assert star_energies(RationalPolynomial((F(-1, 2), 1)), (0, 1)) == (F(1, 2), F(1, 2))


def test_star_energies_quadratic():
    p = RationalPolynomial.from_descending([1, -6, 4])
    e = star_energies(p, (0, 1, 6))
    assert e == (F(2, 3), F(1, 5), F(2, 15))
    # the defining identity, checked with an independent expansion
    x = sp.symbols("x")
    lhs = 2 * (x - 1) * (x - 6) + sp.Rational(3, 5) * x * (x - 6) + sp.Rational(2, 5) * x * (x - 1)
    assert sp.expand(lhs - 3 * (x**2 - 6 * x + 4)) == 0


def test_not_interlaced():
    with pytest.raises(NotInterlaced):
        star_energies(RationalPolynomial.from_roots([1, 3]), (0, 1, 6))
    with pytest.raises(NotInterlaced):
        check_interlaced(RationalPolynomial.from_roots([2, 3]), (0, 1, 6))
    with pytest.raises(NotInterlaced):
        check_interlaced(RationalPolynomial.from_descending([1, 0, 1]), (-1, 0, 1))
    with pytest.raises(NotInterlaced):
        check_interlaced(RationalPolynomial.from_roots([1]), (0, 1, 2))
    with pytest.raises(NotInterlaced):
        check_interlaced(RationalPolynomial.from_roots([F(1, 2)]), (1, 0))


def test_star_round_trip():
    p = RationalPolynomial.from_descending([1, -6, 4])
    anchors = (0, 1, 6)
    e = star_energies(p, anchors)
    fx = make_star(2, anchors, [float(x) for x in e])
    sols = solve_all(fx.net, fx.u, fx.energies)
    centre = sorted(s.h[fx.net.vertex_index["z"]] for s in sols)
    assert centre == pytest.approx([3 - np.sqrt(5), 3 + np.sqrt(5)], abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.fractions(0, 10, max_denominator=4), min_size=3, max_size=4, unique=True))
def test_star_energies_property(roots):
    roots = sorted(roots)
    anchors = [roots[0] - 1] + [(a + b) / 2 for a, b in zip(roots, roots[1:])] + [roots[-1] + 1]
    p = RationalPolynomial.from_roots(roots)
    e = star_energies(p, anchors)
    assert sum(e) == 1 and all(x > 0 for x in e)
    # every root satisfies sum e_i / (x - a_i) = 0 exactly
    for r in roots:
        assert sum(ei / (r - ai) for ei, ai in zip(e, anchors)) == 0
    fx = make_star(len(roots), anchors, [float(x) for x in e])
    vals = sorted(s.h[fx.net.vertex_index["z"]] for s in solve_all(fx.net, fx.u, fx.energies))
    assert vals == pytest.approx([float(r) for r in roots], abs=1e-10)


def test_discriminant_examples():
    assert quadratic_discriminant(1, 1, 1, 1, 1) == 45
    assert quadratic_discriminant(1, 2, 3, 4, 5) == 3204  # 36 * 89
    with pytest.raises(NonPositive):
        quadratic_discriminant(1, 1, 0, 1, 1)


@given(rationals, rationals)
def test_discriminant_reduction(d, e):
    expected = 4 * d * d + 4 * d * e + 4 * e * e + 12 * d + 12 * e + 9
    assert quadratic_discriminant(1, 1, 1, d, e) == expected


def _resultant_quadratic(E):
    x, y = sp.symbols("x y")
    Ea, Eb, Ec, Ed, Ee = (sp.Rational(q.numerator, q.denominator) for q in E)
    nx = sp.numer(sp.together(Ea / (x - 1) + Ec / (x - y) + Ed / x))
    ny = sp.numer(sp.together(Eb / (y - 1) + Ec / (y - x) + Ee / y))
    _, factors = sp.factor_list(sp.resultant(nx, ny, y))
    quad = [f for f, _ in factors if sp.degree(f, x) == 2]
    assert len(quad) == 1
    return sp.Poly(quad[0], x)


@settings(max_examples=15, deadline=None)
@given(st.tuples(rationals, rationals, rationals, rationals, rationals))
def test_discriminant_matches_elimination(E):
    poly = _resultant_quadratic(E)
    a, b, c = poly.all_coeffs()
    disc = F(int(sp.numer(b * b - 4 * a * c)), int(sp.denom(b * b - 4 * a * c)))
    ratio = quadratic_discriminant(*E) / disc
    assert is_rational_square(ratio)


small_ints = st.integers(1, 9).map(F)


@settings(max_examples=25, deadline=None)
@given(st.tuples(small_ints, small_ints, small_ints, small_ints, small_ints))
def test_discriminant_matches_solver(E):
    # small integer energies keep the quadratic's coefficients inside the recovery bound
    fx = make_small_graph()
    sols = solve_all(fx.net, fx.u, np.array([float(x) for x in E]))
    v1, v2 = (s.h[fx.net.vertex_index["x"]] for s in sols)
    s_, p_ = F(v1 + v2).limit_denominator(10**6), F(v1 * v2).limit_denominator(10**6)
    assert abs(float(s_) - (v1 + v2)) <= 1e-9 and abs(float(p_) - v1 * v2) <= 1e-9
    # (v1 - v2)^2 = (s^2 - 4p) and delta / (s^2 - 4p) is a rational square
    ratio = quadratic_discriminant(*E) / (s_ * s_ - 4 * p_)
    assert is_rational_square(ratio)
    assert float(quadratic_discriminant(*E) / ratio) == pytest.approx((v1 - v2) ** 2, rel=1e-8)


@pytest.mark.parametrize("D,s,Ed,Ee", [
    (2, F(3, 7), F(49, 10), F(17, 5)),
    (3, F(3, 8), F(32, 17), F(13, 34)),
    (5, F(2, 7), F(49, 22), F(8, 11)),
    (7, F(1, 4), F(8, 5), F(1, 10)),
    (11, F(1, 5), F(25, 16), F(1, 16)),
])
def test_quadratic_field_params(D, s, Ed, Ee):
    assert quadratic_field_params(D) == (s, Ed, Ee)
    delta = quadratic_discriminant(1, 1, 1, Ed, Ee)
    assert is_rational_square(delta / D)
    dp = D * s * s
    assert delta == 9 * dp / (3 * dp - 1) ** 2


def test_field_params_given_s():
    assert field_params_from_s(5, F(2, 7)) == (F(49, 22), F(16, 22))
    Ed, Ee = field_params_from_s(2, F(9, 20))
    assert is_rational_square(quadratic_discriminant(1, 1, 1, Ed, Ee) / 2)
    with pytest.raises(EnharmonicError):
        field_params_from_s(2, F(1, 10))


@pytest.mark.parametrize("D", [1, 0, 4, 12, -3])
def test_quadratic_field_params_rejects(D):
    with pytest.raises(EnharmonicError):
        quadratic_field_params(D)


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 10, 13, 101])
def test_quadratic_field_values_live_in_field(D):
    _, Ed, Ee = quadratic_field_params(D)
    fx = make_small_graph()
    E = np.array([1.0, 1.0, 1.0, float(Ed), float(Ee)])
    v1, v2 = (s.h[fx.net.vertex_index["x"]] for s in solve_all(fx.net, fx.u, E))
    s_, p_ = F(v1 + v2).limit_denominator(10**6), F(v1 * v2).limit_denominator(10**6)
    assert abs(float(s_ * s_ - 4 * p_) - (v1 - v2) ** 2) <= 1e-9
    assert is_rational_square((s_ * s_ - 4 * p_) / D)


def test_squarefree():
    assert [n for n in range(1, 13) if is_squarefree(n)] == [1, 2, 3, 5, 6, 7, 10, 11]
    assert is_rational_square(F(9, 4)) and not is_rational_square(F(2)) and not is_rational_square(F(-1))


def test_min_poly_residual():
    p = RationalPolynomial.from_descending([5, -5, 1])
    assert min_poly_residual([H_LOW, H_HIGH], p) <= 1e-12
    assert min_poly_residual(0.5, RationalPolynomial.from_descending([1, -1, 0])) == pytest.approx(0.125)
    legendre = RationalPolynomial.from_descending([3, -3, F(1, 2)])
    assert min_poly_residual([(1 - 1 / np.sqrt(3)) / 2, (1 + 1 / np.sqrt(3)) / 2], legendre) <= 1e-12


def test_twelve_edge_polynomial_has_twelve_real_roots():
    x = sp.symbols("x")
    coeffs = [sp.Integer(int(c)) for c in reversed(TWELVE_EDGE_WIDTH_POLYNOMIAL.coeffs)]
    roots = sp.Poly(coeffs, x).real_roots()
    assert len(roots) == 12
    assert len(TWELVE_EDGE_WIDTH_POLYNOMIAL.real_roots()) == 12
