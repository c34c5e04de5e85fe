"""Exact rational constructions linking enharmonic solutions to totally real fields.

All arithmetic here is in :class:`fractions.Fraction`; floats appear only when
a result is handed to the numeric solver or compared against one.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from math import isqrt
from typing import Sequence

import numpy as np

from .errors import EnharmonicError, NonPositive, NotInterlaced, SingularSystem

INTERLACE_MARGIN = 1e-12


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12) if not x.is_integer() else Fraction(int(x))
    return Fraction(x)


@dataclass(frozen=True)
class RationalPolynomial:
    """Exact polynomial with coefficients in increasing degree order."""

    coeffs: tuple

    def __post_init__(self):
        c = [as_fraction(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c or c[-1] == 0:
            raise ValueError("zero polynomial")
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_descending(cls, coeffs: Sequence) -> "RationalPolynomial":
        return cls(tuple(reversed(list(coeffs))))

    @classmethod
    def from_roots(cls, roots: Sequence, lead=1) -> "RationalPolynomial":
        c = [as_fraction(lead)]
        for r in roots:
            r = as_fraction(r)
            nxt = [Fraction(0)] * (len(c) + 1)
            for i, a in enumerate(c):
                nxt[i + 1] += a
                nxt[i] -= r * a
            c = nxt
        return cls(tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        if isinstance(x, (Fraction, int)):
            acc = Fraction(0)
            for a in reversed(self.coeffs):
                acc = acc * x + a
            return acc
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + float(a)
        return acc

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        out = [Fraction(0)] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(tuple(out))

    def scaled(self, k) -> "RationalPolynomial":
        return RationalPolynomial(tuple(as_fraction(k) * a for a in self.coeffs))

    def monic(self) -> "RationalPolynomial":
        return self.scaled(1 / self.coeffs[-1])

    @property
    def l1_norm(self) -> Fraction:
        return sum((abs(a) for a in self.coeffs), Fraction(0))

    def real_roots(self) -> np.ndarray:
        r = np.roots([float(a) for a in reversed(self.coeffs)])
        return np.sort(r.real[np.abs(r.imag) <= 1e-9 * np.maximum(1, np.abs(r))])

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            a = self.coeffs[k]
            if a:
                terms.append(f"({a})" + ("" if k == 0 else "z" if k == 1 else f"z^{k}"))
        return " + ".join(terms) or "0"


# Width of one tile, as a function of the orientation, in the equal-energy
# Smith diagrams of a twelve-edge planar network with twelve compatible
# orientations.  Coefficients in descending degree.
TWELVE_EDGE_WIDTH_POLYNOMIAL = RationalPolynomial.from_descending([
    1270080000000, -5554584000000, 10776143400000, -12235337185000,
    9034493949125, -4560532680000, 1610724560815, -400501165895,
    69535433439, -8223166134, 629396649, -28041714, 551124,
])


def min_poly_residual(values, p: RationalPolynomial) -> float:
    """``max |p(v)| / ||p||_1`` over ``values``; small means near-roots of ``p``."""
    vals = np.atleast_1d(np.asarray(values, dtype=float))
    coeffs = np.array([float(a) for a in reversed(p.coeffs)])
    return float(np.abs(np.polyval(coeffs, vals)).max() / float(p.l1_norm))


def _solve_exact(a: list, b: list) -> list:
    """Gaussian elimination over the rationals."""
    n = len(b)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularSystem("singular rational system")
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def check_interlaced(p: RationalPolynomial, anchors: Sequence) -> None:
    """Raise unless ``p`` has one simple real root strictly inside each anchor gap.

    A numeric root check with a guard margin is followed by an exact
    certificate: ``p`` must alternate in sign at the anchors.
    """
    a = [as_fraction(x) for x in anchors]
    d = p.degree
    if len(a) != d + 1:
        raise NotInterlaced(f"need {d + 1} anchors for degree {d}, got {len(a)}")
    if any(x >= y for x, y in zip(a, a[1:])):
        raise NotInterlaced("anchors must be strictly increasing")
    roots = p.real_roots()
    if len(roots) != d:
        raise NotInterlaced("polynomial does not have only real roots")
    for i, r in enumerate(roots):
        if not (float(a[i]) + INTERLACE_MARGIN < r < float(a[i + 1]) - INTERLACE_MARGIN):
            raise NotInterlaced(f"root {r!r} is not inside ({a[i]}, {a[i + 1]})")
    signs = [p(x) for x in a]
    if any(s == 0 for s in signs) or any((s > 0) == (t > 0) for s, t in zip(signs, signs[1:])):
        raise NotInterlaced("no sign change of p between consecutive anchors")


def star_energies(p: RationalPolynomial, anchors: Sequence) -> tuple:
    """Energies ``e_i`` with ``sum_i e_i prod_{j != i} (x - a_j)`` proportional to ``p``.

    With these energies on a star whose leaves carry the anchors, the centre's
    enharmonic values are exactly the roots of ``p``.  Normalized to sum 1.
    """
    check_interlaced(p, anchors)
    a = [as_fraction(x) for x in anchors]
    d = p.degree
    basis = []
    for i in range(d + 1):
        basis.append(RationalPolynomial.from_roots([a[j] for j in range(d + 1) if j != i]).coeffs)
    # match the coefficients of sum_i e_i basis_i against p, fixing the scale by sum e_i = 1
    rows = [[basis[i][k] for i in range(d + 1)] for k in range(d + 1)]
    # unknowns (e_0..e_d, lam) with sum_i e_i B_i - lam p = 0 and sum e_i = 1
    mat = [r + [-p.coeffs[k]] for k, r in enumerate(rows)]
    mat.append([Fraction(1)] * (d + 1) + [Fraction(0)])
    rhs = [Fraction(0)] * (d + 1) + [Fraction(1)]
    sol = _solve_exact(mat, rhs)
    e = tuple(sol[: d + 1])
    if any(x <= 0 for x in e):
        raise NotInterlaced("energies are not all positive")
    return e


def quadratic_discriminant(Ea, Eb, Ec, Ed, Ee) -> Fraction:
    """Discriminant of the quadratic satisfied by the interior values of the
    four-vertex, five-edge bridge network (edges a, b from the top vertex,
    c across, d, e to the bottom vertex)."""
    E = [as_fraction(x) for x in (Ea, Eb, Ec, Ed, Ee)]
    for name, x in zip("abcde", E):
        if x <= 0:
            raise NonPositive(f"energy {name}", x)
    Ea, Eb, Ec, Ed, Ee = E
    S = sum(E)
    return (Ea * Ee - Eb * Ed + Ec * S) ** 2 + 4 * Eb * Ec * Ed * S


def is_rational_square(q: Fraction) -> bool:
    q = as_fraction(q)
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def field_params_from_s(D: int, s) -> tuple:
    """``(E_d, E_e)`` giving discriminant ``D`` times a square, from a rational
    ``s`` with ``D s**2`` strictly between 1/3 and 4/9."""
    s = as_fraction(s)
    dp = D * s * s
    if not Fraction(1, 3) < dp < Fraction(4, 9):
        raise EnharmonicError(f"D*s^2 = {dp} is outside (1/3, 4/9)")
    denom = 6 * dp - 2
    return 1 / denom, (4 - 9 * dp) / denom


def quadratic_field_params(D: int) -> tuple:
    """``(s, E_d, E_e)`` so that unit energies on a, b, c with these on d, e
    give interior values in ``Q(sqrt D)``.

    The rational ``s`` is the first ``p/q`` (by denominator, then numerator)
    with ``D s**2`` in ``(1/3, 4/9)``.
    """
    if not isinstance(D, int) or D < 2 or not is_squarefree(D):
        raise EnharmonicError(f"D must be a squarefree integer >= 2, got {D!r}")
    for q in count(1):
        for p in range(1, q + 1):
            s = Fraction(p, q)
            if s.denominator != q:
                continue
            if Fraction(1, 3) < D * s * s < Fraction(4, 9):
                return (s, *field_params_from_s(D, s))
        if q > 10**6:  # unreachable: the interval has positive length
            raise EnharmonicError("no parameter found")
