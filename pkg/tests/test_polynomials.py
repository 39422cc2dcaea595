from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from coxperc.polynomials import (RationalFunction, RationalPolynomial, count_roots, poly_gcd,
                                 series_divide, squarefree_part, sturm_chain)

P = RationalPolynomial
small_ints = st.integers(-6, 6)
polys = st.lists(small_ints, min_size=1, max_size=6).map(P)


def test_arithmetic_basics():
    a = P([1, 1])
    assert a * a == P([1, 2, 1])
    assert (a ** 3)(Fraction(1, 2)) == Fraction(27, 8)
    assert P([0, 0]).is_zero()
    assert P([3, 0, 0]).degree == 0
    q, r = P([1, 0, -1]).divmod(P([1, 1]))
    assert q == P([1, -1]) and r.is_zero()


def test_gcd_and_squarefree():
    t = P([0, 1])
    p = (t - 2) ** 2 * (t + 1)
    assert poly_gcd(p, p.derivative()) == P([-2, 1])
    assert squarefree_part(p).monic() == ((t - 2) * (t + 1)).monic()


def test_sturm_counts_roots_half_open():
    t = P([0, 1])
    p = (t - Fraction(1, 3)) * (t - Fraction(1, 2)) * (t - 2)
    chain = sturm_chain(p)
    assert count_roots(chain, 0, 1) == 2
    assert count_roots(chain, Fraction(1, 3), Fraction(1, 2)) == 1  # (1/3, 1/2]
    assert count_roots(chain, 0, Fraction(1, 3)) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=4, unique=True))
def test_sturm_matches_numpy_roots(roots):
    t = P([0, 1])
    p = P([1])
    for r in roots:
        p = p * (t - Fraction(r, 7))
    chain = sturm_chain(squarefree_part(p))
    expected = sum(1 for r in roots if -1 < r / 7 <= 1)
    assert count_roots(chain, -1, 1) == expected
    # float oracle on a wider window
    numeric = np.roots([float(c) for c in reversed(p.coeffs)]) if p.degree else []
    assert count_roots(chain, -3, 3) == sum(1 for z in numeric if -3 < z.real <= 3)


@settings(max_examples=60, deadline=None)
@given(polys, st.lists(small_ints, min_size=1, max_size=5).filter(lambda c: c[0] != 0))
def test_series_divide_inverts_multiplication(num, den):
    order = 12
    q = series_divide(num.coeffs, den, order)
    prod = (P(q) * P(den)).coeffs
    for n in range(order):
        got = prod[n] if n < len(prod) else 0
        want = num[n]
        assert got == want


def test_rational_function_normalises():
    f = RationalFunction(P([1, 2, 1]), P([2, 2]))
    # (1+t)^2 / (2(1+t)) = (1+t)/2 with a monic denominator
    assert f.denominator == P([1])
    assert f.numerator == P([Fraction(1, 2), Fraction(1, 2)])
    g = RationalFunction(1, P([1, 1]))
    assert g + g == RationalFunction(2, P([1, 1]))
    assert (f * g)(5) == Fraction(1, 2)
