"""Growth series of Coxeter groups with at most 2-dimensional nerves.

The inverse growth series ``1/W(t)`` is assembled exactly from the spherical
subsets of the nerve as a rational function; the growth rate is the
reciprocal of the least positive root of its numerator, isolated by exact
bisection on rationals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence

from .coxeter import Nerve, rank3_tag
from .errors import ExceptionalNerve, KTooSmall, NoRootInUnitInterval, UnsupportedRank
from .polynomials import (RationalFunction, RationalPolynomial, count_roots,
                          poly_gcd, series_divide, squarefree_part, sturm_chain)

SCAN_STEP = Fraction(1, 1024)
ROOT_WIDTH = 1e-12
# default refinement; tight enough that the 12-place rate readout is exact
READOUT_WIDTH = Fraction(1, 10 ** 18)
TAYLOR_ORDER = 64


def bracket(n: int) -> RationalPolynomial:
    """``[n](z) = 1 + z + ... + z**(n-1)``."""
    if n < 1:
        raise ValueError("bracket needs n >= 1")
    return RationalPolynomial([1] * n)


def bracket_product(ns: Iterable[int]) -> RationalPolynomial:
    out = RationalPolynomial.constant(1)
    for n in ns:
        out = out * bracket(n)
    return out


# Exponents of the irreducible rank-3 finite groups, as bracket lists.
RANK3_BRACKETS = {
    "A3": (2, 3, 4),
    "B3": (2, 4, 6),
    "H3": (2, 6, 10),
}


def finite_growth_brackets(nerve_or_system, subset: Sequence[int]) -> tuple:
    system = getattr(nerve_or_system, "system", nerve_or_system)
    subset = tuple(sorted(subset))
    if len(subset) == 0:
        return ()
    if len(subset) == 1:
        return (2,)
    if len(subset) == 2:
        return (2, system.label(*subset))
    if len(subset) == 3:
        tag, m = rank3_tag(system, subset)
        if tag == "I2m_x_Z2":
            return (2, 2, m)
        return RANK3_BRACKETS[tag]
    raise UnsupportedRank(f"rank {len(subset)} spherical subsets are not supported")


def finite_growth_poly(nerve_or_system, subset: Sequence[int]) -> RationalPolynomial:
    """Growth polynomial of the finite parabolic subgroup on ``subset`` (rank <= 3)."""
    return bracket_product(finite_growth_brackets(nerve_or_system, subset))


def steinberg_inverse_growth(nerve: Nerve) -> RationalFunction:
    """``1/W(t)`` as a reduced rational function.

    Each spherical ``T`` contributes ``(-1)**|T| * t**deg / W_T(t)``, which
    equals ``(-1)**|T| / W_T(1/t)`` because ``W_T`` is palindromic.  Subsets
    with the same growth polynomial are summed as one term.
    """
    if nerve.maxdim > 2:
        raise UnsupportedRank("nerve has simplices of dimension > 2")
    terms = {}
    for level in nerve.simplices:
        for simplex in level:
            key = (len(simplex) % 2, finite_growth_brackets(nerve, simplex))
            terms[key] = terms.get(key, 0) + 1
    total = RationalFunction(1)
    for (odd, ns), count in sorted(terms.items()):
        poly = bracket_product(ns)
        sign = -1 if odd else 1
        total = total + RationalFunction(
            RationalPolynomial.monomial(poly.degree, sign * count), poly)
    return total


def inverse_growth_from_counts(k: int, f1: int, f2: int) -> RationalFunction:
    """Right-angled reference ``1 - k/(1/t+1) + f1/(1/t+1)**2 - f2/(1/t+1)**3``."""
    one_t = RationalPolynomial([1, 1])
    t = RationalPolynomial([0, 1])
    num = one_t ** 3 - k * t * one_t ** 2 + f1 * t * t * one_t - f2 * t ** 3
    return RationalFunction(num, one_t ** 3)


def reference_counts(k: int):
    """Edge and triangle counts of a flag triangulation of the sphere on ``k`` vertices."""
    return 3 * (k - 2), 2 * (k - 2)


@dataclass(frozen=True)
class GrowthResult:
    inverse_growth_series: RationalFunction
    root_interval: tuple  # (lo, hi) as Fractions
    taylor_coefficients: tuple
    multiplicity: int = 1

    @property
    def least_positive_root(self) -> float:
        lo, hi = self.root_interval
        return float((lo + hi) / 2)

    @property
    def growth_rate(self) -> float:
        lo, hi = self.root_interval
        return float(2 / (lo + hi))

    @property
    def tangential(self) -> bool:
        """True when the isolated root has even multiplicity (no sign change)."""
        return self.multiplicity % 2 == 0

    def to_json_dict(self) -> dict:
        lo, hi = self.root_interval
        mid = (lo + hi) / 2
        return {
            "root": decimal_string(mid, 12),
            "rate": decimal_string(1 / mid, 12),
            "coeffs": [int(c) for c in self.taylor_coefficients],
        }


def decimal_string(x, places: int) -> str:
    """Round-half-even decimal string of an exact rational (or int)."""
    q = round(Fraction(x) * 10 ** places)
    sign = "-" if q < 0 else ""
    digits = str(abs(q)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def least_root_interval(poly: RationalPolynomial, width=ROOT_WIDTH,
                        step: Fraction = SCAN_STEP):
    """Isolate the least root of ``poly`` in ``(0, 1]``.

    Roots are counted with a Sturm chain of the squarefree part, so roots of
    even multiplicity are not lost.  The scan walks ``(0, 1]`` in cells of
    ``step`` and bisects the first cell holding a root.  Returns
    ``(lo, hi, multiplicity)`` with ``hi - lo <= width``, or ``lo == hi``
    when an exact rational root is hit.
    """
    sqf = squarefree_part(poly)
    zero, one = Fraction(0), Fraction(1)
    if sqf.degree < 1:
        raise NoRootInUnitInterval("numerator is constant")
    chain = sturm_chain(sqf)
    if count_roots(chain, zero, one) == 0:
        raise NoRootInUnitInterval("numerator has no root in (0, 1]")
    lo = zero
    while True:
        hi = min(lo + step, one)
        if count_roots(chain, lo, hi) > 0:
            break
        lo = hi
    width = Fraction(width)
    while hi - lo > width and sqf(hi) != 0:
        mid = (lo + hi) / 2
        if count_roots(chain, lo, mid) > 0:
            hi = mid
        else:
            lo = mid
    if sqf(hi) == 0:
        lo = hi
    return lo, hi, _multiplicity(poly, lo, hi)


def _multiplicity(poly: RationalPolynomial, lo, hi) -> int:
    """Multiplicity of the unique root of ``poly`` in ``(lo, hi]``.

    The root has multiplicity > j iff it is a root of
    ``gcd(p, p', ..., p^(j))``, and those gcds only have roots of ``p``.
    """
    mult, g, deriv = 1, poly, poly.derivative()
    while True:
        g = poly_gcd(g, deriv)
        if g.degree < 1:
            return mult
        if lo == hi:
            inside = g(hi) == 0
        else:
            inside = count_roots(sturm_chain(squarefree_part(g)), lo, hi) > 0
        if not inside:
            return mult
        mult += 1
        deriv = deriv.derivative()


def reciprocal_taylor(ratfunc: RationalFunction, order: int = TAYLOR_ORDER) -> list:
    """Taylor coefficients of ``1/ratfunc``, i.e. of ``W`` when given ``1/W``."""
    coeffs = series_divide(ratfunc.denominator.coeffs, ratfunc.numerator.coeffs, order)
    return [int(c) if c.denominator == 1 else c for c in coeffs]


def growth_rate(ratfunc: RationalFunction, order: int = TAYLOR_ORDER,
                width=READOUT_WIDTH) -> GrowthResult:
    """Growth data of ``W = 1/ratfunc``: least positive root, rate and Taylor coefficients."""
    lo, hi, mult = least_root_interval(ratfunc.numerator, width)
    return GrowthResult(ratfunc, (lo, hi), tuple(reciprocal_taylor(ratfunc, order)), mult)


def growth_series(nerve: Nerve, order: int = TAYLOR_ORDER) -> List[int]:
    """Sphere sizes ``#S(n)`` for ``n < order`` from the Steinberg series."""
    return reciprocal_taylor(steinberg_inverse_growth(nerve), order)


def rac_growth_closed_form(k: int) -> float:
    """Growth rate of a compact right-angled group in H^3 with ``k`` generators."""
    if k < 6:
        raise KTooSmall(f"closed form needs k >= 6, got {k}")
    return (k - 4 + math.sqrt((k - 4) ** 2 - 4)) / 2


def growth_lower_bound(k: int) -> float:
    """Lower bound on the growth rate of any Coxeter polyhedron group in H^3 with ``k`` faces."""
    return rac_growth_closed_form(k)


def is_exceptional(nerve: Nerve) -> bool:
    """Nerve is isolated vertices plus at most a single edge or a single triangle."""
    if nerve.f1 <= 1:
        return True
    if nerve.f2 == 1:
        tri = set(nerve.triangles[0])
        return all(set(e) <= tri for e in nerve.edges)
    return False


def default_grid(n: int = 64) -> List[Fraction]:
    return [Fraction(i, n) for i in range(1, n + 1)]


def verify_growth_comparison(nerve: Nerve, grid_points: Sequence = None) -> dict:
    """Compare ``1/W(t)`` with the right-angled reference at rational ``t`` in (0, 1].

    Violations are report content, not errors.  Inputs outside the
    comparison's hypotheses (k < 6, the degenerate nerves) are rejected.
    """
    k = nerve.k
    if k < 6:
        raise KTooSmall(f"comparison needs k >= 6, got {k}")
    if nerve.maxdim > 2:
        raise UnsupportedRank("nerve has simplices of dimension > 2")
    if is_exceptional(nerve):
        raise ExceptionalNerve("nerve is isolated vertices plus one simplex")
    grid = [Fraction(t) for t in (grid_points if grid_points is not None else default_grid())]
    if any(not 0 < t <= 1 for t in grid):
        raise ValueError("grid points must lie in (0, 1]")
    inv_w = steinberg_inverse_growth(nerve)
    ref = inverse_growth_from_counts(k, *reference_counts(k))
    rows = [(t, inv_w(t), ref(t)) for t in grid]
    violations = [t for t, lhs, rhs in rows if lhs > rhs]
    return {
        "k": k,
        "points": len(grid),
        "violations": violations,
        "equal_everywhere": all(lhs == rhs for _, lhs, rhs in rows),
        "rows": rows,
        "ok": not violations,
    }


def bracket_shift_check(a: int, b: int, d: int, t) -> bool:
    """Check ``[a-d, b+d](t) <= [a, b](t)`` for ``a <= b + 1``, ``0 <= d <= a``.

    ``[0]`` is the empty sum, so ``d = a`` makes the left side zero.
    """
    if not (a <= b + 1 and 0 <= d <= a and t >= 0):
        raise ValueError("need a <= b + 1, 0 <= d <= a and t >= 0")
    t = Fraction(t)

    def br(n):
        return sum((t ** i for i in range(n)), Fraction(0))

    return br(a - d) * br(b + d) <= br(a) * br(b)
