"""Exact univariate polynomials and rational functions over the rationals.

Coefficients are :class:`fractions.Fraction` stored in ascending degree.
Everything here is exact; the only floating point conversion is the explicit
``float()`` a caller may apply to an evaluation.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


def _trim(coeffs: list) -> tuple:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class RationalPolynomial:
    """Immutable polynomial ``sum(c[i] * t**i)`` with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        self.coeffs = _trim([Fraction(c) for c in coeffs])

    @classmethod
    def constant(cls, c: Number) -> "RationalPolynomial":
        return cls([c])

    @classmethod
    def monomial(cls, degree: int, c: Number = 1) -> "RationalPolynomial":
        return cls([0] * degree + [c])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, t):
        acc = 0 * t
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalPolynomial.constant(other)
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"

    @staticmethod
    def _coerce(other) -> "RationalPolynomial":
        if isinstance(other, RationalPolynomial):
            return other
        return RationalPolynomial.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial(self[i] + other[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = RationalPolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "RationalPolynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading()
        quot = [Fraction(0)] * max(len(rem) - dq, 1)
        for shift in range(len(rem) - 1 - dq, -1, -1):
            c = rem[shift + dq] / lead
            quot[shift] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[shift + j] -= c * b
        return RationalPolynomial(quot), RationalPolynomial(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(self._coerce(other))[0]

    def __mod__(self, other):
        return self.divmod(self._coerce(other))[1]

    def monic(self) -> "RationalPolynomial":
        if self.is_zero():
            return self
        lead = self.leading()
        return RationalPolynomial(c / lead for c in self.coeffs)

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def is_palindromic(self) -> bool:
        return self.coeffs == tuple(reversed(self.coeffs))

    def shift_zeros(self) -> int:
        """Multiplicity of the root at zero."""
        n = 0
        while n < len(self.coeffs) and self.coeffs[n] == 0:
            n += 1
        return n

    def reciprocal_series(self, order: int) -> list:
        """First ``order`` Taylor coefficients of ``1/self`` (requires self(0) != 0)."""
        return series_divide([1], self.coeffs, order)


def poly_gcd(a: RationalPolynomial, b: RationalPolynomial) -> RationalPolynomial:
    """Monic greatest common divisor (Euclid's algorithm)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def squarefree_part(p: RationalPolynomial) -> RationalPolynomial:
    if p.degree <= 0:
        return p
    return p // poly_gcd(p, p.derivative())


def sturm_chain(p: RationalPolynomial) -> list:
    chain = [p, p.derivative()]
    while not chain[-1].is_zero():
        chain.append(-(chain[-2] % chain[-1]))
    chain.pop()
    return chain


def _sign_changes(chain, x) -> int:
    signs = []
    for q in chain:
        v = q(x)
        if v != 0:
            signs.append(v > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(chain, lo, hi) -> int:
    """Number of distinct real roots in the half-open interval ``(lo, hi]``."""
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


def series_divide(num: Sequence[Number], den: Sequence[Number], order: int) -> list:
    """Taylor coefficients of ``num/den`` up to (excluding) ``t**order``."""
    den = [Fraction(c) for c in den]
    if not den or den[0] == 0:
        raise ZeroDivisionError("series denominator vanishes at zero")
    num = [Fraction(c) for c in num]
    out = []
    d0 = den[0]
    for n in range(order):
        acc = num[n] if n < len(num) else Fraction(0)
        for j in range(1, min(n, len(den) - 1) + 1):
            acc -= den[j] * out[n - j]
        out.append(acc / d0)
    return out


class RationalFunction:
    """``numerator / denominator`` in lowest terms with a monic-normalized denominator."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator=None):
        num = RationalPolynomial._coerce(numerator)
        den = RationalPolynomial._coerce(1 if denominator is None else denominator)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den) if not num.is_zero() else den.monic()
        num, den = num // g, den // g
        lead = den.leading()
        self.numerator = RationalPolynomial(c / lead for c in num.coeffs)
        self.denominator = RationalPolynomial(c / lead for c in den.coeffs)

    def __add__(self, other):
        other = _as_ratfunc(other)
        return RationalFunction(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other):
        return self + (-_as_ratfunc(other))

    def __mul__(self, other):
        other = _as_ratfunc(other)
        return RationalFunction(
            self.numerator * other.numerator, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ratfunc(other)
        return RationalFunction(
            self.numerator * other.denominator, self.denominator * other.numerator
        )

    def __call__(self, t):
        return self.numerator(t) / self.denominator(t)

    def __eq__(self, other):
        other = _as_ratfunc(other)
        return (self.numerator == other.numerator
                and self.denominator == other.denominator)

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def __repr__(self):
        return f"RationalFunction({self.numerator!r}, {self.denominator!r})"

    def taylor(self, order: int) -> list:
        return series_divide(self.numerator.coeffs, self.denominator.coeffs, order)


def _as_ratfunc(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction(x)
