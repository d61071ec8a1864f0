"""Exact linear combinations of square roots of rationals.

Characteristic exponents and their differences live in Q extended by a few
square roots.  A :class:`QuadExpr` is ``rational + sum coeff * sqrt(d)`` with
squarefree integer radicands d (negative admitted, handled formally).
Equality tests compare the rational part and each radical coefficient, so
criteria like "is this an odd integer" stay exact.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import as_fraction


def squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * d with d squarefree; returns (s, d).  n may be negative."""
    if n == 0:
        return 0, 1
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, d = 1, 1
    p = 2
    while p * p <= n:
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        s *= p ** (k // 2)
        if k % 2:
            d *= p
        p += 1 if p == 2 else 2
    d *= n
    return s, sign * d


class QuadExpr:
    """rational + sum of coeff*sqrt(radicand) with squarefree radicands."""

    __slots__ = ("rational", "radicals")

    def __init__(self, rational=0, radicals: dict[int, Fraction] | None = None):
        self.rational = as_fraction(rational)
        rads = {}
        for d, c in (radicals or {}).items():
            c = as_fraction(c)
            if c and d != 1:
                rads[int(d)] = rads.get(int(d), Fraction(0)) + c
        self.radicals = {d: c for d, c in rads.items() if c}

    @classmethod
    def sqrt_rational(cls, r) -> "QuadExpr":
        """Exact sqrt of a rational: rational when a perfect square, surd otherwise."""
        r = as_fraction(r)
        if r == 0:
            return cls(0)
        num, den = r.numerator, r.denominator
        # sqrt(num/den) = sqrt(num*den)/den
        s, d = squarefree_split(num * den)
        if d == 1:
            return cls(Fraction(s, den))
        return cls(0, {d: Fraction(s, den)})

    # -- arithmetic (additive; scaling by rationals only) -------------------

    def __add__(self, other):
        other = _as_quad(other)
        rads = dict(self.radicals)
        for d, c in other.radicals.items():
            rads[d] = rads.get(d, Fraction(0)) + c
        return QuadExpr(self.rational + other.rational, rads)

    __radd__ = __add__

    def __neg__(self):
        return QuadExpr(-self.rational, {d: -c for d, c in self.radicals.items()})

    def __sub__(self, other):
        return self + (-_as_quad(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QuadExpr":
        c = as_fraction(c)
        return QuadExpr(self.rational * c,
                        {d: v * c for d, v in self.radicals.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    # -- predicates -----------------------------------------------------------

    def is_rational(self) -> bool:
        return not self.radicals

    def rational_value(self) -> Fraction:
        if self.radicals:
            raise ValueError(f"{self} is irrational")
        return self.rational

    def is_integer(self) -> bool:
        return self.is_rational() and self.rational.denominator == 1

    def is_odd_integer(self) -> bool:
        return self.is_integer() and self.rational.numerator % 2 == 1

    def fractional_part(self) -> Fraction | None:
        """Value mod 1 when rational, else None."""
        if not self.is_rational():
            return None
        return self.rational - (self.rational.numerator // self.rational.denominator)

    def __eq__(self, other):
        other = _as_quad(other)
        return self.rational == other.rational and self.radicals == other.radicals

    def __hash__(self):
        return hash((self.rational, frozenset(self.radicals.items())))

    def __float__(self) -> float:
        if any(d < 0 for d in self.radicals):
            raise ValueError("complex surd has no float value")
        import math
        return float(self.rational) + sum(
            float(c) * math.sqrt(d) for d, c in self.radicals.items())

    def __complex__(self) -> complex:
        import cmath
        return complex(self.rational) + sum(
            complex(c) * cmath.sqrt(d) for d, c in self.radicals.items())

    def __str__(self):
        parts = [str(self.rational)] if self.rational or not self.radicals else []
        for d, c in sorted(self.radicals.items()):
            parts.append(f"{c}*sqrt({d})")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def _as_quad(x) -> QuadExpr:
    if isinstance(x, QuadExpr):
        return x
    return QuadExpr(as_fraction(x))


class ExponentPair:
    """Roots of a monic quadratic rho^2 - s*rho + p, kept exact.

    The two indicial exponents are s/2 +- sqrt(s^2 - 4p)/2; ``sum_`` and
    ``product`` may be Fractions or ParamPoly (symbolic parameters).
    """

    __slots__ = ("sum_", "product")

    def __init__(self, sum_, product):
        self.sum_ = sum_
        self.product = product

    def discriminant(self):
        return self.sum_ * self.sum_ - 4 * self.product

    def roots(self) -> tuple[QuadExpr, QuadExpr]:
        s = as_fraction(self.sum_) if not hasattr(self.sum_, "terms") else self.sum_.constant_value()
        p = as_fraction(self.product) if not hasattr(self.product, "terms") else self.product.constant_value()
        disc = s * s - 4 * p
        half_root = QuadExpr.sqrt_rational(disc).scale(Fraction(1, 2))
        base = QuadExpr(Fraction(s, 2) if isinstance(s, int) else s / 2)
        return base + half_root, base - half_root

    def difference(self) -> QuadExpr:
        """One representative exponent difference sqrt(s^2-4p) (sign-free)."""
        r1, r2 = self.roots()
        return r1 - r2

    def contains(self, value) -> bool:
        v = _as_quad(value)
        r1, r2 = self.roots()
        return v == r1 or v == r2

    def __str__(self):
        return f"ExponentPair(sum={self.sum_}, product={self.product})"

    __repr__ = __str__
