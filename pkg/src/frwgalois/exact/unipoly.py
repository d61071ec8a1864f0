"""Dense univariate polynomials over Q: gcd, shifts, rational roots.

Support for singular-point analysis of rational-coefficient ODEs; kept
deliberately small (no general factorization, only what pole bookkeeping
needs: squarefree split, rational roots, local expansions).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import as_fraction


class UPoly:
    """Univariate polynomial with Fraction coefficients, index = degree."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence = ()):
        c = [as_fraction(x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = c

    @classmethod
    def const(cls, x) -> "UPoly":
        return cls([x])

    @classmethod
    def x(cls) -> "UPoly":
        return cls([0, 1])

    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lead(self) -> Fraction:
        if not self.c:
            return Fraction(0)
        return self.c[-1]

    def __getitem__(self, i: int) -> Fraction:
        return self.c[i] if 0 <= i < len(self.c) else Fraction(0)

    def __add__(self, other):
        other = _up(other)
        n = max(len(self.c), len(other.c))
        return UPoly([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return UPoly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-_up(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _up(other)
        if self.is_zero() or other.is_zero():
            return UPoly()
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if not a:
                continue
            for j, b in enumerate(other.c):
                out[i + j] += a * b
        return UPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def __divmod__(self, other):
        other = _up(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(0, len(self.c) - len(other.c) + 1)
        r = list(self.c)
        d = other.degree()
        lead = other.lead()
        while len(r) - 1 >= d and any(r):
            while r and not r[-1]:
                r.pop()
            if len(r) - 1 < d:
                break
            k = len(r) - 1 - d
            f = r[-1] / lead
            q[k] = f
            for i in range(d + 1):
                r[k + i] -= f * other.c[i]
        return UPoly(q), UPoly(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        return self.c == _up(other).c

    def derivative(self) -> "UPoly":
        return UPoly([i * x for i, x in enumerate(self.c)][1:])

    def evaluate(self, v):
        out = 0
        for x in reversed(self.c):
            out = out * v + x
        return out

    def shift(self, c: Fraction) -> "UPoly":
        """Taylor re-expansion around z = c: returns p(z + c)."""
        out = UPoly()
        zc = UPoly([as_fraction(c), 1])
        for x in reversed(self.c):
            out = out * zc + UPoly([x])
        return out

    def monic(self) -> "UPoly":
        if self.is_zero():
            return self
        l = self.lead()
        return UPoly([x / l for x in self.c])

    def gcd(self, other: "UPoly") -> "UPoly":
        a, b = self, _up(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def squarefree_part(self) -> "UPoly":
        if self.degree() <= 0:
            return self.monic()
        return (self // self.gcd(self.derivative())).monic()

    def rational_roots(self) -> list[Fraction]:
        """All rational roots, without multiplicity."""
        if self.is_zero():
            raise ValueError("zero polynomial has every root")
        p = self.squarefree_part()
        den = 1
        for x in p.c:
            den = den * x.denominator // _gcd(den, x.denominator)
        ints = [int(x * den) for x in p.c]
        while ints and ints[0] == 0:
            ints.pop(0)
            # z = 0 handled below via evaluate
        roots = []
        if self.evaluate(Fraction(0)) == 0:
            roots.append(Fraction(0))
        if not ints:
            return roots
        a0, an = abs(ints[0]), abs(ints[-1])
        for pn in _divisors(a0):
            for qn in _divisors(an):
                for cand in (Fraction(pn, qn), Fraction(-pn, qn)):
                    if cand not in roots and self.evaluate(cand) == 0:
                        roots.append(cand)
        return sorted(roots)

    def root_multiplicity(self, r: Fraction) -> int:
        m, p = 0, self
        lin = UPoly([-as_fraction(r), 1])
        while not p.is_zero():
            q, rem = divmod(p, lin)
            if not rem.is_zero():
                break
            m, p = m + 1, q
        return m

    def __str__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{x}*z^{i}" if i else str(x)
                          for i, x in enumerate(self.c) if x)

    __repr__ = __str__


def _up(x) -> UPoly:
    if isinstance(x, UPoly):
        return x
    return UPoly([x])


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        return [1]
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


class URational:
    """Quotient of two UPoly, normalized by gcd and monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: UPoly, den: UPoly | None = None):
        den = den if den is not None else UPoly([1])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = num.gcd(den)
        if g.degree() > 0:
            num, den = num // g, den // g
        l = den.lead()
        if l != 1 and not den.is_zero():
            num = num * UPoly([1 / l])
            den = den * UPoly([1 / l])
        self.num, self.den = num, den

    def __add__(self, other):
        other = _ur(other)
        return URational(self.num * other.den + other.num * self.den,
                         self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return URational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_ur(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _ur(other)
        return URational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _ur(other)
        return URational(self.num * other.den, self.den * other.num)

    def derivative(self) -> "URational":
        return URational(self.num.derivative() * self.den
                         - self.num * self.den.derivative(),
                         self.den * self.den)

    def evaluate(self, v):
        return self.num.evaluate(v) / self.den.evaluate(v)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def order_at_infinity(self) -> int:
        """deg(den) - deg(num); the order of vanishing at infinity."""
        if self.num.is_zero():
            raise ValueError("zero function has no defined order")
        return self.den.degree() - self.num.degree()

    def local_expansion(self, c: Fraction, count: int) -> tuple[int, list[Fraction]]:
        """Leading `count` Laurent coefficients at z = c; returns (val, coeffs)."""
        num = self.num.shift(c)
        den = self.den.shift(c)
        vn = _valuation(num)
        vd = _valuation(den)
        val = vn - vd
        # series division of shifted num/den
        ncs = [num[vn + i] for i in range(count + 4)]
        dcs = [den[vd + i] for i in range(count + 4)]
        out = []
        for i in range(count):
            acc = ncs[i] if i < len(ncs) else Fraction(0)
            for j in range(i):
                acc -= out[j] * dcs[i - j]
            out.append(acc / dcs[0])
        return val, out

    def __str__(self):
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def _ur(x) -> URational:
    if isinstance(x, URational):
        return x
    if isinstance(x, UPoly):
        return URational(x)
    return URational(UPoly([x]))


def _valuation(p: UPoly) -> int:
    for i, x in enumerate(p.c):
        if x:
            return i
    raise ValueError("zero polynomial")
