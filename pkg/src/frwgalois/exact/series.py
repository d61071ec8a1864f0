"""Truncated Laurent series with exact coefficients and log bookkeeping.

A :class:`LaurentSeries` knows its coefficients exactly for every degree up
to ``trunc`` (inclusive); degrees beyond that are *undefined*, never assumed
zero.  Arithmetic propagates the worst-case window, and an operation whose
result window would be empty raises instead of silently truncating.

Logarithms appear only through term-wise integration of a degree -1 term;
they are carried as a single coefficient (the residue), not as a symbolic
log term.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .poly import ExactError, ParamPoly, as_fraction, poly


class TruncationError(ExactError):
    """A requested coefficient or result window is outside exact knowledge."""


class InversionError(ExactError):
    """Leading coefficient is not a guaranteed unit."""


def _lift(value, symbols=()) -> ParamPoly:
    if isinstance(value, ParamPoly):
        return value
    return ParamPoly.constant(as_fraction(value), symbols)


class LaurentSeries:
    """Truncated Laurent series in one variable with ParamPoly coefficients."""

    __slots__ = ("var", "min_deg", "coeffs", "trunc", "log_coeff")

    def __init__(self, var: str, min_deg: int, coeffs: Sequence, trunc: int,
                 log_coeff: ParamPoly | None = None):
        if trunc < min_deg - 1:
            raise TruncationError(
                f"empty window: min degree {min_deg}, truncation {trunc}")
        self.var = var
        self.min_deg = int(min_deg)
        lifted = [_lift(c) for c in coeffs]
        expect = trunc - min_deg + 1
        if len(lifted) < expect:
            lifted += [ParamPoly.zero()] * (expect - len(lifted))
        elif len(lifted) > expect:
            raise ExactError("more coefficients than the window admits")
        self.coeffs = lifted
        self.trunc = int(trunc)
        self.log_coeff = log_coeff if (log_coeff is not None and bool(log_coeff)) else None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, var: str = "eta", trunc: int = 0, min_deg: int | None = None) -> "LaurentSeries":
        lo = trunc if min_deg is None else min_deg
        return cls(var, lo, [], trunc)

    @classmethod
    def from_terms(cls, terms: Mapping[int, object], trunc: int,
                   var: str = "eta") -> "LaurentSeries":
        if terms:
            lo = min(terms)
            if max(terms) > trunc:
                raise TruncationError("term beyond declared truncation")
        else:
            lo = trunc
        coeffs = [_lift(terms.get(d, 0)) for d in range(lo, trunc + 1)]
        return cls(var, lo, coeffs, trunc)

    @classmethod
    def monomial(cls, degree: int, coeff, trunc: int, var: str = "eta") -> "LaurentSeries":
        return cls.from_terms({degree: coeff}, trunc, var)

    # -- access -----------------------------------------------------------

    def coefficient(self, degree: int) -> ParamPoly:
        """Exact coefficient of var**degree; raises outside the window."""
        if degree > self.trunc:
            raise TruncationError(
                f"degree {degree} beyond truncation {self.trunc}")
        if degree < self.min_deg:
            return ParamPoly.zero()
        return self.coeffs[degree - self.min_deg]

    def residue(self) -> ParamPoly:
        """Coefficient of var**-1 (must lie inside the exact window)."""
        return self.coefficient(-1)

    def terms(self) -> list[tuple[int, ParamPoly]]:
        return [(self.min_deg + i, c) for i, c in enumerate(self.coeffs) if c]

    def has_log(self) -> bool:
        return self.log_coeff is not None

    def is_zero(self) -> bool:
        return not self.terms() and self.log_coeff is None

    def valuation(self) -> int:
        """Degree of the lowest nonzero known term (trunc+1 if none seen)."""
        for d, c in zip(range(self.min_deg, self.trunc + 1), self.coeffs):
            if c:
                return d
        return self.trunc + 1

    def _check_var(self, other: "LaurentSeries"):
        if self.var != other.var:
            raise ExactError(f"variable mismatch: {self.var} vs {other.var}")

    def trim(self) -> "LaurentSeries":
        """Drop leading zero coefficients (tightens min_deg, keeps window)."""
        v = self.valuation()
        if v == self.min_deg:
            return self
        lo = min(v, self.trunc)
        return LaurentSeries(self.var, lo, self.coeffs[lo - self.min_deg:],
                             self.trunc, self.log_coeff)

    def truncate(self, trunc: int) -> "LaurentSeries":
        if trunc > self.trunc:
            raise TruncationError("cannot extend exact knowledge by fiat")
        lo = min(self.min_deg, trunc)
        return LaurentSeries(self.var, lo,
                             self.coeffs[:trunc - self.min_deg + 1],
                             trunc, self.log_coeff)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = LaurentSeries.from_terms({0: other}, self.trunc, self.var)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check_var(other)
        trunc = min(self.trunc, other.trunc)
        lo = min(self.min_deg, other.min_deg)
        if trunc < lo - 1:
            raise TruncationError("sum has empty exact window")
        coeffs = []
        for d in range(lo, trunc + 1):
            a = self.coefficient(d) if d >= self.min_deg else ParamPoly.zero()
            b = other.coefficient(d) if d >= other.min_deg else ParamPoly.zero()
            coeffs.append(a + b)
        log = None
        if self.log_coeff is not None or other.log_coeff is not None:
            log = (self.log_coeff or ParamPoly.zero()) + (other.log_coeff or ParamPoly.zero())
        return LaurentSeries(self.var, lo, coeffs, trunc, log)

    __radd__ = __add__

    def __neg__(self):
        log = -self.log_coeff if self.log_coeff is not None else None
        return LaurentSeries(self.var, self.min_deg, [-c for c in self.coeffs],
                             self.trunc, log)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = LaurentSeries.from_terms({0: other}, self.trunc, self.var)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scalar_mul(self, c) -> "LaurentSeries":
        c = _lift(c)
        log = c * self.log_coeff if self.log_coeff is not None else None
        return LaurentSeries(self.var, self.min_deg,
                             [c * x for x in self.coeffs], self.trunc, log)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            return self.scalar_mul(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check_var(other)
        if self.log_coeff is not None or other.log_coeff is not None:
            raise ExactError("multiplication of log-carrying series is unsupported")
        a, b = self.trim(), other.trim()
        lo = a.min_deg + b.min_deg
        trunc = min(a.trunc + b.min_deg, b.trunc + a.min_deg)
        if trunc < lo - 1:
            raise TruncationError("product has empty exact window")
        n = trunc - lo + 1
        out = [ParamPoly.zero() for _ in range(n)]
        for i, ca in enumerate(a.coeffs):
            if not ca:
                continue
            da = a.min_deg + i
            jmax = min(len(b.coeffs), trunc - da - b.min_deg + 1)
            for j in range(jmax):
                cb = b.coeffs[j]
                if not cb:
                    continue
                out[da + b.min_deg + j - lo] = out[da + b.min_deg + j - lo] + ca * cb
        return LaurentSeries(self.var, lo, out, trunc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentSeries":
        if not isinstance(n, int):
            raise ExactError("series powers must be integers")
        if n < 0:
            return self.invert() ** (-n)
        if n == 0:
            return LaurentSeries.from_terms({0: 1}, self.trunc, self.var)
        # repeated multiplication keeps the window bookkeeping honest
        acc = self
        for _ in range(n - 1):
            acc = acc * self
        return acc

    def invert(self, assume_unit: bool = False) -> "LaurentSeries":
        """Multiplicative inverse; the leading coefficient must be a unit.

        A unit means a nonzero rational constant, or any leading ParamPoly
        explicitly declared nonvanishing via ``assume_unit=True``.
        """
        if self.log_coeff is not None:
            raise ExactError("cannot invert a log-carrying series")
        s = self.trim()
        if s.valuation() > s.trunc:
            raise InversionError("series is zero to truncation; not a unit")
        lead = s.coeffs[0]
        if not lead.is_constant() and not assume_unit:
            raise InversionError(
                f"leading coefficient {lead} is not guaranteed nonzero; "
                "pass assume_unit=True only if it cannot vanish")
        m = s.min_deg
        k = s.trunc - m          # number of known correction terms
        # write s = lead * x^m (1 + u), invert the (1+u) factor iteratively
        inv_lead = _invert_poly_unit(lead, assume_unit)
        u_coeffs = [inv_lead * c for c in s.coeffs[1:]]
        inv = [ParamPoly.constant(1)] + [ParamPoly.zero()] * k
        for d in range(1, k + 1):
            acc = ParamPoly.zero()
            for j in range(1, min(d, len(u_coeffs)) + 1):
                acc = acc + u_coeffs[j - 1] * inv[d - j]
            inv[d] = -acc
        coeffs = [inv_lead * c for c in inv]
        return LaurentSeries(self.var, -m, coeffs, -m + k)

    def sqrt(self) -> "LaurentSeries":
        """Square root when min degree is even and the lead is a rational square."""
        s = self.trim()
        if s.log_coeff is not None:
            raise ExactError("cannot take sqrt of a log-carrying series")
        lead = s.coeffs[0] if s.coeffs else ParamPoly.zero()
        if not lead:
            raise InversionError("sqrt requires a nonzero leading term")
        if s.min_deg % 2:
            raise ExactError("sqrt of odd leading degree is not a Laurent series")
        if not lead.is_constant():
            raise InversionError("sqrt requires a rational leading coefficient")
        c0 = lead.constant_value()
        r0 = _fraction_sqrt(c0)
        m = s.min_deg
        k = s.trunc - m
        inv_lead = ParamPoly.constant(Fraction(1) / c0)
        u = [inv_lead * c for c in s.coeffs[1:]]    # s = c0 x^m (1 + u)
        # (1+u)^(1/2) by the coefficient recursion of y^2 = 1 + u
        y = [ParamPoly.constant(1)] + [ParamPoly.zero()] * k
        for d in range(1, k + 1):
            conv = ParamPoly.zero()
            for j in range(1, d):
                conv = conv + y[j] * y[d - j]
            target = u[d - 1] if d - 1 < len(u) else ParamPoly.zero()
            y[d] = (target - conv) * Fraction(1, 2)
        coeffs = [ParamPoly.constant(r0) * c for c in y]
        return LaurentSeries(self.var, m // 2, coeffs, m // 2 + k)

    # -- calculus ------------------------------------------------------------

    def differentiate(self) -> "LaurentSeries":
        coeffs = {}
        for d, c in zip(range(self.min_deg, self.trunc + 1), self.coeffs):
            if d != 0 and c:
                coeffs[d - 1] = c * d
        if self.log_coeff is not None:
            coeffs[-1] = coeffs.get(-1, ParamPoly.zero()) + self.log_coeff
        if not coeffs:
            return LaurentSeries.zero(self.var, self.trunc - 1)
        return LaurentSeries.from_terms(coeffs, self.trunc - 1, self.var)

    def integrate(self) -> "LaurentSeries":
        """Term-wise antiderivative; a degree -1 term sets the log coefficient."""
        if self.log_coeff is not None:
            raise ExactError("iterated log integration is unsupported")
        coeffs = {}
        log = None
        for d, c in zip(range(self.min_deg, self.trunc + 1), self.coeffs):
            if not c:
                continue
            if d == -1:
                log = c
            else:
                coeffs[d + 1] = c * Fraction(1, d + 1)
        out = LaurentSeries.from_terms(coeffs, self.trunc + 1, self.var)
        return LaurentSeries(out.var, out.min_deg, out.coeffs, out.trunc, log)

    def substitute_power(self, p: int) -> "LaurentSeries":
        """Replace the variable x by x**p (p a positive integer)."""
        if p <= 0:
            raise ExactError("substitute_power requires a positive integer")
        if self.log_coeff is not None:
            raise ExactError("substitute_power on log-carrying series is unsupported")
        terms = {p * d: c for d, c in self.terms()}
        return LaurentSeries.from_terms(terms, p * self.trunc + (p - 1), self.var)

    # -- evaluation and printing ----------------------------------------------

    def evaluate(self, x, params: Mapping[str, complex] | None = None):
        """Numeric evaluation of the truncated polynomial part."""
        params = params or {}
        total = 0.0
        for d, c in self.terms():
            total = total + c.evaluate(params) * x ** d
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        t = min(self.trunc, other.trunc)
        if self.var != other.var:
            return False
        for d in range(min(self.min_deg, other.min_deg), t + 1):
            if self.coefficient(d) != other.coefficient(d):
                return False
        a = self.log_coeff or ParamPoly.zero()
        b = other.log_coeff or ParamPoly.zero()
        return a == b

    def __str__(self) -> str:
        body = ", ".join(f"{d}: {c}" for d, c in self.terms()) or "0"
        log = f"; log: {self.log_coeff}" if self.log_coeff is not None else ""
        return f"[{self.var}] {{{body}}} + O({self.var}^{self.trunc + 1}){log}"

    __repr__ = __str__


def _invert_poly_unit(lead: ParamPoly, assume_unit: bool) -> ParamPoly:
    if lead.is_constant():
        c = lead.constant_value()
        if not c:
            raise InversionError("zero leading coefficient")
        return ParamPoly.constant(Fraction(1) / c)
    if assume_unit and len(lead.terms) == 1:
        # declared-nonvanishing parameter monomial: exact Laurent inverse
        (expo, c), = lead.terms.items()
        return ParamPoly(lead.symbols, {tuple(-e for e in expo): Fraction(1) / c})
    if assume_unit:
        raise InversionError(
            "declared-nonvanishing leading coefficients are invertible only "
            "when monomial; general parameter polynomials have no exact "
            "inverse in this coefficient ring")
    raise InversionError("leading coefficient is not a unit")


def _fraction_sqrt(c: Fraction) -> Fraction:
    if c < 0:
        raise ExactError(f"{c} has no rational square root")
    import math
    rn = math.isqrt(c.numerator)
    rd = math.isqrt(c.denominator)
    if rn * rn != c.numerator or rd * rd != c.denominator:
        raise ExactError(f"{c} is not a perfect rational square")
    return Fraction(rn, rd)


# -- Weierstrass p-function as a formal series ---------------------------------

def wp_coefficients(g2, g3, count: int) -> list[ParamPoly]:
    """Coefficients c_{2m}, m = 1..count, of p = x^-2 + sum c_{2m} x^{2m}.

    c_2 = g2/20, c_4 = g3/28, and the classical quadratic recurrence
    c_{2m} = 3 [(2m+3)(m-2)]^{-1} sum_{j=1}^{m-2} c_{2j} c_{2(m-1-j)}.
    """
    g2 = _lift(g2)
    g3 = _lift(g3)
    cs: list[ParamPoly] = []
    for m in range(1, count + 1):
        if m == 1:
            cs.append(g2 * Fraction(1, 20))
        elif m == 2:
            cs.append(g3 * Fraction(1, 28))
        else:
            acc = ParamPoly.zero()
            for j in range(1, m - 1):
                acc = acc + cs[j - 1] * cs[m - 1 - j - 1]
            cs.append(acc * Fraction(3, (2 * m + 3) * (m - 2)))
    return cs


def wp_series(g2, g3, order: int, var: str = "eta") -> LaurentSeries:
    """Laurent expansion of the Weierstrass p-function about 0, through x**order."""
    if order < 2:
        raise ExactError("wp_series needs order >= 2")
    count = order // 2
    cs = wp_coefficients(g2, g3, count)
    terms: dict[int, ParamPoly] = {-2: ParamPoly.constant(1)}
    for m, c in enumerate(cs, start=1):
        if 2 * m <= order:
            terms[2 * m] = c
    return LaurentSeries.from_terms(terms, order, var)


# -- exact Laurent polynomials (no truncation) ----------------------------------

class LaurentPoly:
    """Exact finite Laurent polynomial in one variable over ParamPoly."""

    __slots__ = ("var", "terms")

    def __init__(self, var: str, terms: Mapping[int, object] | None = None):
        self.var = var
        clean: dict[int, ParamPoly] = {}
        for d, c in (terms or {}).items():
            c = _lift(c)
            if c:
                clean[int(d)] = c
        self.terms = clean

    @classmethod
    def var_power(cls, var: str, d: int, coeff=1) -> "LaurentPoly":
        return cls(var, {d: coeff})

    def __add__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = LaurentPoly(self.var, {0: other})
        if not isinstance(other, LaurentPoly) or other.var != self.var:
            return NotImplemented
        terms = dict(self.terms)
        for d, c in other.terms.items():
            s = terms.get(d, ParamPoly.zero()) + c
            if s:
                terms[d] = s
            elif d in terms:
                del terms[d]
        return LaurentPoly(self.var, terms)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.var, {d: -c for d, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = LaurentPoly(self.var, {0: other})
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            return LaurentPoly(self.var, {d: c * other for d, c in self.terms.items()})
        if not isinstance(other, LaurentPoly) or other.var != self.var:
            return NotImplemented
        terms: dict[int, ParamPoly] = {}
        for d1, c1 in self.terms.items():
            for d2, c2 in other.terms.items():
                terms[d1 + d2] = terms.get(d1 + d2, ParamPoly.zero()) + c1 * c2
        return LaurentPoly(self.var, terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = LaurentPoly(self.var, {0: other})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.var == other.var and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int:
        return min(self.terms) if self.terms else 0

    def max_degree(self) -> int:
        return max(self.terms) if self.terms else 0

    def coefficient(self, d: int) -> ParamPoly:
        return self.terms.get(d, ParamPoly.zero())

    def to_series(self, trunc: int) -> LaurentSeries:
        return LaurentSeries.from_terms(self.terms, trunc, self.var)

    def substitute_series(self, s: LaurentSeries) -> LaurentSeries:
        """Evaluate at a series argument (negative powers via inversion)."""
        degs = sorted(self.terms)
        inv = s.invert() if degs and degs[0] < 0 else None
        result = None
        for d, c in self.terms.items():
            term = (s ** d if d >= 0 else inv ** (-d)).scalar_mul(c)
            result = term if result is None else result + term
        if result is None:
            return LaurentSeries.zero(s.var, s.trunc)
        return result

    def evaluate(self, x, params: Mapping[str, complex] | None = None):
        params = params or {}
        return sum(c.evaluate(params) * x ** d for d, c in self.terms.items())

    def __str__(self):
        if not self.terms:
            return "0"
        parts = [f"({c})*{self.var}^{d}" if d else f"({c})"
                 for d, c in sorted(self.terms.items())]
        return " + ".join(parts)

    __repr__ = __str__
