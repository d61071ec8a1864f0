"""Exact multivariate polynomials over Q and the polynomial Poisson bracket.

Everything in this module is rational arithmetic on ``fractions.Fraction``
coefficients; no floating point enters anywhere.  Values are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction, str]


class ExactError(Exception):
    """Base error for the exact-arithmetic kernel."""


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _merge_symbols(a: Sequence[str], b: Sequence[str]) -> tuple[str, ...]:
    return tuple(sorted(set(a) | set(b)))


class ParamPoly:
    """Polynomial in named parameter symbols with Fraction coefficients.

    ``symbols`` is a sorted tuple of names; ``terms`` maps exponent tuples
    (one entry per symbol) to nonzero Fraction coefficients.  Zero
    coefficients are never stored.  Negative exponents are admitted so that
    declared-nonvanishing parameter monomials stay invertible (the ring is
    Laurent in the parameters); ordinary constructions never produce them.
    """

    __slots__ = ("symbols", "terms")

    def __init__(self, symbols: Sequence[str], terms: Mapping[tuple, Fraction]):
        symbols = tuple(symbols)
        if list(symbols) != sorted(set(symbols)):
            raise ExactError(f"symbols must be sorted and unique, got {symbols}")
        self.symbols = symbols
        clean = {}
        for expo, coeff in terms.items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != len(symbols):
                raise ExactError("exponent arity does not match symbol table")
            c = as_fraction(coeff)
            if c:
                clean[expo] = clean.get(expo, Fraction(0)) + c
                if not clean[expo]:
                    del clean[expo]
        self.terms = clean

    # -- constructors ----------------------------------------------------

    @classmethod
    def constant(cls, value: Scalar, symbols: Sequence[str] = ()) -> "ParamPoly":
        c = as_fraction(value)
        symbols = tuple(sorted(set(symbols)))
        if not c:
            return cls(symbols, {})
        return cls(symbols, {(0,) * len(symbols): c})

    @classmethod
    def variable(cls, name: str) -> "ParamPoly":
        return cls((name,), {(1,): Fraction(1)})

    @classmethod
    def zero(cls, symbols: Sequence[str] = ()) -> "ParamPoly":
        return cls(tuple(sorted(set(symbols))), {})

    @classmethod
    def monomial(cls, symbols: Sequence[str], exps: Mapping[str, int],
                 coeff: Scalar = 1) -> "ParamPoly":
        symbols = tuple(sorted(set(symbols) | set(exps)))
        expo = tuple(exps.get(s, 0) for s in symbols)
        return cls(symbols, {expo: as_fraction(coeff)})

    # -- alignment --------------------------------------------------------

    def map_symbols(self, symbols: Sequence[str]) -> "ParamPoly":
        """Re-express on a superset symbol table."""
        symbols = tuple(symbols)
        if symbols == self.symbols:
            return self
        if not set(self.symbols) <= set(symbols):
            raise ExactError("target symbol table must contain existing symbols")
        pos = [symbols.index(s) for s in self.symbols]
        terms = {}
        for expo, c in self.terms.items():
            new = [0] * len(symbols)
            for p, e in zip(pos, expo):
                new[p] = e
            terms[tuple(new)] = c
        return ParamPoly(symbols, terms)

    def _aligned(self, other) -> tuple["ParamPoly", "ParamPoly"]:
        if isinstance(other, (int, Fraction)):
            other = ParamPoly.constant(other, self.symbols)
        if not isinstance(other, ParamPoly):
            return NotImplemented, NotImplemented
        if self.symbols == other.symbols:
            return self, other
        merged = _merge_symbols(self.symbols, other.symbols)
        return self.map_symbols(merged), other.map_symbols(merged)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        a, b = self._aligned(other)
        if a is NotImplemented:
            return NotImplemented
        terms = dict(a.terms)
        for expo, c in b.terms.items():
            terms[expo] = terms.get(expo, Fraction(0)) + c
        return ParamPoly(a.symbols, terms)

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly(self.symbols, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        a, b = self._aligned(other)
        if a is NotImplemented:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_fraction(other)
            return ParamPoly(self.symbols,
                             {e: c * v for e, v in self.terms.items()})
        a, b = self._aligned(other)
        if a is NotImplemented:
            return NotImplemented
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                expo = tuple(x + y for x, y in zip(e1, e2))
                terms[expo] = terms.get(expo, Fraction(0)) + c1 * c2
        return ParamPoly(a.symbols, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ExactError("ParamPoly powers must be non-negative integers")
        result = ParamPoly.constant(1, self.symbols)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_fraction(other)
            if not c:
                raise ZeroDivisionError("division of ParamPoly by zero scalar")
            return self * (Fraction(1) / c)
        raise ExactError("ParamPoly division is restricted to nonzero scalars")

    # -- calculus and evaluation -------------------------------------------

    def differentiate(self, symbol: str) -> "ParamPoly":
        if symbol not in self.symbols:
            return ParamPoly.zero(self.symbols)
        i = self.symbols.index(symbol)
        terms = {}
        for expo, c in self.terms.items():
            if expo[i] == 0:
                continue
            new = list(expo)
            new[i] -= 1
            terms[tuple(new)] = terms.get(tuple(new), Fraction(0)) + c * expo[i]
        return ParamPoly(self.symbols, terms)

    def substitute(self, assignments: Mapping[str, "ParamPoly | Scalar"]) -> "ParamPoly":
        """Substitute some symbols by polynomials or exact scalars."""
        keep = [s for s in self.symbols if s not in assignments]
        extra: set[str] = set(keep)
        lifted: dict[str, ParamPoly] = {}
        for s, val in assignments.items():
            if s not in self.symbols:
                continue
            if not isinstance(val, ParamPoly):
                val = ParamPoly.constant(as_fraction(val))
            lifted[s] = val
            extra |= set(val.symbols)
        universe = tuple(sorted(extra))
        result = ParamPoly.zero(universe)
        for expo, c in self.terms.items():
            term = ParamPoly.constant(c, universe)
            for s, e in zip(self.symbols, expo):
                if e == 0:
                    continue
                if s in lifted:
                    val = lifted[s]
                    if e < 0:
                        # only exact scalar values can absorb a Laurent exponent
                        term = term * (val.constant_value() ** e)
                    else:
                        term = term * val ** e
                else:
                    term = term * ParamPoly.monomial(universe, {s: e})
            result = result + term
        return result

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Numeric evaluation; all symbols must be assigned."""
        missing = [s for s in self.symbols if s not in values]
        if missing and self.terms and any(
                e[self.symbols.index(s)] for s in missing for e in self.terms):
            raise ExactError(f"unassigned symbols {missing}")
        total = 0
        for expo, c in self.terms.items():
            prod = 1
            for s, e in zip(self.symbols, expo):
                if e:
                    prod = prod * values[s] ** e
            total = total + c * prod
        return total

    def evaluate_exact(self, values: Mapping[str, Scalar]) -> Fraction:
        out = self.substitute({s: as_fraction(values[s]) for s in self.symbols})
        return out.constant_value()

    # -- queries -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in expo) for expo in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ExactError(f"{self} is not constant")
        return next(iter(self.terms.values()))

    def degree(self, symbol: str | None = None) -> int:
        """Total degree, or degree in one symbol; zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if symbol is None:
            return max(sum(e) for e in self.terms)
        if symbol not in self.symbols:
            return 0
        i = self.symbols.index(symbol)
        return max(e[i] for e in self.terms)

    def coefficient_of(self, symbol: str, power: int) -> "ParamPoly":
        """Coefficient of symbol**power, as a polynomial in the rest."""
        if symbol not in self.symbols:
            return self if power == 0 else ParamPoly.zero(self.symbols)
        i = self.symbols.index(symbol)
        rest = tuple(s for s in self.symbols if s != symbol)
        terms = {}
        for expo, c in self.terms.items():
            if expo[i] != power:
                continue
            new = tuple(e for j, e in enumerate(expo) if j != i)
            terms[new] = terms.get(new, Fraction(0)) + c
        return ParamPoly(rest, terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ParamPoly.constant(other, self.symbols)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        a, b = self._aligned(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash((self.symbols, frozenset(self.terms.items())))

    # -- printing --------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for expo in sorted(self.terms, key=lambda e: (sum(e), e)):
            c = self.terms[expo]
            factors = []
            for s, e in zip(self.symbols, expo):
                if e == 1:
                    factors.append(s)
                elif e > 1:
                    factors.append(f"{s}^{e}")
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"ParamPoly({self})"


def poly(expr: Scalar | ParamPoly, symbols: Sequence[str] = ()) -> ParamPoly:
    """Lift an exact scalar to a ParamPoly, or pass one through."""
    if isinstance(expr, ParamPoly):
        return expr
    return ParamPoly.constant(expr, symbols)


class ExactRatio:
    """Exact quotient of two ParamPoly; equality by cross-multiplication.

    No gcd reduction is attempted; all comparisons and arithmetic stay in
    cleared (cross-multiplied) form.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: ParamPoly, den: ParamPoly):
        num = poly(num)
        den = poly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = num, den

    @classmethod
    def lift(cls, x) -> "ExactRatio":
        if isinstance(x, ExactRatio):
            return x
        if isinstance(x, ParamPoly):
            return cls(x, ParamPoly.constant(1))
        return cls(ParamPoly.constant(as_fraction(x)), ParamPoly.constant(1))

    def __add__(self, other):
        o = ExactRatio.lift(other)
        return ExactRatio(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return ExactRatio(-self.num, self.den)

    def __sub__(self, other):
        return self + (-ExactRatio.lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = ExactRatio.lift(other)
        return ExactRatio(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __eq__(self, other):
        o = ExactRatio.lift(other)
        return self.num * o.den == self.den * o.num

    def is_constant(self) -> bool:
        if self.num.is_zero():
            return True
        try:
            c = _constant_ratio(self.num, self.den)
        except ExactError:
            return False
        return c is not None

    def constant_value(self) -> Fraction:
        if self.num.is_zero():
            return Fraction(0)
        c = _constant_ratio(self.num, self.den)
        if c is None:
            raise ExactError(f"{self} is not a constant ratio")
        return c

    def evaluate_exact(self, values) -> Fraction:
        return self.num.evaluate_exact(values) / self.den.evaluate_exact(values)

    def __str__(self):
        return f"({self.num}) / ({self.den})"

    __repr__ = __str__


def _constant_ratio(num: ParamPoly, den: ParamPoly) -> Fraction | None:
    """c with num = c * den, or None."""
    if den.is_constant():
        d = den.constant_value()
        out = num * (Fraction(1) / d)
        return out.constant_value() if out.is_constant() else None
    merged = _merge_symbols(num.symbols, den.symbols)
    n, d = num.map_symbols(merged), den.map_symbols(merged)
    expo, lead = next(iter(d.terms.items()))
    cand = n.terms.get(expo)
    if cand is not None and n == d * (cand / lead):
        return cand / lead
    return None


# -- phase-space polynomials and the Poisson bracket ---------------------------

CanonicalPairs = tuple[tuple[str, str], ...]

DEFAULT_PAIRS: CanonicalPairs = (("q1", "p1"), ("q2", "p2"))


class PhasePoly(ParamPoly):
    """ParamPoly whose symbols include declared canonical (q, p) pairs.

    Canonical variables are distinguished from mere parameters so that the
    Poisson bracket differentiates only with respect to them.
    """

    __slots__ = ("pairs",)

    def __init__(self, symbols, terms, pairs: CanonicalPairs = DEFAULT_PAIRS):
        super().__init__(symbols, terms)
        for q, p in pairs:
            if q not in self.symbols or p not in self.symbols:
                raise ExactError(f"canonical pair ({q},{p}) missing from symbols")
        self.pairs = tuple(pairs)

    @classmethod
    def from_poly(cls, p: ParamPoly, pairs: CanonicalPairs = DEFAULT_PAIRS) -> "PhasePoly":
        canon = {name for pair in pairs for name in pair}
        symbols = tuple(sorted(set(p.symbols) | canon))
        return cls(symbols, p.map_symbols(symbols).terms, pairs)

    @classmethod
    def build(cls, expr: ParamPoly | Scalar, pairs: CanonicalPairs = DEFAULT_PAIRS) -> "PhasePoly":
        return cls.from_poly(poly(expr), pairs)


def phase_vars(pairs: CanonicalPairs = DEFAULT_PAIRS) -> dict[str, PhasePoly]:
    """The canonical coordinate polynomials themselves, keyed by name."""
    names = [name for pair in pairs for name in pair]
    return {n: PhasePoly.from_poly(ParamPoly.variable(n), pairs) for n in names}


def poisson_bracket(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    """{f, g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i, exactly."""
    if not isinstance(f, PhasePoly) or not isinstance(g, PhasePoly):
        raise ExactError("poisson_bracket requires PhasePoly operands")
    if f.pairs != g.pairs:
        raise ExactError(
            f"mismatched canonical variables: {f.pairs} vs {g.pairs}")
    total = ParamPoly.zero()
    for q, p in f.pairs:
        total = total + f.differentiate(q) * g.differentiate(p) \
                      - f.differentiate(p) * g.differentiate(q)
    return PhasePoly.from_poly(total, f.pairs)
