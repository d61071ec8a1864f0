"""Higher-order variational equations along the double-Lame system.

The scaled minimal-coupling system, written in product coordinates, has
first variational equations that split into two Lame equations
``v'' = (A_i wp + B_i) v`` with A1 = 6, B1 = 2k and A2 = n(n+1),
B2 = (2/3) k (n^2 + n - 3), where wp is built from the scale-factor branch
at energy E (g2 = 16/3 (k^2 - 3E), g3 = 32/27 k (2k^2 - 9E)).

Higher orders are solved by variation of constants,
``w^(j) = X int X^{-1} f_j``, with the inhomogeneities f_j generated
automatically from epsilon-jets of the vector field.  A nonzero eta^{-1}
coefficient in any component of X^{-1} f_j forces a logarithm in w^(j) and
obstructs an Abelian identity component, hence integrability.

Everything is exact: series coefficients are polynomials in (k, E) over Q.

Coordinate note: the system is taken in a rescaled frame (w1, w2 carry a
factor 1/sqrt(2) relative to the raw product coordinates) so that every
series coefficient stays rational.  Components 3 and 4, the ones carrying
the obstruction residues, are identical in both frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .exact import (
    ExactError,
    LaurentSeries,
    ParamPoly,
    TruncationError,
    as_fraction,
    poly,
    wp_series,
)

Jet = dict[int, LaurentSeries]  # epsilon order -> series coefficient


def _param(value, name: str) -> ParamPoly:
    """'sym' -> the named symbol; otherwise an exact rational constant."""
    if isinstance(value, ParamPoly):
        return value
    if value == "sym" or value is None:
        return ParamPoly.variable(name)
    return ParamPoly.constant(as_fraction(value))


def branch_invariants(k: ParamPoly, energy: ParamPoly) -> tuple[ParamPoly, ParamPoly]:
    """g2, g3 of the scale-factor branch of the scaled minimal system."""
    g2 = (k * k - 3 * energy) * Fraction(16, 3)
    g3 = k * (2 * k * k - 9 * energy) * Fraction(32, 27)
    return g2, g3


def lame_frobenius(A: Fraction, B: ParamPoly, wp: LaurentSeries,
                   rho: int, lead: Fraction, order: int) -> LaurentSeries:
    """Frobenius solution of v'' = (A wp + B) v with exponent rho at 0.

    The wp series is even, so the solution proceeds in steps of two and the
    recursion never meets a resonance for the exponent pairs used here
    (differences are odd integers).
    """
    cs: dict[int, ParamPoly] = {d: c for d, c in wp.terms() if d >= 2}
    coeffs: dict[int, ParamPoly] = {0: ParamPoly.constant(lead)}
    for m in range(2, order - rho + 1, 2):
        denom = Fraction((rho + m) * (rho + m - 1)) - A
        if denom == 0:
            raise ExactError(f"resonance at step {m} for exponent {rho}")
        acc = B * coeffs.get(m - 2, ParamPoly.zero())
        for two_i in range(2, m - 1, 2):
            prev = coeffs.get(m - 2 - two_i)
            if prev is not None and two_i in cs:
                acc = acc + cs[two_i] * prev * A
        coeffs[m] = acc * (Fraction(1) / denom)
    terms = {rho + m: c for m, c in coeffs.items()}
    return LaurentSeries.from_terms(terms, order, wp.var)


@dataclass(frozen=True)
class FundamentalSystem:
    """Exact fundamental solutions of the double-Lame first variational system."""

    n: int
    order: int
    k: ParamPoly
    energy: ParamPoly
    wp: LaurentSeries
    v1: LaurentSeries
    v2: LaurentSeries
    v3: LaurentSeries
    v4: LaurentSeries

    @property
    def solutions(self) -> tuple[LaurentSeries, ...]:
        return (self.v1, self.v2, self.v3, self.v4)

    def wronskians(self) -> tuple[LaurentSeries, LaurentSeries]:
        w12 = self.v1 * self.v2.differentiate() - self.v1.differentiate() * self.v2
        w34 = self.v3 * self.v4.differentiate() - self.v3.differentiate() * self.v4
        return w12, w34


def fundamental_series(n: int, order: int | None = None,
                       k="sym", energy="sym") -> FundamentalSystem:
    """Fundamental matrix series v1..v4 for index n, exact in (k, E)."""
    if not isinstance(n, int) or n < 1:
        raise ExactError("the Lame index n must be a positive integer")
    if order is None:
        order = 3 * n + 18
    if order < n + 5:
        raise ExactError("order too small to hold three terms per series")
    kp = _param(k, "k")
    ep = _param(energy, "E")
    g2, g3 = branch_invariants(kp, ep)
    # v4 runs from eta^{-n}, so its recursion consumes wp terms past `order`
    wp = wp_series(g2, g3, order + n + 4)
    B1 = 2 * kp
    B2 = kp * Fraction(2 * (n * n + n - 3), 3)
    v1 = lame_frobenius(Fraction(6), B1, wp, 3, Fraction(1), order)
    v2 = lame_frobenius(Fraction(6), B1, wp, -2, Fraction(-1, 5), order)
    v3 = lame_frobenius(Fraction(n * (n + 1)), B2, wp, n + 1, Fraction(1), order)
    v4 = lame_frobenius(Fraction(n * (n + 1)), B2, wp, -n, Fraction(-1, 2 * n + 1), order)
    return FundamentalSystem(n, order, kp, ep, wp, v1, v2, v3, v4)


# -- epsilon-jet arithmetic ------------------------------------------------

def _jadd(a: Jet, b: Jet) -> Jet:
    out = dict(a)
    for o, s in b.items():
        out[o] = out[o] + s if o in out else s
    return out


def _jneg(a: Jet) -> Jet:
    return {o: -s for o, s in a.items()}


def _jscale(a: Jet, c) -> Jet:
    return {o: s.scalar_mul(c) for o, s in a.items()}


def _jmul(a: Jet, b: Jet, J: int) -> Jet:
    out: Jet = {}
    for oa, sa in a.items():
        for ob, sb in b.items():
            o = oa + ob
            if o > J:
                continue
            prod = sa * sb
            out[o] = out[o] + prod if o in out else prod
    return out


def _jpow(a: Jet, n: int, J: int) -> Jet:
    acc = a
    for _ in range(n - 1):
        acc = _jmul(acc, a, J)
    return acc


def _jinv_pow(a: Jet, power: int, J: int) -> Jet:
    """(sum_o eps^o a_o)^{-power} for a jet whose order-0 part is a unit series."""
    base = a[0].invert()
    rest = {o: s for o, s in a.items() if o != 0}
    if not rest:
        return {0: _series_pow(base, power)}
    x = _jmul({0: base}, rest, J)       # strictly positive epsilon orders
    geom: Jet = {0: _one_like(base)}
    term: Jet = {0: _one_like(base)}
    depth = J // min(x) if x else 0
    for _ in range(depth):
        term = _jneg(_jmul(term, x, J))
        geom = _jadd(geom, term)
    inv = _jmul(geom, {0: base}, J)
    return _jpow(inv, power, J)


def _series_pow(s: LaurentSeries, n: int) -> LaurentSeries:
    acc = s
    for _ in range(n - 1):
        acc = acc * s
    return acc


def _one_like(s: LaurentSeries) -> LaurentSeries:
    return LaurentSeries.from_terms({0: 1}, s.trunc + max(0, -s.min_deg), s.var)


def _vector_field_jets(w: Sequence[Jet], kp: ParamPoly, b: ParamPoly, J: int) -> list[Jet]:
    """Jets of the rescaled product-coordinate vector field at a jet state."""
    w1, w2, w3, w4 = w
    cross = _jadd(_jmul(w1, w4, J), _jneg(_jmul(w2, w3, J)))   # w1 w4 - w2 w3
    cross2 = _jmul(cross, cross, J)
    w1_3 = _jpow(w1, 3, J)
    w3_2 = _jmul(w3, w3, J)
    inv3 = _jinv_pow(w1, 3, J)
    inv4 = _jinv_pow(w1, 4, J)

    W1 = w2
    W2 = _jadd(
        _jadd(_jscale(w1, -2 * kp), _jscale(w1_3, Fraction(2))),
        _jadd(_jscale(_jmul(w1, w3_2, J), 4 * b),
              _jscale(_jmul(cross2, inv3, J), Fraction(-2))))
    W3 = w4
    inner = _jadd(
        _jadd({0: LaurentSeries.from_terms({0: -2 * kp}, _default_trunc(w), "eta")},
              _jscale(_jmul(w1, w1, J), 2 - b)),
        _jadd(_jscale(w3_2, 4 * b),
              _jscale(_jmul(cross2, inv4, J), Fraction(-2))))
    W4 = _jmul(w3, inner, J)
    return [W1, W2, W3, W4]


def _default_trunc(w: Sequence[Jet]) -> int:
    ts = [s.trunc for jet in w for s in jet.values()]
    return max(ts) if ts else 0


@dataclass(frozen=True)
class Obstruction:
    """First variational order whose local solution picks up a logarithm."""

    order: int
    component: int                 # 1-based index into X^{-1} f_j
    residue: ParamPoly
    residues: tuple[ParamPoly, ...]
    integrand: tuple[LaurentSeries, ...]


class HveChain:
    """Carries w^(1), w^(2), ... along the scale-factor branch.

    The seed w^(1) is the decaying normal solution (0, 0, v4, v4') by
    default; all homogeneous additions at higher orders are zero.
    """

    def __init__(self, n: int, order: int | None = None, k="sym", energy="sym",
                 seed: str = "v4"):
        if order is None:
            order = 4 * n + 30
        self.fs = fundamental_series(n, order, k, energy)
        self.n = n
        kp, ep = self.fs.k, self.fs.energy
        self.kp, self.ep = kp, ep
        self.b = ParamPoly.constant(Fraction(2 - n * (n + 1)))
        # branch in rescaled coordinates: w1 = sqrt(wp + 2k/3), w2 = w1'
        rho2 = self.fs.wp + kp * Fraction(2, 3)
        rho = rho2.sqrt()
        self.rho = rho
        self.phi: list[Jet] = [{0: rho}, {0: rho.differentiate()}, {}, {}]
        if seed == "v4":
            s, sd = self.fs.v4, self.fs.v4.differentiate()
        elif seed == "v3":
            s, sd = self.fs.v3, self.fs.v3.differentiate()
        else:
            raise ExactError("seed must be 'v4' or 'v3'")
        self.w: dict[int, list[Jet]] = {1: [{}, {}, {1: s}, {1: sd}]}
        self._integrands: dict[int, tuple[LaurentSeries, ...]] = {}

    def _state_jet(self, upto: int) -> list[Jet]:
        state = [dict(j) for j in self.phi]
        for i in range(1, upto + 1):
            for comp in range(4):
                state[comp] = _jadd(state[comp], self.w[i][comp])
        return state

    def integrand(self, j: int) -> tuple[LaurentSeries, ...]:
        """X^{-1} f_j as four exact series (zero components included)."""
        if j < 2:
            raise ExactError("inhomogeneities start at order 2")
        if j in self._integrands:
            return self._integrands[j]
        for i in range(2, j):
            if i not in self.w:
                self.advance(i)
        state = self._state_jet(j - 1)
        rhs = _vector_field_jets(state, self.kp, self.b, j)
        f = [rhs[c].get(j) for c in range(4)]
        fs = self.fs
        v1, v2, v3, v4 = fs.v1, fs.v2, fs.v3, fs.v4
        d1, d2, d3, d4 = (v.differentiate() for v in (v1, v2, v3, v4))
        zero = LaurentSeries.zero("eta", fs.order - 4)

        def mul(a, s):
            return zero if s is None else a * s

        g = (
            _addz(mul(d2, f[0]), _negz(mul(v2, f[1]))),
            _addz(_negz(mul(d1, f[0])), mul(v1, f[1])),
            _addz(mul(d4, f[2]), _negz(mul(v4, f[3]))),
            _addz(_negz(mul(d3, f[2])), mul(v3, f[3])),
        )
        g = tuple(zero if s is None else s for s in g)
        self._integrands[j] = g
        return g

    def residues(self, j: int) -> tuple[ParamPoly, ...]:
        return tuple(s.residue() for s in self.integrand(j))

    def advance(self, j: int) -> None:
        """Compute w^(j) (requires residue-free integrands below and at j)."""
        if j in self.w:
            return
        g = self.integrand(j)
        res = [s.residue() for s in g]
        if any(res):
            raise ExactError(
                f"order {j} produces a logarithm (residues {res}); "
                "the chain cannot be continued past an obstruction")
        G = [s.integrate() for s in g]
        fs = self.fs
        v1, v2, v3, v4 = fs.v1, fs.v2, fs.v3, fs.v4
        d1, d2, d3, d4 = (v.differentiate() for v in (v1, v2, v3, v4))
        w1 = _addz(v1 * G[0], v2 * G[1])
        w2 = _addz(d1 * G[0], d2 * G[1])
        w3 = _addz(v3 * G[2], v4 * G[3])
        w4 = _addz(d3 * G[2], d4 * G[3])
        jet = []
        for comp, s in enumerate((w1, w2, w3, w4)):
            jet.append({} if s is None or s.is_zero() else {j: s})
        self.w[j] = jet


def _addz(a, b):
    if a is None or a.is_zero():
        return b
    if b is None or b.is_zero():
        return a
    return a + b


def _negz(a):
    return None if a is None else -a


def hve_integrand(j: int, n: int, order: int | None = None, seed: str = "v4",
                  k="sym", energy="sym") -> tuple[LaurentSeries, ...]:
    """Exact series vector X^{-1} f_j for the index-n double-Lame chain."""
    if j not in (2, 3, 4, 5):
        raise ExactError("supported inhomogeneity orders are 2..5")
    chain = HveChain(n, order, k=k, energy=energy, seed=seed)
    return chain.integrand(j)


def log_obstruction(n: int, k_value="sym", energy_value="sym",
                    max_order: int = 5, order: int | None = None) -> Obstruction | None:
    """First order j <= max_order with a logarithmic obstruction, or None.

    k may be symbolic or one of {-1, 0, 1}; the energy may be symbolic or an
    exact rational.  Residues are reported as polynomials in the symbolic
    parameters.
    """
    if max_order > 5:
        raise ExactError("orders above 5 are untested; extend deliberately")
    sizes = [order] if order is not None else [4 * n + 30, 6 * n + 54]
    last_err: Exception | None = None
    for N in sizes:
        try:
            chain = HveChain(n, N, k=k_value, energy=energy_value)
            for j in range(2, max_order + 1):
                g = chain.integrand(j)
                res = tuple(s.residue() for s in g)
                for comp, r in enumerate(res, start=1):
                    if r:
                        return Obstruction(j, comp, r, res, g)
                chain.advance(j)
            return None
        except TruncationError as exc:   # window too small: retry larger
            last_err = exc
    raise TruncationError(
        f"truncation window too small to expose residues for n={n}: {last_err}")
