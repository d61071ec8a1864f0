"""Liouvillian-solvability criteria and structured verdicts.

Each canonical second-order family gets its decision procedure: the
Whittaker integer-pair test, Kimura's classification of the Riemann P
equation (condition A plus the full fifteen-row table), the three-case
Lame classification with the half-integer determinant condition, the
Bessel half-odd-order rule, and the necessary-condition stage of the
Kovacic algorithm for general rational-coefficient equations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import ExactRatio, ParamPoly, QuadExpr, as_fraction, poly
from .exact.poly import ExactError
from .exact.series import wp_coefficients
from .exact.unipoly import UPoly, URational


# -- verdicts -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    """Structured integrability outcome with its certificate trail."""

    status: str                  # Integrable | NonIntegrable | CandidateOpen | Degenerate
    criterion: str
    certificate: dict = field(default_factory=dict)
    scope: str = "all"
    theorem: str | None = None

    def __post_init__(self):
        allowed = {"Integrable", "NonIntegrable", "CandidateOpen", "Degenerate"}
        if self.status not in allowed:
            raise ValueError(f"unknown verdict status {self.status}")
        if self.status == "NonIntegrable" and not self.criterion:
            raise ValueError("NonIntegrable verdicts must carry their criterion")
        if self.status == "CandidateOpen" and not self.criterion:
            raise ValueError("CandidateOpen verdicts must carry the satisfied condition")

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "criterion": self.criterion,
            "certificate": _jsonable(self.certificate),
            "scope": self.scope,
            "theorem": self.theorem,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}" if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, (ParamPoly, QuadExpr)):
        return str(obj)
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    return str(obj)


# -- Whittaker ----------------------------------------------------------------

def whittaker_solvable(kappa, mu) -> bool:
    """Liouvillian iff kappa+mu-1/2 and kappa-mu-1/2 are integers of opposite sign."""
    k = _quad(kappa)
    m = _quad(mu)
    a = k + m - Fraction(1, 2)
    b = k - m - Fraction(1, 2)
    if not (a.is_integer() and b.is_integer()):
        return False
    av, bv = a.rational_value(), b.rational_value()
    return (av > 0 > bv) or (bv > 0 > av)


def _quad(x) -> QuadExpr:
    if isinstance(x, QuadExpr):
        return x
    return QuadExpr(as_fraction(x))


# -- Kimura's classification of the Riemann P equation --------------------------

# Rows of admissible exponent-difference triples (value mod integer shifts,
# up to sign and order); `None` marks the free slot, the last flag tells
# whether the three integer shifts must have even sum.
_KIMURA_TABLE: list[tuple] = [
    ((Fraction(1, 2), Fraction(1, 2), None), False),
    ((Fraction(1, 2), Fraction(1, 3), Fraction(1, 3)), False),
    ((Fraction(2, 3), Fraction(1, 3), Fraction(1, 3)), True),
    ((Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)), False),
    ((Fraction(2, 3), Fraction(1, 4), Fraction(1, 4)), True),
    ((Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)), False),
    ((Fraction(2, 5), Fraction(1, 3), Fraction(1, 3)), True),
    ((Fraction(2, 3), Fraction(1, 5), Fraction(1, 5)), True),
    ((Fraction(1, 2), Fraction(2, 5), Fraction(1, 5)), True),
    ((Fraction(3, 5), Fraction(1, 3), Fraction(1, 5)), True),
    ((Fraction(2, 5), Fraction(2, 5), Fraction(2, 5)), True),
    ((Fraction(2, 3), Fraction(1, 3), Fraction(1, 5)), True),
    ((Fraction(4, 5), Fraction(1, 5), Fraction(1, 5)), True),
    ((Fraction(1, 2), Fraction(2, 5), Fraction(1, 3)), True),
    ((Fraction(3, 5), Fraction(2, 5), Fraction(1, 3)), True),
]


def kimura_solvable(differences: Sequence) -> tuple[bool, str | None]:
    """Decide Liouvillian solvability from the three exponent differences.

    Condition A: some choice of signs makes d1 +- d2 +- d3 an odd integer.
    Condition B: up to order, sign, and integer shifts the triple matches a
    row of the finite table (with the stated parity constraint).

    Returns (solvable, matched condition description).
    """
    if len(differences) != 3:
        raise ValueError("exactly three exponent differences expected")
    ds = [_quad(d) for d in differences]

    for signs in itertools.product((1, -1), repeat=3):
        total = QuadExpr(0)
        for s, d in zip(signs, ds):
            total = total + (d if s > 0 else -d)
        if total.is_odd_integer():
            return True, f"odd-integer combination {signs} -> {total}"

    for row_idx, (row, parity) in enumerate(_KIMURA_TABLE, start=1):
        for perm in itertools.permutations(range(3)):
            for signs in itertools.product((1, -1), repeat=3):
                shifts = []
                ok = True
                for slot, frac in enumerate(row):
                    d = ds[perm[slot]]
                    d = d if signs[slot] > 0 else -d
                    if frac is None:
                        shifts.append(0)
                        continue
                    diff = d - frac
                    if not diff.is_integer():
                        ok = False
                        break
                    shifts.append(int(diff.rational_value()))
                if not ok:
                    continue
                if parity and sum(shifts) % 2:
                    continue
                return True, f"table row {row_idx} via permutation {perm}, signs {signs}"
    return False, None


def kimura_odd_square_test(nine_minus_4b) -> tuple[bool, str | None]:
    """The hypergeometric case with differences (1, 1/2, sqrt(9-4b)/2)."""
    root = QuadExpr.sqrt_rational(nine_minus_4b).scale(Fraction(1, 2))
    return kimura_solvable([QuadExpr(1), QuadExpr(Fraction(1, 2)), root])


# -- Lame classification ---------------------------------------------------------

@dataclass(frozen=True)
class LameClassification:
    case: str                    # Hermite | Brioschi | BaldassarriCandidate | NotSolvable
    n: Fraction | None = None    # normalized index, n >= -1/2
    l: int | None = None         # Brioschi half-integer index, n + 1/2
    determinant: ParamPoly | None = None
    j_invariant: object = None
    note: str = ""


def lame_classify(A, B=None, g2=None, g3=None) -> LameClassification:
    """Three mutually exclusive solvable regimes of v'' = (A wp + B) v.

    Solves A = n(n+1), normalizes by the n -> -n-1 symmetry, and sorts by
    the denominator of n + 1/2: integers give the polynomial-times-theta
    case, half-odd integers the determinant case (the determinant is
    evaluated when B, g2, g3 are supplied), denominators 3, 4, 5 the
    finite-group candidate case.  Anything else has no Liouvillian solution.
    """
    A = as_fraction(A)
    disc = QuadExpr.sqrt_rational(1 + 4 * A)
    if not disc.is_rational():
        return LameClassification("NotSolvable",
                                  note=f"index irrational: 1+4A = {1 + 4 * A}")
    n = (disc.rational_value() - 1) / 2          # representative n >= -1/2
    half = n + Fraction(1, 2)
    den = half.denominator
    if den == 2:
        return LameClassification("Hermite", n=n, note=f"A = n(n+1), n = {n}")
    if den == 1:
        l = int(half)
        if l < 1:
            return LameClassification("NotSolvable", n=n,
                                      note="half-integer index below the admissible range")
        det = None
        if B is not None and g2 is not None and g3 is not None:
            det = brioschi_determinant(l, B, g2, g3)
        return LameClassification("Brioschi", n=n, l=l, determinant=det)
    if den in (3, 4, 5):
        j = None
        if g2 is not None and g3 is not None:
            try:
                j = modular_j(g2, g3)
            except (ZeroDivisionError, ValueError):
                j = None
        return LameClassification("BaldassarriCandidate", n=n, j_invariant=j,
                                  note=f"n + 1/2 = {half}")
    return LameClassification("NotSolvable", n=n,
                              note=f"n + 1/2 = {half} outside every solvable family")


def brioschi_determinant(l: int, B, g2, g3) -> ParamPoly:
    """Half-integer-index solvability obstruction for v'' = ((l^2-1/4) wp + B) v.

    Built from the product-series construction: the second symmetric power
    of the Lame operator has local exponents 1-2l, 1, 1+2l at the pole of
    wp, and the middle Frobenius solution u = eta + a_1 eta^3 + ... meets a
    resonance at step l.  Eliminating a_1 .. a_{l-1} from the band system

        8 j (j^2 - l^2) a_j = 4 B (2j-1) a_{j-1}
                              + (4 l^2 - 1) sum_i c_{2i} (2j-i-1) a_{j-1-i}

    (c_{2i} the wp coefficients, a_0 = 1) leaves the determinant condition:
    the right side at the resonant step j = l must vanish for the family of
    finite solutions to exist.  The returned polynomial is that obstruction;
    its vanishing locus is the classical determinant's (normalization is a
    single nonzero rational per l).
    """
    if not isinstance(l, int) or l < 1:
        raise ValueError("the half-integer index l must be a positive integer")
    Bp = poly(B) if not isinstance(B, ParamPoly) else B
    A4 = Fraction(4 * l * l - 1)                     # 4*A with A = l^2 - 1/4
    cs = wp_coefficients(g2, g3, max(l, 1))          # c_2, c_4, ...
    a: list[ParamPoly] = [ParamPoly.constant(1)]
    for j in range(1, l + 1):
        rhs = Bp * Fraction(4 * (2 * j - 1)) * a[j - 1]
        for i in range(1, j):
            rhs = rhs + cs[i - 1] * a[j - 1 - i] * (A4 * Fraction(2 * j - i - 1))
        if j == l:
            return rhs
        r = Fraction(8 * j * (j * j - l * l))
        a.append(rhs * (Fraction(1) / r))
    raise AssertionError("unreachable")


# -- modular invariant -------------------------------------------------------------

def modular_j(g2, g3):
    """j = g2^3 / (g2^3 - 27 g3^2); exact rational, or a ratio of polynomials."""
    g2p = poly(g2) if not isinstance(g2, ParamPoly) else g2
    g3p = poly(g3) if not isinstance(g3, ParamPoly) else g3
    num = g2p ** 3
    den = num - g3p ** 2 * 27
    if den.is_zero():
        raise ZeroDivisionError("degenerate invariants: g2^3 = 27 g3^2")
    if num.is_constant() and den.is_constant():
        return num.constant_value() / den.constant_value()
    return ExactRatio(num, den)


# -- Bessel ------------------------------------------------------------------------

def bessel_liouvillian(order) -> bool:
    """Bessel's equation has Liouvillian solutions iff the order is half-odd."""
    o = _quad(order)
    shifted = o - Fraction(1, 2)
    return shifted.is_integer()


# -- Kovacic necessary conditions ----------------------------------------------------

@dataclass(frozen=True)
class KovacicCase:
    case: int
    possible: bool
    reason: str
    degrees: tuple = ()


@dataclass(frozen=True)
class KovacicReport:
    r: URational
    poles: tuple                  # ((root, order) ...), rational poles only
    unresolved_poles: bool        # denominator factors without rational roots
    order_at_infinity: int
    cases: tuple[KovacicCase, KovacicCase, KovacicCase]

    def all_excluded(self) -> bool:
        return not any(c.possible for c in self.cases)

    def to_json(self) -> dict:
        return {
            "order_at_infinity": self.order_at_infinity,
            "poles": [[_jsonable(r), m] for r, m in self.poles],
            "unresolved_poles": self.unresolved_poles,
            "cases": [{"case": c.case, "possible": c.possible,
                       "reason": c.reason, "degrees": _jsonable(list(c.degrees))}
                      for c in self.cases],
        }


def normal_form_r(a: UPoly, b: UPoly, c: UPoly) -> URational:
    """r with u'' = r u equivalent to a y'' + b y' + c y = 0 (y = u e^{-1/2 int b/a})."""
    p = URational(b, a)
    q = URational(c, a)
    return p * p * Fraction(1, 4) + p.derivative() * Fraction(1, 2) - q


def kovacic_necessary(ode_or_a, b: UPoly | None = None, c: UPoly | None = None) -> KovacicReport:
    """Necessary-condition stage of the Kovacic algorithm for a y'' + b y' + c y = 0.

    Per case: either "excluded", with the singularity-order obstruction or
    the absence of a non-negative integer candidate degree, or "possible"
    with the surviving candidate degrees.  No certificate construction.
    Accepts a LinearODE2-like object (with coefficient_upolys()) or the
    three coefficient polynomials directly.
    """
    if b is None:
        a, b, c = ode_or_a.coefficient_upolys()
    else:
        a = ode_or_a
    r = normal_form_r(a, b, c)
    if r.is_zero():
        inf_order = 10 ** 6
        poles: list = []
        unresolved = False
    else:
        inf_order = r.order_at_infinity()
        den = r.den
        roots = den.rational_roots()
        poles = [(root, den.root_multiplicity(root)) for root in roots]
        known = UPoly([1])
        for root, m in poles:
            known = known * UPoly([-root, 1]) ** m
        unresolved = (den // known).degree() > 0

    case1 = _kovacic_case1(r, poles, inf_order, unresolved)
    case2 = _kovacic_case2(r, poles, inf_order, unresolved)
    case3 = _kovacic_case3(r, poles, inf_order, unresolved)
    return KovacicReport(r, tuple(poles), unresolved, inf_order, (case1, case2, case3))


def _pole_coeff(r: URational, root: Fraction, power: int) -> Fraction:
    """Coefficient of (z-root)^{-power} in the Laurent expansion of r."""
    val, coeffs = r.local_expansion(root, 8)
    idx = -power - val
    if idx < 0 or idx >= len(coeffs):
        return Fraction(0)
    return coeffs[idx]


def _inf_series(r: URational, count: int) -> tuple[int, list[Fraction]]:
    """Expansion r = sum c_i z^{-(v + i)} at infinity; returns (v, coeffs)."""
    num, den = r.num, r.den
    dn, dd = num.degree(), den.degree()
    v = dd - dn
    ncs = [num[dn - i] for i in range(count + 4)]
    dcs = [den[dd - i] for i in range(count + 4)]
    out: list[Fraction] = []
    for i in range(count):
        acc = ncs[i] if i < len(ncs) else Fraction(0)
        for j in range(i):
            acc -= out[j] * dcs[i - j]
        out.append(acc / dcs[0])
    return v, out


def _kovacic_case1(r, poles, inf_order, unresolved) -> KovacicCase:
    if r.is_zero():
        return KovacicCase(1, True, "r = 0: already solvable", (0,))
    for root, m in poles:
        if m > 2 and m % 2:
            return KovacicCase(1, False,
                               f"pole of odd order {m} at z = {root}")
    if inf_order <= 2 and inf_order % 2:
        return KovacicCase(1, False,
                           f"odd order {inf_order} at infinity")
    if unresolved:
        return KovacicCase(1, True,
                           "order conditions pass; degree analysis skipped "
                           "(irrational singular points)", ())
    if any(m > 2 for _, m in poles):
        return KovacicCase(1, True,
                           "order conditions pass; higher-order pole degree "
                           "analysis not attempted", ())
    # alpha data at finite poles, carried as surds so conjugates may cancel
    alphas: list[tuple[QuadExpr, QuadExpr]] = []
    half = Fraction(1, 2)
    for root, m in poles:
        if m == 1:
            alphas.append((QuadExpr(1), QuadExpr(1)))
        else:
            b2 = _pole_coeff(r, root, 2)
            s = QuadExpr.sqrt_rational(1 + 4 * b2).scale(half)
            alphas.append((QuadExpr(half) + s, QuadExpr(half) - s))
    # alpha data at infinity
    if inf_order > 2:
        ainf = (QuadExpr(0), QuadExpr(1))
    elif inf_order == 2:
        _, cs = _inf_series(r, 1)
        s = QuadExpr.sqrt_rational(1 + 4 * cs[0]).scale(half)
        ainf = (QuadExpr(half) + s, QuadExpr(half) - s)
    else:
        # negative even order: polynomial part of sqrt(r) has degree nu
        nu = (-inf_order) // 2
        _, cs = _inf_series(r, 2 * nu + 2)
        boa = _bhat_over_lead(cs, nu)      # b-hat / a_nu as a surd
        ainf = ((boa - nu).scale(half), ((-boa) - nu).scale(half))
    degrees = []
    for choice in itertools.product(*[range(2)] * (len(alphas) + 1)):
        d = ainf[choice[-1]]
        for al, ci in zip(alphas, choice[:-1]):
            d = d - al[ci]
        if d.is_integer() and d.rational_value() >= 0:
            degrees.append(int(d.rational_value()))
    if degrees:
        return KovacicCase(1, True, "candidate degree(s) found",
                           tuple(sorted(set(degrees))))
    return KovacicCase(1, False, "no non-negative integer candidate degree")


def _bhat_over_lead(cs: list[Fraction], nu: int) -> QuadExpr:
    """b / a_nu for the case-1 infinity data.

    The polynomial part of sqrt(r) at infinity is a_nu z^nu + ... with
    a_nu^2 = c0; b is the coefficient of z^{nu-1} in r - ([sqrt r]_inf)^2,
    which works out to sqrt(c0) times a rational.
    """
    c0 = cs[0]
    u = [x / c0 for x in cs[1:2 * nu + 2]]
    y = [Fraction(1)] + [Fraction(0)] * (2 * nu + 1)
    for d in range(1, 2 * nu + 2):
        conv = sum(y[j] * y[d - j] for j in range(1, d))
        target = u[d - 1] if d - 1 < len(u) else Fraction(0)
        y[d] = (target - conv) / 2
    square = [Fraction(0)] * (2 * nu + 2)
    for i in range(nu + 1):
        for j in range(nu + 1):
            if i + j < 2 * nu + 2:
                square[i + j] += y[i] * y[j]
    idx = nu + 1                      # z^{2nu - (nu+1)} = z^{nu-1}
    diff = (cs[idx] / c0 if idx < len(cs) else Fraction(0)) - square[idx]
    return QuadExpr.sqrt_rational(c0).scale(diff)


def _kovacic_case2(r, poles, inf_order, unresolved) -> KovacicCase:
    if r.is_zero():
        return KovacicCase(2, False, "r = 0 has trivial group")
    has_needed = any(m == 2 or (m > 2 and m % 2) for _, m in poles)
    if unresolved:
        return KovacicCase(2, True,
                           "pole structure partially unresolved "
                           "(irrational singular points); not excluded", ())
    if not has_needed:
        return KovacicCase(2, False,
                           "no pole of order 2 nor of odd order > 2")
    ecs = []
    for root, m in poles:
        if m == 1:
            ecs.append({4})
        elif m == 2:
            b2 = _pole_coeff(r, root, 2)
            s = QuadExpr.sqrt_rational(1 + 4 * b2)
            es = {2}
            if s.is_rational():
                sq = s.rational_value()
                for cand in (2 + 2 * sq, 2 - 2 * sq):
                    if cand.denominator == 1:
                        es.add(int(cand))
            ecs.append(es)
        else:
            ecs.append({m})
    if inf_order > 2:
        einf = {0, 2, 4}
    elif inf_order == 2:
        v, cs = _inf_series(r, 1)
        s = QuadExpr.sqrt_rational(1 + 4 * cs[0])
        einf = {2}
        if s.is_rational():
            sq = s.rational_value()
            for cand in (2 + 2 * sq, 2 - 2 * sq):
                if cand.denominator == 1:
                    einf.add(int(cand))
    else:
        einf = {inf_order}
    degrees = set()
    for combo in itertools.product(*ecs):
        for e in einf:
            d = Fraction(e - sum(combo), 2)
            if d.denominator == 1 and d >= 0:
                degrees.add(int(d))
    if degrees:
        return KovacicCase(2, True, "candidate degree(s) found", tuple(sorted(degrees)))
    return KovacicCase(2, False, "no non-negative integer candidate degree")


def _kovacic_case3(r, poles, inf_order, unresolved) -> KovacicCase:
    if r.is_zero():
        return KovacicCase(3, False, "r = 0 has trivial group")
    if any(m > 2 for _, m in poles):
        return KovacicCase(3, False, "a pole exceeds order 2")
    if inf_order < 2:
        return KovacicCase(3, False,
                           f"order at infinity {inf_order} < 2")
    if unresolved:
        return KovacicCase(3, True,
                           "order conditions pass on the resolved part; "
                           "not excluded", ())
    # rationality requirements on the partial-fraction residues:
    # with r = sum a_i/(z-c_i)^2 + sum b_i/(z-c_i) one needs every
    # sqrt(1+4a_i) rational, sum b_i = 0, and sqrt(1+4g) rational where
    # g = sum a_i + sum b_i c_i
    beta_sum = Fraction(0)
    gamma = Fraction(0)
    for root, m in poles:
        if m == 2:
            a2 = _pole_coeff(r, root, 2)
            if not QuadExpr.sqrt_rational(1 + 4 * a2).is_rational():
                return KovacicCase(3, False,
                                   f"sqrt(1+4a) irrational at z = {root}")
            gamma += a2
        b1 = _pole_coeff(r, root, 1)
        beta_sum += b1
        gamma += b1 * root
    if beta_sum != 0:
        return KovacicCase(3, False, "first-order residues do not sum to zero")
    if not QuadExpr.sqrt_rational(1 + 4 * gamma).is_rational():
        return KovacicCase(3, False, "sqrt(1+4g) irrational for the residue sum")
    if inf_order == 2:
        _, cs = _inf_series(r, 1)
        if not QuadExpr.sqrt_rational(1 + 4 * cs[0]).is_rational():
            return KovacicCase(3, False, "sqrt(1+4b) irrational at infinity")
    # candidate degrees over the three symmetry orders
    degrees = set()
    for nfold in (4, 6, 12):
        ecs = []
        for root, m in poles:
            if m == 1:
                ecs.append({12})
            else:
                b2 = _pole_coeff(r, root, 2)
                sq = QuadExpr.sqrt_rational(1 + 4 * b2).rational_value()
                es = set()
                for kk in range(-(nfold // 2), nfold // 2 + 1):
                    cand = 6 + Fraction(12 * kk, nfold) * sq
                    if cand.denominator == 1:
                        es.add(int(cand))
                ecs.append(es)
        if inf_order > 2:
            binf = Fraction(0)
        else:
            v, cs = _inf_series(r, 1)
            binf = cs[0]
        sq = QuadExpr.sqrt_rational(1 + 4 * binf)
        einf = set()
        if sq.is_rational():
            sqv = sq.rational_value()
            for kk in range(-(nfold // 2), nfold // 2 + 1):
                cand = 6 + Fraction(12 * kk, nfold) * sqv
                if cand.denominator == 1:
                    einf.add(int(cand))
        for combo in itertools.product(*ecs) if ecs else [()]:
            for e in einf:
                d = Fraction(nfold * (e - sum(combo)), 12)
                if d.denominator == 1 and d >= 0:
                    degrees.add(int(d))
    if degrees:
        return KovacicCase(3, True, "candidate degree(s) found", tuple(sorted(degrees)))
    return KovacicCase(3, False, "no non-negative integer candidate degree")
