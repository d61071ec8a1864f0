"""Variational equations along particular branches and canonical-form recognition.

The pipeline: linearize the flow on an invariant plane (a 4x4 matrix whose
entries are exact Laurent polynomials in the branch coordinate q), discard
the tangential block, turn the normal block into a scalar second-order
equation, and algebraize it with z = q, q^2/k, or q^2 using the branch
energy relation to eliminate qdot^2.  The resulting rational equations are
matched against Whittaker, hypergeometric (Riemann P), Lame, Bessel, and
Euler normal forms with exact parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exact import (
    ExactError,
    ExactRatio,
    ExponentPair,
    LaurentPoly,
    ParamPoly,
    as_fraction,
)
from .exact.unipoly import UPoly
from .models import HamiltonianModel, ParticularBranch, PhaseRational

_PHASE = ("q1", "p1", "q2", "p2")


# -- variational equations ------------------------------------------------------

@dataclass(frozen=True)
class VariationalSystem:
    """Linearization along a branch: 4x4 matrix over Laurent polynomials in q."""

    model_id: str
    branch_id: str
    matrix: tuple                  # rows of LaurentPoly entries, order (q1,p1,q2,p2)
    normal_vars: tuple[str, str]   # the constrained pair spanning the normal block

    def normal_block(self) -> list[list[LaurentPoly]]:
        idx = [_PHASE.index(v) for v in self.normal_vars]
        return [[self.matrix[i][j] for j in idx] for i in idx]

    def tangential_block(self) -> list[list[LaurentPoly]]:
        idx = [i for i, v in enumerate(_PHASE) if v not in self.normal_vars]
        return [[self.matrix[i][j] for j in idx] for i in idx]


def variational_equations(model: HamiltonianModel,
                          branch: ParticularBranch) -> VariationalSystem:
    """Exact Jacobian of the flow restricted to the branch.

    Entries are Laurent polynomials in the branch coordinate q; branch
    momenta never survive in the Jacobian for the models treated here (the
    constraint manifold kills them), which is verified during construction.
    A constant branch would carry no q at all and is rejected.
    """
    eqs = model.equations_of_motion()
    constrained = {str(_single_var(c)): Fraction(0) for c in branch.constraints}
    rows = []
    q_seen = False
    for eq in eqs:
        row = []
        for var in _PHASE:
            d = eq.differentiate(var)
            d = d.substitute(constrained)
            entry = _to_branch_laurent(d, branch.q_of)
            if entry.terms and any(deg != 0 for deg in entry.terms):
                q_seen = True
            row.append(entry)
        rows.append(tuple(row))
    if not q_seen:
        raise ExactError("degenerate particular solution: the branch "
                         "linearization is constant")
    return VariationalSystem(model.model_id, branch.branch_id, tuple(rows),
                             tuple(str(_single_var(c)) for c in branch.constraints))


def _single_var(c) -> str:
    names = [s for s in c.symbols if s in _PHASE and c.degree(s) > 0]
    if len(names) != 1 or c != ParamPoly.variable(names[0]).map_symbols(c.symbols):
        raise ExactError("branches with non-coordinate constraints need the "
                         "block frame; transform the model first")
    return names[0]


def _to_branch_laurent(d: PhaseRational, q_name: str) -> LaurentPoly:
    num, den = d.num, d.den
    # denominator must be a monomial in the branch coordinate
    den_deg = den.degree(q_name)
    rest = den.coefficient_of(q_name, den_deg)
    if not rest.is_constant():
        raise ExactError("non-monomial denominator on the branch")
    cden = rest.constant_value()
    out: dict[int, ParamPoly] = {}
    for e in range(num.degree(q_name) + 1):
        coeff = num.coefficient_of(q_name, e)
        if coeff.is_zero():
            continue
        bad = [s for s in coeff.symbols if s in _PHASE and coeff.degree(s) > 0]
        if bad:
            raise ExactError(f"phase variables {bad} survive on the branch")
        out[e - den_deg] = coeff * (Fraction(1) / cden)
    return LaurentPoly("q", out)


@dataclass(frozen=True)
class ScalarNVE:
    """x'' + f(q) qdot x' + g(q) x = 0 along the branch."""

    f: LaurentPoly
    g: LaurentPoly
    branch: ParticularBranch

    def __str__(self):
        return f"x'' + ({self.f}) qdot x' + ({self.g}) x = 0"


def normal_variational_equation(model: HamiltonianModel,
                                branch: ParticularBranch) -> ScalarNVE:
    ve = variational_equations(model, branch)
    (a11, a12), (a21, a22) = ve.normal_block()
    if not a11.is_zero() or not a22.is_zero():
        raise ExactError("normal block is not in (position, momentum) form")
    # x' = a12 y, y' = a21 x  ->  x'' - (a12'/a12) qdot x' - a12 a21 x = 0
    if len(a12.terms) != 1:
        raise ExactError("mixing entry must be a q-monomial")
    (deg, coeff), = a12.terms.items()
    f = LaurentPoly("q", {-1: ParamPoly.constant(-deg)})
    g = -(a12 * a21)
    return ScalarNVE(f, g, branch)


# -- second order linear ODEs with polynomial coefficients ------------------------

@dataclass(frozen=True)
class LinearODE2:
    """a(z) x'' + b(z) x' + c(z) x = 0 with exact polynomial coefficients.

    ``singular_points`` lists the finite singular points when the
    constructor knows them (roots of a); infinity is classified on demand.
    """

    var: str
    a: ParamPoly
    b: ParamPoly
    c: ParamPoly
    singular_points: tuple = ()

    def coefficients(self) -> tuple[ParamPoly, ParamPoly, ParamPoly]:
        return (self.a, self.b, self.c)

    def coefficient_upolys(self) -> tuple[UPoly, UPoly, UPoly]:
        """Parameter-free coefficient lists for the Kovacic stage."""
        out = []
        for p in (self.a, self.b, self.c):
            coeffs = []
            for e in range(p.degree(self.var) + 1):
                cc = p.coefficient_of(self.var, e)
                if not cc.is_constant():
                    raise ExactError("parameters must be specialized before "
                                     "numeric singularity analysis")
                coeffs.append(cc.constant_value())
            out.append(UPoly(coeffs))
        return tuple(out)

    def normalized(self) -> "LinearODE2":
        """Divide out the common rational content and z-power."""
        polys = [self.a, self.b, self.c]
        shift = min(_min_var_degree(p, self.var) for p in polys if p)
        content = None
        for p in polys:
            for coeff in p.terms.values():
                content = coeff if content is None else _frac_gcd(content, coeff)
        if content in (None, 0):
            return self
        inv = Fraction(1) / content
        # deterministic sign: the top term of a (in term order) comes out positive
        lead_expo = max(self.a.terms) if self.a.terms else None
        if lead_expo is not None and self.a.terms[lead_expo] < 0:
            inv = -inv

        def adjust(p: ParamPoly) -> ParamPoly:
            terms = {}
            iv = p.symbols.index(self.var) if self.var in p.symbols else None
            for expo, coeff in p.terms.items():
                new = list(expo)
                if iv is not None:
                    new[iv] -= shift
                terms[tuple(new)] = coeff * inv
            return ParamPoly(p.symbols, terms)

        return LinearODE2(self.var, adjust(self.a), adjust(self.b),
                          adjust(self.c), self.singular_points)

    def substitute_params(self, values: Mapping) -> "LinearODE2":
        vals = {k: as_fraction(v) for k, v in values.items()}
        return LinearODE2(self.var, self.a.substitute(vals),
                          self.b.substitute(vals), self.c.substitute(vals),
                          self.singular_points)

    def __str__(self):
        return f"({self.a}) x'' + ({self.b}) x' + ({self.c}) x = 0"


def _min_var_degree(p: ParamPoly, var: str) -> int:
    if not p.terms:
        return 0
    if var not in p.symbols:
        return 0
    i = p.symbols.index(var)
    return min(e[i] for e in p.terms)


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    from math import gcd
    a, b = abs(a), abs(b)
    return Fraction(gcd(a.numerator, b.numerator), _lcm(a.denominator, b.denominator))


def _lcm(a: int, b: int) -> int:
    from math import gcd
    return a * b // gcd(a, b)


# -- algebraization ------------------------------------------------------------------

SUBSTITUTIONS = ("z=q", "z=q^2/k", "z=q^2")


def algebraize(nve: ScalarNVE, substitution: str, params: Mapping | None = None,
               scale=None) -> LinearODE2:
    """Rationalize the NVE with a new independent variable.

    ``substitution`` is one of 'z=q', 'z=q^2/k', 'z=q^2'; the branch energy
    relation supplies qdot^2 = R(q).  ``params`` specializes parameter
    symbols first (the q^2/k substitution requires a concrete k = +-1, and
    block-frame branches take their quartic coefficient through the 'c4'
    key).  An optional exact ``scale`` rescales z -> scale * z_new at the
    end, given as a Fraction or a (numerator, denominator) polynomial pair.
    """
    params = dict(params or {})
    subs = {k: v for k, v in params.items()}

    def specialize(p: LaurentPoly) -> LaurentPoly:
        if not subs:
            return p
        return LaurentPoly(p.var, {d: c.substitute(subs) for d, c in p.terms.items()})

    R = specialize(nve.branch.qdot_squared)
    f = specialize(nve.f)
    g = specialize(nve.g)
    Rp = _laurent_diff(R)

    if substitution == "z=q":
        A = R
        B = _laurent_scale(Rp, Fraction(1, 2)) + f * R
        C = g
        shift = -min(0, *(t.min_degree() for t in (A, B, C) if not t.is_zero()))
        qs = LaurentPoly("q", {shift: 1})
        a, b, c = (_q_poly_to_z(qs * t) for t in (A, B, C))
        ode = LinearODE2("z", a, b, c)
    elif substitution in ("z=q^2/k", "z=q^2"):
        if substitution == "z=q^2/k":
            if "k" not in params:
                raise ExactError("z = q^2/k needs a concrete curvature index")
            kval = as_fraction(params["k"])
            if kval == 0:
                raise ExactError("substitution not invertible: k = 0")
        else:
            kval = Fraction(1)
        # s = q^2/kval: A = (2q/k)^2 R, B = (2R + qR' + 2 q f R)/k, C = g;
        # multiplying the equation by k^2 leaves integer k powers only
        A = LaurentPoly("q", {2: Fraction(4)}) * R
        B = (_laurent_scale(R, Fraction(2))
             + LaurentPoly("q", {1: 1}) * Rp
             + _laurent_scale(LaurentPoly("q", {1: 2}) * (f * R), Fraction(1)))
        B = _laurent_scale(B, kval)
        C = _laurent_scale(g, kval * kval)
        lows = [t.min_degree() for t in (A, B, C) if not t.is_zero()]
        shift = -min(0, *lows)
        shift += shift % 2
        qs = LaurentPoly("q", {shift: 1})
        a, b, c = (_even_q_to_z(qs * t, kval) for t in (A, B, C))
        ode = LinearODE2("z", a, b, c)
    else:
        raise ExactError(f"unknown substitution {substitution!r}")
    if scale is not None:
        ode = rescale_z(ode, scale)
    return ode.normalized()


def _q_poly_to_z(p: LaurentPoly) -> ParamPoly:
    out = ParamPoly.zero()
    for d, coeff in p.terms.items():
        if d < 0:
            raise ExactError("negative powers must be cleared before mapping")
        out = out + coeff * ParamPoly.monomial(("z",), {"z": d})
    return out


def _even_q_to_z(p: LaurentPoly, kval: Fraction) -> ParamPoly:
    """Map even powers of q to z via q^2 = kval * z."""
    out = ParamPoly.zero()
    for d, coeff in p.terms.items():
        if d % 2 or d < 0:
            raise ExactError("substitution not invertible: stray power of q")
        j = d // 2
        out = out + coeff * (kval ** j) * ParamPoly.monomial(("z",), {"z": j})
    return out


def _laurent_diff(p: LaurentPoly) -> LaurentPoly:
    return LaurentPoly(p.var, {d - 1: c * d for d, c in p.terms.items() if d})


def _laurent_scale(p: LaurentPoly, s) -> LaurentPoly:
    return LaurentPoly(p.var, {d: c * s for d, c in p.terms.items()})


def rescale_z(ode: LinearODE2, scale) -> LinearODE2:
    """Substitute z_old = scale * z_new, clearing all denominators.

    ``scale`` is a Fraction or an exact (numerator, denominator) pair of
    parameter polynomials, e.g. (-2k, Lambda).
    """
    if isinstance(scale, tuple):
        N, D = (p if isinstance(p, ParamPoly) else ParamPoly.constant(as_fraction(p))
                for p in scale)
    else:
        N, D = ParamPoly.constant(as_fraction(scale)), ParamPoly.constant(1)
    var = ode.var
    rows = ode.coefficients()
    T = max(rows[0].degree(var), rows[1].degree(var) + 1, rows[2].degree(var) + 2)
    out = []
    for row_shift, p in zip((0, 1, 2), rows):
        acc = ParamPoly.zero()
        for e in range(p.degree(var) + 1):
            coeff = p.coefficient_of(var, e)
            if coeff.is_zero():
                continue
            acc = acc + coeff * ParamPoly.monomial(("z",), {"z": e}) \
                * N ** (e + row_shift) * D ** (T - e - row_shift)
        out.append(acc)
    return LinearODE2(var, out[0], out[1], out[2]).normalized()


# -- indicial exponents -----------------------------------------------------------

def indicial_exponents(ode: LinearODE2, point) -> ExponentPair:
    """Exact indicial pair at a regular singular point (finite or 'inf')."""
    a, b, c = ode.coefficients()
    var = ode.var
    if point == "inf":
        da, db, dc = (p.degree(var) for p in (a, b, c))
        if db > da - 1 or dc > da - 2:
            raise ExactError("irregular singular point at infinity")
        lead = a.coefficient_of(var, da)
        p1 = _exact_ratio(b.coefficient_of(var, da - 1), lead)
        q2 = _exact_ratio(c.coefficient_of(var, da - 2), lead)
        # rho(rho+1) - p1 rho + q2 = 0  ->  sum = p1 - 1, product = q2
        return ExponentPair(_sub_generic(p1, 1), q2)
    z0 = as_fraction(point)
    if z0 != 0:
        shift = {var: ParamPoly.variable(var) + z0}
        a, b, c = (p.substitute(shift) for p in (a, b, c))
    alpha = _valuation(a, var)
    if _valuation(b, var) < alpha - 1 or _valuation(c, var) < alpha - 2:
        raise ExactError(f"irregular singular point at {point}")
    lead = a.coefficient_of(var, alpha)
    p0 = _exact_ratio(b.coefficient_of(var, alpha - 1), lead) if alpha >= 1 else \
        _exact_ratio(ParamPoly.zero(), lead)
    q0 = _exact_ratio(c.coefficient_of(var, alpha - 2), lead) if alpha >= 2 else \
        _exact_ratio(ParamPoly.zero(), lead)
    # rho(rho-1) + p0 rho + q0 = 0  ->  sum = 1 - p0, product = q0
    return ExponentPair(_sub_generic(1, p0) if not isinstance(p0, Fraction)
                        else Fraction(1) - p0, q0)


def _valuation(p: ParamPoly, var: str) -> int:
    if p.is_zero():
        return 10 ** 6
    if var not in p.symbols:
        return 0
    i = p.symbols.index(var)
    return min(e[i] for e in p.terms)


def _exact_ratio(num: ParamPoly, den: ParamPoly):
    """num/den as a Fraction, ParamPoly, or ExactRatio, exactly."""
    if den.is_constant():
        d = den.constant_value()
        out = num * (Fraction(1) / d)
        return out.constant_value() if out.is_constant() else out
    if num.is_zero():
        return Fraction(0)
    r = ExactRatio(num, den)
    if r.is_constant():
        return r.constant_value()
    return r


def _sub_generic(x, y):
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return as_fraction(x) - as_fraction(y)
    if isinstance(x, ExactRatio) or isinstance(y, ExactRatio):
        return ExactRatio.lift(x) - ExactRatio.lift(y)
    xp = x if isinstance(x, ParamPoly) else ParamPoly.constant(as_fraction(x))
    yp = y if isinstance(y, ParamPoly) else ParamPoly.constant(as_fraction(y))
    return xp - yp


def fuchs_sum(ode: LinearODE2, finite_points: Sequence) -> object:
    """Sum of all exponents over the given finite points and infinity."""
    total = None
    for pt in list(finite_points) + ["inf"]:
        s = indicial_exponents(ode, pt).sum_
        total = s if total is None else _add_generic(total, s)
    return total


def _add_generic(x, y):
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return as_fraction(x) + as_fraction(y)
    if isinstance(x, ExactRatio) or isinstance(y, ExactRatio):
        return ExactRatio.lift(x) + ExactRatio.lift(y)
    xp = x if isinstance(x, ParamPoly) else ParamPoly.constant(as_fraction(x))
    yp = y if isinstance(y, ParamPoly) else ParamPoly.constant(as_fraction(y))
    return xp + yp


# -- canonical-form recognition ------------------------------------------------------

@dataclass(frozen=True)
class CanonicalODE:
    family: str                    # Whittaker | RiemannP | Lame | Bessel | Euler | Raw
    parameters: dict
    transform: str = ""
    source: LinearODE2 | None = None


def recognize(ode: LinearODE2) -> CanonicalODE:
    """Match against the canonical families; Raw when nothing fits.

    The patterns cover exactly the shapes this pipeline produces: Euler and
    Bessel monomial forms, the two-finite-regular-points hypergeometric
    shape (reported through its Riemann P exponents), and the confluent
    z-linear shape that normalizes to a Whittaker equation.
    """
    var = ode.var
    a, b, c = (p.map_symbols(tuple(sorted(set(p.symbols) | {var})))
               for p in ode.normalized().coefficients())
    sa = _structure(a, var)
    sb = _structure(b, var)
    sc = _structure(c, var)

    # Euler: A z^2 x'' + B z x' + C x
    if set(sa) <= {2} and set(sb) <= {1} and set(sc) <= {0} and 2 in sa:
        A = sa[2]
        p0 = _exact_ratio(sb.get(1, ParamPoly.zero()), A)
        q0 = _exact_ratio(sc.get(0, ParamPoly.zero()), A)
        return CanonicalODE("Euler", {"exponents": ExponentPair(
            _sub_generic(1, p0) if not isinstance(p0, Fraction) else 1 - p0, q0)},
            source=ode)

    # Bessel: A z^2 x'' + A z x' + (C z + D) x  with C != 0
    if set(sa) <= {2} and set(sb) <= {1} and set(sc) <= {0, 1} and 1 in sc and 2 in sa:
        A, B = sa[2], sb.get(1, ParamPoly.zero())
        if A == B:
            D = sc.get(0, ParamPoly.zero())
            try:
                n2 = _exact_ratio(D * (-4), A)
            except ExactError:
                n2 = None
            if n2 is not None:
                return CanonicalODE(
                    "Bessel", {"order_squared": n2,
                               "argument": "s = 2 sqrt(C/A) sqrt(z)"},
                    transform="s proportional to sqrt(z)", source=ode)

    # Whittaker-bound confluent shape: A z x'' + B x' + C z x
    if set(sa) <= {1} and set(sb) <= {0} and set(sc) <= {1} and 1 in sa and 1 in sc:
        A = sa[1]
        B = sb.get(0, ParamPoly.zero())
        C = sc[1]
        r2 = _exact_ratio(B * B - A * B * 2, A * A * 4)  # B(B-2A)/(4A^2)
        mu2 = _add_generic(r2, Fraction(1, 4))
        r0 = _exact_ratio(-C, A)
        return CanonicalODE(
            "Whittaker",
            {"kappa": Fraction(0), "mu_squared": mu2, "c_squared": _mul4(r0)},
            transform="u = z^{B/(2A)} x, s = c z with c^2 = -4C/A", source=ode)

    # three regular singular points 0, z1, infinity -> Riemann P data
    pts = _finite_singular_points(ode)
    if pts is not None and len(pts) == 2:
        try:
            pairs = {str(pt): indicial_exponents(ode, pt) for pt in pts}
            pairs["inf"] = indicial_exponents(ode, "inf")
            return CanonicalODE("RiemannP", {"points": pts, "pairs": pairs},
                                source=ode)
        except ExactError:
            pass
    return CanonicalODE("Raw", {}, source=ode)


def _mul4(x):
    if isinstance(x, (ParamPoly, ExactRatio)):
        return x * 4
    return as_fraction(x) * 4


def _structure(p: ParamPoly, var: str) -> dict[int, ParamPoly]:
    out = {}
    for e in range(p.degree(var) + 1):
        coeff = p.coefficient_of(var, e)
        if not coeff.is_zero():
            out[e] = coeff
    return out


def _finite_singular_points(ode: LinearODE2):
    if ode.singular_points:
        return list(ode.singular_points)
    try:
        ua, _, _ = ode.coefficient_upolys()
    except ExactError:
        return None
    roots = ua.rational_roots()
    if sum(ua.root_multiplicity(r) for r in roots) != ua.degree():
        return None
    return roots


def lame_form_minimal(k, b, energy="sym") -> CanonicalODE:
    """The eta-domain Lame form of the rescaled minimal NVE at nonzero energy.

    With w = x q the normal equation becomes w'' = (A wp + B) w, where
    A = 2 - b, B = -(2/3) k (1 + b), and the invariants are those of the
    scale-factor branch.
    """
    from .hve import branch_invariants, _param
    kp = _param(k, "k")
    ep = _param(energy, "E")
    bp = _param(b, "b")
    g2, g3 = branch_invariants(kp, ep)
    A = ParamPoly.constant(2) - bp
    B = kp * (bp + 1) * Fraction(-2, 3)
    return CanonicalODE("Lame", {"A": A, "B": B, "g2": g2, "g3": g3},
                        transform="w = x q, independent variable eta")
