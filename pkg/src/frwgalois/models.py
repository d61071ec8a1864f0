"""The two cosmological Hamiltonians, their transforms, and known integrals.

Two models: a minimally coupled scalar field, whose kinetic term carries
1/q1^2 (q1 the scale factor), and a conformally coupled field, polynomial in
both frames used here:

* ``conformal``          the indefinite frame H = (p2^2 - p1^2)/2 + ...
* ``conformal-natural``  after q1 -> -i q1, p1 -> i p1: definite kinetic part

All coefficients are exact; parameters may be rationals or left symbolic.
The phase-space convention throughout is pairs (q1, p1), (q2, p2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exact import (
    DEFAULT_PAIRS,
    ExactError,
    LaurentPoly,
    ParamPoly,
    PhasePoly,
    as_fraction,
    phase_vars,
    poisson_bracket,
    poly,
)

MINIMAL = "minimal"
MINIMAL_SCALED = "minimal-scaled"
CONFORMAL = "conformal"
CONFORMAL_NATURAL = "conformal-natural"
CONFORMAL_BLOCK = "conformal-block"

MODEL_IDS = (MINIMAL, MINIMAL_SCALED, CONFORMAL, CONFORMAL_NATURAL, CONFORMAL_BLOCK)

_PHASE_NAMES = ("q1", "p1", "q2", "p2")


def _sym_or_value(v, name: str) -> ParamPoly:
    if isinstance(v, ParamPoly):
        return v
    if v == "sym" or v is None:
        return ParamPoly.variable(name)
    return ParamPoly.constant(as_fraction(v))


class PhaseRational:
    """Quotient of PhasePoly by a parameter-and-phase polynomial denominator."""

    __slots__ = ("num", "den", "pairs")

    def __init__(self, num: ParamPoly, den: ParamPoly | None = None,
                 pairs=DEFAULT_PAIRS):
        self.num = num
        self.den = den if den is not None else ParamPoly.constant(1)
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator in phase function")
        self.pairs = pairs

    def differentiate(self, var: str) -> "PhaseRational":
        return PhaseRational(
            self.num.differentiate(var) * self.den - self.num * self.den.differentiate(var),
            self.den * self.den, self.pairs)

    def substitute(self, assignments) -> "PhaseRational":
        return PhaseRational(self.num.substitute(assignments),
                             self.den.substitute(assignments), self.pairs)

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        return self.num.evaluate(values) / self.den.evaluate(values)

    def __add__(self, other):
        other = _as_rat(other, self.pairs)
        return PhaseRational(self.num * other.den + other.num * self.den,
                             self.den * other.den, self.pairs)

    __radd__ = __add__

    def __neg__(self):
        return PhaseRational(-self.num, self.den, self.pairs)

    def __sub__(self, other):
        return self + (-_as_rat(other, self.pairs))

    def __mul__(self, other):
        other = _as_rat(other, self.pairs)
        return PhaseRational(self.num * other.num, self.den * other.den, self.pairs)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = _as_rat(other, self.pairs)
        return self.num * other.den == other.num * self.den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value() == 1:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    __repr__ = __str__


def _as_rat(x, pairs) -> PhaseRational:
    if isinstance(x, PhaseRational):
        return x
    if isinstance(x, ParamPoly):
        return PhaseRational(x, None, pairs)
    return PhaseRational(ParamPoly.constant(as_fraction(x)), None, pairs)


def hamilton_equations(h: PhaseRational, pairs=DEFAULT_PAIRS) -> list[PhaseRational]:
    """[q1dot, p1dot, q2dot, p2dot] from dH, exactly."""
    eqs = []
    for q, p in pairs:
        eqs.append(h.differentiate(p))
        eqs.append(-h.differentiate(q))
    # reorder to (q1dot, p1dot, q2dot, p2dot)
    return [eqs[0], eqs[1], eqs[2], eqs[3]]


@dataclass(frozen=True)
class ParticularBranch:
    """Invariant-plane particular solution with its energy relation.

    ``qdot_squared`` is the exact polynomial R(q) with (dq/deta)^2 = R(q)
    along the branch; ``energy_symbol`` names the constant appearing in R.
    """

    branch_id: str
    constraints: tuple[PhasePoly, ...]
    q_of: str                     # which phase variable plays the branch q
    qdot_squared: LaurentPoly
    energy_symbol: str
    note: str = ""


@dataclass(frozen=True)
class HamiltonianModel:
    model_id: str
    hamiltonian: PhaseRational
    parameters: dict
    constraints: tuple[str, ...]
    branches: tuple[ParticularBranch, ...]
    pairs: tuple = DEFAULT_PAIRS
    note: str = ""

    def equations_of_motion(self) -> list[PhaseRational]:
        return hamilton_equations(self.hamiltonian, self.pairs)

    def branch(self, branch_id: str) -> ParticularBranch:
        for b in self.branches:
            if b.branch_id == branch_id:
                return b
        raise KeyError(f"model {self.model_id} has no branch {branch_id}")

    def energy_value(self, state: Mapping[str, complex]) -> complex:
        values = dict(state)
        for name, v in self.parameters.items():
            if isinstance(v, ParamPoly):
                if v.is_constant():
                    values.setdefault(name, v.constant_value())
            else:
                values.setdefault(name, v)
        return self.hamiltonian.evaluate(values)


def _check_k(k):
    """k as an exact value in {-1, 0, 1}, or the symbol for derivations."""
    if k in ("sym", None) or isinstance(k, ParamPoly):
        return _sym_or_value(k, "k")
    kf = as_fraction(k)
    if kf not in (Fraction(-1), Fraction(0), Fraction(1)):
        raise ExactError("the curvature index k must be one of -1, 0, 1")
    return kf


def build_model(model_id: str, parameters: Mapping | None = None) -> HamiltonianModel:
    """Instantiate a model with exact (or symbolic) parameter values.

    Recognized parameter keys: k (required, in {-1, 0, 1}), Lambda, lam, m2,
    E, omega.  Values may be Fractions, 'p/q' strings, or 'sym'.
    """
    parameters = dict(parameters or {})
    model_id = model_id.lower()
    if model_id not in MODEL_IDS:
        raise ExactError(f"unknown model id {model_id!r}; expected one of {MODEL_IDS}")
    k = _check_k(parameters.get("k", 0))
    v = phase_vars()
    q1, p1, q2, p2 = (v[n] for n in _PHASE_NAMES)
    half = Fraction(1, 2)
    quarter = Fraction(1, 4)

    if model_id == MINIMAL:
        lam_ = _sym_or_value(parameters.get("Lambda", "sym"), "Lambda")
        m2 = _sym_or_value(parameters.get("m2", "sym"), "m2")
        omega = as_fraction(parameters.get("omega", 0))
        if omega != 0:
            raise ExactError("the analysis modules fix omega = 0; the massless "
                             "closed-form solvers accept omega directly")
        num = (-(p1 * p1) * (q1 * q1) + p2 * p2) * half \
            + (-(q1 ** 4) * k + (q1 ** 6) * lam_ + (q1 ** 6) * (q2 * q2) * m2)
        ham = PhaseRational(num, (q1 * q1))
        note = ""
        if _is_zero_param(m2):
            note = "massless field: separable, closed-form solvable (elliptic oracle)"
        branch = ParticularBranch(
            "empty-universe",
            (q2, p2),
            "q1",
            LaurentPoly("q", {0: ParamPoly.variable("E") * 2,
                              2: ParamPoly.variable("k") * (-2),
                              4: lam_ * 2}),
            "E",
            "scale factor alone; E = qdot^2/2 + k q^2 - Lambda q^4")
        return HamiltonianModel(MINIMAL, ham,
                                {"k": k, "Lambda": lam_, "m2": m2,
                                 "E": parameters.get("E", "sym")},
                                ("k in {-1,0,1}", "omega = 0"),
                                (branch,), note=note)

    if model_id == MINIMAL_SCALED:
        Lam = parameters.get("Lambda", "sym")
        m2in = parameters.get("m2", None)
        if "b" in parameters:
            b = _sym_or_value(parameters["b"], "b")
        else:
            if Lam in ("sym", None) or m2in in ("sym", None):
                b = ParamPoly.variable("b")
            else:
                Lf = as_fraction(Lam)
                if Lf == 0:
                    raise ExactError("the Lambda-rescaled model needs Lambda != 0")
                b = ParamPoly.constant(as_fraction(m2in) / Lf)
        if Lam not in ("sym", None) and as_fraction(Lam) == 0:
            raise ExactError("the Lambda-rescaled model needs Lambda != 0")
        num = (-(p1 * p1) * (q1 * q1) + p2 * p2) * half \
            + (-(q1 ** 4) * k + (q1 ** 6) + (q1 ** 6) * (q2 * q2) * b)
        ham = PhaseRational(num, (q1 * q1))
        scaled_E = "sym"
        if parameters.get("E") not in (None, "sym") and Lam not in ("sym", None):
            scaled_E = as_fraction(parameters["E"]) * as_fraction(Lam)
        branch = ParticularBranch(
            "empty-universe",
            (q2, p2),
            "q1",
            LaurentPoly("q", {0: ParamPoly.variable("E") * 2,
                              2: ParamPoly.variable("k") * (-2),
                              4: ParamPoly.constant(2)}),
            "E",
            "rescaled scale factor; E here is the scaled energy = E_orig * Lambda")
        return HamiltonianModel(MINIMAL_SCALED, ham,
                                {"k": k, "b": b, "E": scaled_E},
                                ("k in {-1,0,1}", "Lambda != 0", "omega = 0"),
                                (branch,))

    # conformal family
    lam_big = _sym_or_value(parameters.get("Lambda", "sym"), "Lambda")
    lam_small = _sym_or_value(parameters.get("lam", "sym"), "lam")
    m2 = _sym_or_value(parameters.get("m2", "sym"), "m2")
    note = ""
    if _is_zero_param(m2):
        note = ("massless field: the two oscillators decouple; trivially "
                "integrable (elliptic oracle)")

    if model_id == CONFORMAL:
        num = (p2 * p2 - p1 * p1) * half \
            + ((q2 * q2 - q1 * q1) * k) * half \
            + (q1 * q1) * (q2 * q2) * m2 * half \
            + ((q1 ** 4) * lam_big + (q2 ** 4) * lam_small) * quarter
        ham = PhaseRational(num)
        branches = ()
        return HamiltonianModel(CONFORMAL, ham,
                                {"k": k, "Lambda": lam_big, "lam": lam_small,
                                 "m2": m2, "E": parameters.get("E", "sym")},
                                ("k in {-1,0,1}", "omega = 0"),
                                branches, note=note)

    if model_id == CONFORMAL_NATURAL:
        num = (p1 * p1 + p2 * p2) * half \
            + ((q1 * q1 + q2 * q2) * k) * half \
            - (q1 * q1) * (q2 * q2) * m2 * half \
            + ((q1 ** 4) * lam_big + (q2 ** 4) * lam_small) * quarter
        ham = PhaseRational(num)
        E = ParamPoly.variable("E")
        kE = ParamPoly.variable("k")
        branches = (
            ParticularBranch("pi1", (q1, p1), "q2",
                             LaurentPoly("q", {0: E * 2, 2: -kE,
                                               4: lam_small * Fraction(-1, 2)}),
                             "E", "motion in the field plane (quartic constant lam)"),
            ParticularBranch("pi2", (q2, p2), "q1",
                             LaurentPoly("q", {0: E * 2, 2: -kE,
                                               4: lam_big * Fraction(-1, 2)}),
                             "E", "motion in the scale-factor plane (quartic constant Lambda)"),
        )
        return HamiltonianModel(CONFORMAL_NATURAL, ham,
                                {"k": k, "Lambda": lam_big, "lam": lam_small,
                                 "m2": m2, "E": parameters.get("E", "sym")},
                                ("k in {-1,0,1}", "omega = 0"),
                                branches, note=note)

    # CONFORMAL_BLOCK: the diagonalizing symplectic block transform, valid
    # only when alpha1 = 2 m2 + lam + Lambda is nonzero
    alphas = AlphaQuantities(lam_big, lam_small, m2)
    if alphas.alpha1.is_constant() and alphas.alpha1.constant_value() == 0:
        raise ExactError("the block transform is singular when 2 m2 + lam + Lambda = 0")
    num = (p1 * p1 + p2 * p2) * half + ((q1 * q1 + q2 * q2) * k) * half
    quartic = (q1 ** 4) * alphas.alpha5 \
        + (q1 * q1) * (q2 * q2) * alphas.alpha2 * 2 \
        + (q2 ** 4) * alphas.alpha4 \
        + q1 * (q2 ** 3) * ((lam_big - lam_small) * ParamPoly.variable("a")
                            * ParamPoly.variable("b") * alphas.alpha1 * 4)
    ham = PhaseRational(num * (alphas.alpha1 * 4) + quartic, alphas.alpha1 * 4)
    E = ParamPoly.variable("E")
    kE = ParamPoly.variable("k")
    branches = (
        ParticularBranch("pi3", (q2, p2), "q1",
                         LaurentPoly("q", {0: E * 2, 2: -kE,
                                           4: ParamPoly.variable("c4") * Fraction(-1, 2)}),
                         "E",
                         "third invariant plane; c4 stands for alpha5/alpha1"),
    )
    return HamiltonianModel(CONFORMAL_BLOCK, ham,
                            {"k": k, "Lambda": lam_big, "lam": lam_small, "m2": m2},
                            ("k in {-1,0,1}", "2 m2 + lam + Lambda != 0"),
                            branches,
                            note="coefficients live in the (a, b) extension with "
                                 "a^2 = (m2+Lambda)/alpha1, b^2 = (m2+lam)/alpha1")


def _is_zero_param(p: ParamPoly) -> bool:
    return p.is_constant() and p.constant_value() == 0


def model_from_json(doc: Mapping) -> HamiltonianModel:
    """Build from {"model": ..., "k": -1|0|1, "Lambda": "p/q"|"symbolic", ...}."""
    params = {}
    for key_json, key in (("k", "k"), ("Lambda", "Lambda"), ("lambda", "lam"),
                          ("lam", "lam"), ("m2", "m2"), ("E", "E"),
                          ("omega", "omega"), ("b", "b")):
        if key_json in doc:
            val = doc[key_json]
            params[key] = "sym" if val in ("symbolic", "sym") else val
    return build_model(doc["model"], params)


# -- alpha quantities and the (a, b) quadratic extension -------------------------

@dataclass(frozen=True)
class AlphaQuantities:
    """The five parameter combinations attached to the block transform."""

    Lambda_: ParamPoly
    lam: ParamPoly
    m2: ParamPoly

    @property
    def alpha1(self) -> ParamPoly:
        return self.m2 * 2 + self.lam + self.Lambda_

    @property
    def alpha2(self) -> ParamPoly:
        return self.lam * self.Lambda_ * 3 + self.m2 * (self.lam + self.Lambda_) * 2 \
            + self.m2 * self.m2

    @property
    def alpha3_squared(self) -> ParamPoly:
        return (self.lam + self.m2) * (self.Lambda_ + self.m2)

    @property
    def alpha4(self) -> ParamPoly:
        return self.lam * self.lam + self.Lambda_ * self.Lambda_ \
            - self.lam * self.Lambda_ - self.m2 * self.m2

    @property
    def alpha5(self) -> ParamPoly:
        return self.lam * self.Lambda_ - self.m2 * self.m2

    def a_squared(self) -> tuple[ParamPoly, ParamPoly]:
        """(numerator, denominator) of a^2 = (m2 + Lambda)/alpha1."""
        return (self.m2 + self.Lambda_, self.alpha1)

    def b_squared(self) -> tuple[ParamPoly, ParamPoly]:
        return (self.m2 + self.lam, self.alpha1)


def reduce_ab(p: ParamPoly, alphas: AlphaQuantities, power: int) -> ParamPoly:
    """Multiply by alpha1**power and eliminate even powers of the symbols a, b.

    Exponent reduction uses alpha1 a^2 = m2 + Lambda and alpha1 b^2 = m2 + lam;
    ``power`` must dominate the (a, b) half-degrees so no denominators appear.
    """
    a2_num = alphas.m2 + alphas.Lambda_
    b2_num = alphas.m2 + alphas.lam
    alpha1 = alphas.alpha1
    syms = p.symbols
    if "a" not in syms and "b" not in syms:
        return p * alpha1 ** power
    ia = syms.index("a") if "a" in syms else None
    ib = syms.index("b") if "b" in syms else None
    out = ParamPoly.zero(syms)
    for expo, coeff in p.terms.items():
        ea = expo[ia] if ia is not None else 0
        eb = expo[ib] if ib is not None else 0
        ha, hb = ea // 2, eb // 2
        if ha + hb > power:
            raise ExactError("reduction power too small for the a, b degrees")
        new = list(expo)
        if ia is not None:
            new[ia] = ea % 2
        if ib is not None:
            new[ib] = eb % 2
        term = ParamPoly(syms, {tuple(new): coeff})
        term = term * (a2_num ** ha) * (b2_num ** hb) * alpha1 ** (power - ha - hb)
        out = out + term
    return out


def block_transform_image(lam_big, lam_small, m2) -> tuple[ParamPoly, AlphaQuantities]:
    """Pull the natural-frame Hamiltonian through the block transform.

    Returns 4*alpha1^3*H in (q1, p1, q2, p2) with formal (a, b), reduced to
    the {1, a, b, ab} basis, for exact comparison with the displayed image.
    """
    alphas = AlphaQuantities(_sym_or_value(lam_big, "Lambda"),
                             _sym_or_value(lam_small, "lam"),
                             _sym_or_value(m2, "m2"))
    v = phase_vars()
    a = ParamPoly.variable("a")
    b = ParamPoly.variable("b")
    old = {"q1": -(b * v["q1"]) - a * v["q2"],
           "q2": -(a * v["q1"]) + b * v["q2"],
           "p1": -(b * v["p1"]) - a * v["p2"],
           "p2": -(a * v["p1"]) + b * v["p2"]}
    k = ParamPoly.variable("k")
    L, l, m = alphas.Lambda_, alphas.lam, alphas.m2
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    h = (v["p1"] ** 2 + v["p2"] ** 2) * half \
        + (v["q1"] ** 2 + v["q2"] ** 2) * k * half \
        - (v["q1"] ** 2) * (v["q2"] ** 2) * m * half \
        + ((v["q1"] ** 4) * L + (v["q2"] ** 4) * l) * quarter
    h = h.substitute(old)
    return reduce_ab(h * 4, alphas, 3), alphas


# -- known integrable table --------------------------------------------------------

def _table_entries():
    """The four known integrable parameter families, in the indefinite frame."""
    v = phase_vars()
    q1, p1, q2, p2 = (v[n] for n in _PHASE_NAMES)
    k = ParamPoly.variable("k")
    m2 = ParamPoly.variable("m2")
    half = Fraction(1, 2)
    d12 = Fraction(1, 12)

    def base(quartic):
        return (p2 * p2 - p1 * p1) * half + (q2 * q2 - q1 * q1) * k * half + quartic

    e1 = {
        "case": 1, "k": "any", "relations": {"Lambda": ("m2", Fraction(-1, 3)),
                                             "lam": ("m2", Fraction(-1, 3))},
        "H": base(-(q1 ** 4 - (q1 * q1) * (q2 * q2) * 6 + q2 ** 4) * m2 * d12),
        # the q1 q2 prefactor is required for {H, I} = 0
        "I": p1 * p2 + q1 * q2 * ((q2 * q2 - q1 * q1) * m2 - k * 3) * Fraction(1, 3),
    }
    e2 = {
        "case": 2, "k": "any", "relations": {"Lambda": ("m2", Fraction(-1)),
                                             "lam": ("m2", Fraction(-1))},
        "H": base(-((q2 * q2 - q1 * q1) ** 2) * m2 * Fraction(1, 4)),
        "I": q1 * p2 + q2 * p1,
    }
    e3 = {
        "case": 3, "k": "zero", "relations": {"Lambda": ("m2", Fraction(-8, 3)),
                                              "lam": ("m2", Fraction(-1, 6))},
        "H": (p2 * p2 - p1 * p1) * half
        - (q1 ** 4 * 16 - (q1 * q1) * (q2 * q2) * 12 + q2 ** 4) * m2 * Fraction(1, 24),
        "I": (q1 * p2 + q2 * p1) * p2
        + q1 * (q2 * q2) * ((q2 * q2) - (q1 * q1) * 2) * m2 * Fraction(1, 6),
    }
    e4 = {
        "case": 4, "k": "zero", "relations": {"Lambda": ("m2", Fraction(-8, 3)),
                                              "lam": ("m2", Fraction(-1, 3))},
        "H": (p2 * p2 - p1 * p1) * half
        - (q1 ** 4 * 8 - (q1 * q1) * (q2 * q2) * 6 + q2 ** 4) * m2 * d12,
        # the innermost sextic needs the m2 factor for {H, I} = 0 (grading
        # p^2 ~ m2 q^4 of the quartic flow)
        "I": p2 ** 4 + (q2 * q2) * m2 * Fraction(1, 3) * (
            q1 * q2 * p1 * p2 * 4 + (q2 * q2) * (p1 * p1)
            - ((q2 * q2) - (q1 * q1) * 6) * (p2 * p2)
            + (q2 * q2) * m2 * (((q2 * q2) - (q1 * q1) * 2) ** 2) * d12),
    }
    return (e1, e2, e3, e4)


_TABLE = None


def integrable_table():
    global _TABLE
    if _TABLE is None:
        _TABLE = _table_entries()
    return _TABLE


def known_integrable_lookup(k, lam_big, lam_small, m2) -> dict | None:
    """Match (k, Lambda, lam, m2) against the four known integrable families.

    Swapped (Lambda <-> lam) instances match too, with a flag.  Returns the
    matching entry (with exact H and I, verified to commute), or None.
    """
    kf = _check_k(k)
    L, l, m = as_fraction(lam_big), as_fraction(lam_small), as_fraction(m2)
    if m == 0:
        raise ExactError("the table applies to massive fields only")
    for entry in integrable_table():
        if entry["k"] == "zero" and kf != 0:
            continue
        (refL, cL) = entry["relations"]["Lambda"]
        (refl, cl) = entry["relations"]["lam"]
        want = (cL * m, cl * m)
        for swapped, (Lv, lv) in ((False, (L, l)), (True, (l, L))):
            if (Lv, lv) == want:
                H, I = entry["H"], entry["I"]
                bracket = poisson_bracket(
                    PhasePoly.from_poly(H.substitute({"k": kf, "m2": m})),
                    PhasePoly.from_poly(I.substitute({"k": kf, "m2": m})))
                if not bracket.is_zero():
                    raise AssertionError("table integral failed its bracket check")
                return {"case": entry["case"], "H": H, "I": I, "swapped": swapped}
    return None


# -- canonical transforms ------------------------------------------------------------

def canonical_transform(model: HamiltonianModel, transform_id: str) -> HamiltonianModel:
    """swap-lambdas, flip-k, or block-b, as exact model rewrites."""
    t = transform_id.lower()
    if t in ("swap-lambdas", "swaplambdas"):
        if model.model_id not in (CONFORMAL, CONFORMAL_NATURAL):
            raise ExactError("swap-lambdas acts on the conformal models")
        p = dict(model.parameters)
        p["Lambda"], p["lam"] = p["lam"], p["Lambda"]
        return build_model(model.model_id, _rebuild_params(p))
    if t in ("flip-k", "flipk"):
        p = dict(model.parameters)
        kv = p["k"]
        if isinstance(kv, ParamPoly) and not kv.is_constant():
            raise ExactError("flip-k needs a concrete curvature index")
        p["k"] = -(kv.constant_value() if isinstance(kv, ParamPoly) else as_fraction(kv))
        return build_model(model.model_id, _rebuild_params(p))
    if t in ("block-b", "blockb"):
        if model.model_id != CONFORMAL_NATURAL:
            raise ExactError("the block transform acts on the natural conformal frame")
        p = dict(model.parameters)
        return build_model(CONFORMAL_BLOCK, _rebuild_params(p))
    raise ExactError(f"unknown transform {transform_id!r}")


def _rebuild_params(p: dict) -> dict:
    out = {}
    for key, val in p.items():
        if isinstance(val, ParamPoly):
            out[key] = val.constant_value() if val.is_constant() else "sym"
        else:
            out[key] = val
    return out


# -- branch invariance --------------------------------------------------------------

def branch_invariance_defect(model: HamiltonianModel, branch: ParticularBranch) -> list:
    """Lie derivatives of the branch constraints, reduced modulo the constraints.

    For the linear constraint ideals used here, membership is equivalent to
    vanishing after setting the constraint polynomials to zero; each entry of
    the returned list is that exact remainder (all zero iff invariant).
    """
    h = model.hamiltonian
    defects = []
    for c in branch.constraints:
        dot = _rational_bracket(PhaseRational(c), h)
        rem = _restrict_to_branch(dot.num, branch)
        defects.append(rem)
    return defects


def _rational_bracket(f: PhaseRational, g: PhaseRational) -> PhaseRational:
    total = None
    for q, p in DEFAULT_PAIRS:
        term = f.differentiate(q) * g.differentiate(p) - f.differentiate(p) * g.differentiate(q)
        total = term if total is None else total + term
    return total


def _restrict_to_branch(p: ParamPoly, branch: ParticularBranch) -> ParamPoly:
    sub = {}
    for c in branch.constraints:
        # linear constraints: a single phase variable, or q2 - alpha q1 form
        names = [s for s in c.symbols if s in _PHASE_NAMES and c.degree(s) > 0]
        if len(names) == 1:
            sub[names[0]] = Fraction(0)
    return p.substitute(sub)


def pi3_invariance_defect(lam_big, lam_small, m2) -> ParamPoly:
    """Exact invariance check of the slanted plane q2 = c q1, p2 = c p1.

    Returns the polynomial remainder (in q1 and parameters) of the Lie
    derivative of the constraints along the natural-frame flow, reduced with
    c^2 (m2 + lam) = m2 + Lambda; the plane is invariant iff it vanishes.
    """
    L = _sym_or_value(lam_big, "Lambda")
    l = _sym_or_value(lam_small, "lam")
    m = _sym_or_value(m2, "m2")
    v = phase_vars()
    c = ParamPoly.variable("c")
    k = ParamPoly.variable("k")
    q1 = v["q1"]
    # natural-frame equations on q2 = c q1, p2 = c p1:
    p1dot = -(k * q1) + m * q1 * (c * q1) ** 2 - L * q1 ** 3
    p2dot = -(k * (c * q1)) + m * (q1 * q1) * (c * q1) - l * (c * q1) ** 3
    defect = p2dot - c * p1dot          # q2dot - c q1dot vanishes identically
    # reduce even powers of c via c^2 (m2 + lam) = (m2 + Lambda)
    out = ParamPoly.zero(defect.symbols)
    syms = defect.symbols
    ic = syms.index("c")
    for expo, coeff in defect.terms.items():
        ec = expo[ic]
        h = ec // 2
        new = list(expo)
        new[ic] = ec % 2
        term = ParamPoly(syms, {tuple(new): coeff})
        term = term * ((m + L) ** h)
        # clear denominators: multiply the rest by (m2+lam)^(hmax-h) later;
        # here all terms carry h in {0,1}, so multiply the h=0 terms by (m2+lam)
        if h == 0:
            term = term * (m + l)
        out = out + term
    return out
