"""Weierstrass functions and the closed-form massless solutions.

Numeric evaluation of p, p', zeta, sigma works by Laurent series near the
origin plus repeated duplication to reach larger arguments; no period
computation is ever needed because the oracle uses evaluate along bounded
real windows away from poles.  Degenerate invariants (g2^3 = 27 g3^2) are
routed to explicit hyperbolic/trigonometric forms.

The two massless models integrate in closed form; those solutions back the
numerical dynamics as independent oracles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .exact import ParamPoly, as_fraction, wp_coefficients

POLE_THRESHOLD = 1e-6


class EllipticError(Exception):
    pass


class PoleProximityError(EllipticError):
    """Evaluation point is within the guard distance of a lattice pole."""


# -- exact invariants -------------------------------------------------------------

def invariants_minimal(k, energy) -> tuple[Fraction, Fraction, Fraction]:
    """(g2, g3, discriminant) of the rescaled minimal scale-factor branch."""
    kf = as_fraction(k)
    e = as_fraction(energy)
    g2 = Fraction(16, 3) * (kf * kf - 3 * e)
    g3 = Fraction(32, 27) * kf * (2 * kf * kf - 9 * e)
    disc = 1024 * e * e * (kf * kf - 4 * e)
    return g2, g3, disc


def discriminant(g2, g3):
    return g2 ** 3 - 27 * g3 ** 2


@dataclass(frozen=True)
class WeierstrassData:
    g2: complex
    g3: complex

    @property
    def disc(self) -> complex:
        return self.g2 ** 3 - 27 * self.g3 ** 2

    def is_degenerate(self, tol: float = 1e-13) -> bool:
        scale = max(abs(self.g2) ** 3, abs(self.g3) ** 2, 1.0)
        return abs(self.disc) <= tol * scale


# -- numeric evaluation --------------------------------------------------------------

_SERIES_TERMS = 44


def _wp_symbolic_coeffs():
    global _WP_COEFFS
    if _WP_COEFFS is None:
        g2p, g3p = ParamPoly.variable("g2"), ParamPoly.variable("g3")
        _WP_COEFFS = wp_coefficients(g2p, g3p, _SERIES_TERMS)
    return _WP_COEFFS


_WP_COEFFS = None


def _series_eval(z: complex, g2: complex, g3: complex):
    """(p, p', zeta, log-sigma correction) by Laurent series near 0."""
    csn = [c.evaluate({"g2": g2, "g3": g3}) for c in _wp_symbolic_coeffs()]
    z2 = z * z
    wp = 1.0 / z2
    wpd = -2.0 / (z2 * z)
    zeta = 1.0 / z
    logsig = 0.0 + 0.0j
    pw = z2
    for m, c in enumerate(csn, start=1):
        wp += c * pw
        wpd += (2 * m) * c * pw / z
        zeta -= c * pw * z / (2 * m + 1)
        logsig -= c * pw * z2 / ((2 * m + 1) * (2 * m + 2))
        pw *= z2
    return wp, wpd, zeta, logsig


def _eval_all(z: complex, g2: complex, g3: complex, depth: int = 0):
    """(p, p', zeta, sigma) with duplication until the series converges."""
    scale = max(abs(g2) ** 0.25, abs(g3) ** (1.0 / 6.0), 1e-12)
    if abs(z) * scale < 0.9 and abs(z) < 0.9:
        wp, wpd, zeta, logsig = _series_eval(z, g2, g3)
        return wp, wpd, zeta, z * cmath.exp(logsig)
    if depth > 64:
        raise EllipticError("duplication depth exceeded")
    P, Pd, zt, sg = _eval_all(z / 2, g2, g3, depth + 1)
    if abs(Pd) < 1e-14:
        raise EllipticError("duplication hit a stationary point; perturb z")
    Pdd = 6 * P * P - g2 / 2
    Pddd = 12 * P * Pd
    ratio = Pdd / Pd
    wp2 = ratio * ratio / 4 - 2 * P
    wpd2 = (Pdd * (Pddd * Pd - Pdd * Pdd)) / (4 * Pd ** 3) - Pd
    zeta2 = 2 * zt + ratio / 2
    sigma2 = -(sg ** 4) * Pd
    return wp2, wpd2, zeta2, sigma2


def _eval_degenerate(z: complex, g2: complex, g3: complex):
    """Closed forms when the discriminant vanishes."""
    if abs(g2) < 1e-15 and abs(g3) < 1e-15:
        return 1 / z ** 2, -2 / z ** 3, 1 / z, z
    e = -3 * g3 / (2 * g2)           # double root of 4t^3 - g2 t - g3
    c = cmath.sqrt(3 * e)
    sh = cmath.sinh(c * z)
    ch = cmath.cosh(c * z)
    wp = e + 3 * e / (sh * sh)
    wpd = -6 * e * c * ch / sh ** 3
    zeta = -e * z + c * ch / sh
    sigma = sh / c * cmath.exp(-e * z * z / 2)
    return wp, wpd, zeta, sigma


def _pole_guard(z: complex, g2: complex, g3: complex):
    if abs(z) < POLE_THRESHOLD:
        raise PoleProximityError(f"|z| = {abs(z):.2e} is within the pole guard")


def wp_eval(z: complex, g2: complex, g3: complex, tol: float = 1e-12) -> complex:
    """Weierstrass p(z; g2, g3), checked against its defining cubic."""
    p, _, _, _ = eval_weierstrass(z, g2, g3, tol)
    return p


def wp_prime_eval(z: complex, g2: complex, g3: complex, tol: float = 1e-12) -> complex:
    _, pd, _, _ = eval_weierstrass(z, g2, g3, tol)
    return pd


def zeta_eval(z: complex, g2: complex, g3: complex, tol: float = 1e-12) -> complex:
    _, _, zt, _ = eval_weierstrass(z, g2, g3, tol)
    return zt


def sigma_eval(z: complex, g2: complex, g3: complex, tol: float = 1e-12) -> complex:
    _, _, _, sg = eval_weierstrass(z, g2, g3, tol)
    return sg


def eval_weierstrass(z: complex, g2: complex, g3: complex,
                     tol: float = 1e-12) -> tuple[complex, complex, complex, complex]:
    """(p, p', zeta, sigma) at z, with the residual identity enforced."""
    if tol <= 0:
        raise EllipticError("tolerance must be positive")
    z = complex(z)
    g2 = complex(g2)
    g3 = complex(g3)
    _pole_guard(z, g2, g3)
    data = WeierstrassData(g2, g3)
    if data.is_degenerate():
        p, pd, zt, sg = _eval_degenerate(z, g2, g3)
    else:
        p, pd, zt, sg = _eval_all(z, g2, g3)
    lhs = pd * pd
    rhs = 4 * p ** 3 - g2 * p - g3
    scale = max(abs(lhs), abs(rhs), 1.0)
    if abs(lhs - rhs) > 1e4 * tol * scale:
        raise EllipticError(
            f"defining identity residual {abs(lhs - rhs) / scale:.2e} "
            "exceeds tolerance; likely too close to a pole")
    return p, pd, zt, sg


def wp_inverse(target: complex, g2: complex, g3: complex,
               seed: complex | None = None, tol: float = 1e-12) -> complex:
    """One preimage w with p(w) = target, by seeded Newton iteration."""
    target = complex(target)
    data = WeierstrassData(complex(g2), complex(g3))
    if data.is_degenerate() and (abs(g2) > 1e-15 or abs(g3) > 1e-15):
        # p = e + 3e/sinh^2(c z): invert in closed form
        e = -3 * complex(g3) / (2 * complex(g2))
        c = cmath.sqrt(3 * e)
        return cmath.asinh(cmath.sqrt(3 * e / (target - e))) / c
    seeds = [seed] if seed is not None else []
    if not seeds:
        import numpy as np
        best = None
        for r in np.linspace(0.12, 2.4, 16):
            for th in np.linspace(0.0, math.pi, 9):
                u = r * cmath.exp(1j * th)
                try:
                    p, _, _, _ = eval_weierstrass(u, g2, g3, tol)
                except EllipticError:
                    continue
                score = abs(p - target)
                if best is None or score < best[0]:
                    best = (score, u)
        if best is None:
            raise EllipticError("no usable seed for the p-preimage")
        seeds = [best[1]]
    for w in seeds:
        for _ in range(120):
            try:
                p, pd, _, _ = eval_weierstrass(w, g2, g3, tol)
            except EllipticError:
                w *= 1.0 + 0.07j
                continue
            err = p - target
            if abs(err) < tol * max(1.0, abs(target)):
                return w
            if abs(pd) < 1e-12:
                w *= 1.0 + 0.05j
                continue
            step = err / pd
            if abs(step) > 0.5 * abs(w):
                step = step / abs(step) * 0.5 * abs(w)
            w = w - step
    raise EllipticError("Newton iteration for the p-preimage did not converge")


# -- closed-form massless solutions ------------------------------------------------

@dataclass
class ClosedFormSolution:
    """Evaluators for a massless branch, with the constants that fix it."""

    kind: str                     # 'massless-minimal' | 'massless-conformal'
    constants: dict
    a_squared: Callable[[float], complex]
    a_squared_prime: Callable[[float], complex]
    phi: Callable[[float], complex] | None = None
    phi_squared: Callable[[float], complex] | None = None
    phi_squared_prime: Callable[[float], complex] | None = None

    def state(self, eta: float) -> dict:
        """Phase-space point (q1, p1, q2, p2) on the solution at eta."""
        v = self.a_squared(eta)
        vd = self.a_squared_prime(eta)
        a = cmath.sqrt(v)
        pa = -vd / (2 * a)            # adot = vd / (2a), p_a = -adot
        out = {"q1": a, "p1": pa}
        if self.kind == "massless-minimal":
            phi = self.phi(eta)
            out["q2"] = phi
            J, omega = self.constants["J"], self.constants["omega"]
            out["p2"] = cmath.sqrt(2 * (J - omega ** 2 / phi ** 2)) if phi != 0 \
                else cmath.sqrt(2 * J)
        else:
            w = self.phi_squared(eta)
            wd = self.phi_squared_prime(eta)
            phi = cmath.sqrt(w)
            out["q2"] = phi
            out["p2"] = wd / (2 * phi)
        return out


def _quadratic_v_solution(c3: float, c2: float, c1: float, c0: float):
    """v with (v')^2 = c3 v^3 + c2 v^2 + c1 v + c0 when c3 = 0.

    Differentiating gives the linear equation v'' = c2 v + c1/2, solved by
    exponentials/trigonometric functions plus a constant; the quadrature
    constant is fixed against the original first-order equation.
    """
    if c3 != 0:
        raise EllipticError("cubic case should use the elliptic branch")
    if c2 == 0:
        if c1 == 0:
            raise EllipticError("degenerate: v is constant or linear; "
                                "pick nonzero coefficients")
        # v'' = c1/2: parabola v = (c1/4) eta^2 + B eta + C with B^2 = c1 C + c0
        C = 1.0
        B = math.sqrt(abs(c1 * C + c0))

        def v(eta):
            return c1 / 4 * eta * eta + B * eta + C

        def vd(eta):
            return c1 / 2 * eta + B
        return v, vd
    mu = cmath.sqrt(complex(c2))
    # v = -c1/(2 c2) + P e^{mu eta} + Q e^{-mu eta}, PQ fixed by c0
    shift = -c1 / (2 * c2)
    # matching the constant term: 4 c2 P Q = -(c0 + c1 shift + c2 shift^2)
    prod = -(c0 + c1 * shift + c2 * shift * shift) / (4 * c2)
    P = cmath.sqrt(prod) if prod != 0 else 0.5
    Q = prod / P if P != 0 else 0.0

    def v(eta):
        return shift + P * cmath.exp(mu * eta) + Q * cmath.exp(-mu * eta)

    def vd(eta):
        return mu * (P * cmath.exp(mu * eta) - Q * cmath.exp(-mu * eta))
    return v, vd


def massless_minimal_solution(k, Lambda, E, J, omega=0, eta0=0.0,
                              phi_const: complex = 0.0) -> ClosedFormSolution:
    """Closed form of the massless minimally coupled model.

    The scale factor obeys (dv/deta)^2 = 8(Lambda v^3 - k v^2 - E v + J)
    with v = a^2; for Lambda != 0, v = p(eta - eta0)/(2 Lambda) + k/(3 Lambda)
    with g2 = 16 k^2/3 + 16 Lambda E, g3 = 32 Lambda k E/3 + 64 k^3/27
    - 32 Lambda^2 J.  The field integrates through zeta and sigma at the two
    zeros of v, which sit where 3 p = -2k; ``phi_const`` is the quadrature
    constant left free by the boundary conditions.
    """
    kf, Lf, Ef, Jf = (float(as_fraction(x)) for x in (k, Lambda, E, J))
    om = float(as_fraction(omega))
    consts = {"k": kf, "Lambda": Lf, "E": Ef, "J": Jf, "omega": om,
              "eta0": eta0, "phi_const": phi_const}
    if Lf == 0:
        v, vd = _quadratic_v_solution(0.0, -8 * kf, -8 * Ef, 8 * Jf)
        sol = ClosedFormSolution("massless-minimal", consts, v, vd)
        sol.phi = _phi_by_quadrature(sol, Jf, om, phi_const)
        return sol
    g2 = 16 * kf * kf / 3 + 16 * Lf * Ef
    g3 = 32 * Lf * kf * Ef / 3 + 64 * kf ** 3 / 27 - 32 * Lf * Lf * Jf
    consts["g2"], consts["g3"] = g2, g3

    def v(eta):
        p, _, _, _ = eval_weierstrass(eta - eta0, g2, g3)
        return p / (2 * Lf) + kf / (3 * Lf)

    def vd(eta):
        _, pd, _, _ = eval_weierstrass(eta - eta0, g2, g3)
        return pd / (2 * Lf)

    sol = ClosedFormSolution("massless-minimal", consts, v, vd)
    if Jf == 0:
        if om != 0:
            raise EllipticError("J = 0 with omega != 0 leaves no real field branch")
        sol.phi = lambda eta: phi_const       # constant field on the J = 0 branch
        return sol
    # field branch through zeta/sigma at w with p(w) = -2k/3
    w = wp_inverse(-2 * kf / 3 + 0j, g2, g3)
    _, pdw, ztw, _ = eval_weierstrass(w, g2, g3)
    consts["w"] = w

    def h(eta):
        # h = const - int deta / v; with v = (p(u) - p(w)) / (2 Lambda) the
        # classical addition identity gives the zeta/sigma closed form
        u = eta - eta0
        _, _, _, sm = eval_weierstrass(u - w, g2, g3)
        _, _, _, sp = eval_weierstrass(u + w, g2, g3)
        return phi_const - (2 * Lf / pdw) * (2 * ztw * u + cmath.log(sm / sp))

    def phi(eta):
        hv = h(eta)
        return cmath.sqrt((om * om + 2 * Jf * Jf * hv * hv) / Jf)

    sol.phi = phi
    sol.h = h  # type: ignore[attr-defined]
    return sol


def _phi_by_quadrature(sol: ClosedFormSolution, J: float, omega: float,
                       phi_const: complex):
    """phi(eta) for the Lambda = 0 minimal branch by direct quadrature of 1/v."""
    from scipy.integrate import quad

    def phi(eta):
        re = quad(lambda t: (1.0 / sol.a_squared(t)).real, 0.0, eta,
                  limit=200)[0]
        h = phi_const - re
        return cmath.sqrt((omega * omega + 2 * J * J * h * h) / J) if J else phi_const
    return phi


def massless_conformal_solution(k, Lambda, lam, E1, E2, omega=0,
                                eta1=0.0, eta2=0.0) -> ClosedFormSolution:
    """Closed form of the massless conformally coupled model.

    The two oscillators decouple: v1 = a^2 obeys
    (v1')^2 = 2 Lambda v1^3 - 4 k v1^2 - 8 E1 v1 and solves as
    v1 = 2 p(eta - eta1; g2, g3)/Lambda + 2k/(3 Lambda) with
    g2 = 4k^2/3 + 4 Lambda E1, g3 = 8k^3/27 + 4 k Lambda E1 / 3; v2 = phi^2
    obeys (v2')^2 = -2 lam v2^3 - 4 k v2^2 + 8 E2 v2 - 4 omega^2 with
    v2 = -2 p(eta - eta2; g4, g5)/lam - 2k/(3 lam),
    g4 = 4k^2/3 + 4 lam E2, g5 = 8k^3/27 + 4 k lam E2/3 + lam^2 omega^2.
    """
    kf, Lf, lf, E1f, E2f = (float(as_fraction(x)) for x in (k, Lambda, lam, E1, E2))
    om = float(as_fraction(omega))
    consts = {"k": kf, "Lambda": Lf, "lam": lf, "E1": E1f, "E2": E2f,
              "omega": om, "eta1": eta1, "eta2": eta2}

    if Lf == 0:
        v1, v1d = _quadratic_v_solution(0.0, -4 * kf, -8 * E1f, 0.0)
    else:
        g2 = 4 * kf * kf / 3 + 4 * Lf * E1f
        g3 = 8 * kf ** 3 / 27 + 4 * kf * Lf * E1f / 3
        consts["g2"], consts["g3"] = g2, g3

        def v1(eta):
            p, _, _, _ = eval_weierstrass(eta - eta1, g2, g3)
            return 2 * p / Lf + 2 * kf / (3 * Lf)

        def v1d(eta):
            _, pd, _, _ = eval_weierstrass(eta - eta1, g2, g3)
            return 2 * pd / Lf

    if lf == 0:
        v2, v2d = _quadratic_v_solution(0.0, -4 * kf, 8 * E2f, -4 * om * om)
    else:
        g4 = 4 * kf * kf / 3 + 4 * lf * E2f
        g5 = 8 * kf ** 3 / 27 + 4 * kf * lf * E2f / 3 + lf * lf * om * om
        consts["g4"], consts["g5"] = g4, g5

        def v2(eta):
            p, _, _, _ = eval_weierstrass(eta - eta2, g4, g5)
            return -2 * p / lf - 2 * kf / (3 * lf)

        def v2d(eta):
            _, pd, _, _ = eval_weierstrass(eta - eta2, g4, g5)
            return -2 * pd / lf

    return ClosedFormSolution("massless-conformal", consts, v1, v1d,
                              phi_squared=v2, phi_squared_prime=v2d)
