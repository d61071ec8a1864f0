"""Numerical integration of both models with exact-expression right-hand sides.

An adaptive high-order explicit scheme (DOP853) integrates the exact
equations of motion; energy is monitored along the way, never enforced,
since the drift itself is a diagnostic.  The minimal model carries a pole
guard on the scale factor: trajectories are not continued through a = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .exact import ParamPoly, as_fraction
from .models import (
    MINIMAL,
    MINIMAL_SCALED,
    HamiltonianModel,
    PhaseRational,
)

_PHASE = ("q1", "p1", "q2", "p2")
POLE_ABORT = 1e-8


class DynamicsError(Exception):
    pass


class PoleApproachError(DynamicsError):
    """The scale factor reached the abort threshold."""


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray            # shape (n, 4) or (n, 2) for the reduced flow
    energy: np.ndarray | None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise DynamicsError("trajectory times must strictly increase")

    def max_energy_drift(self) -> float:
        if self.energy is None or len(self.energy) == 0:
            return float("nan")
        return float(np.max(np.abs(self.energy - self.energy[0])))


def _concrete_params(model: HamiltonianModel) -> dict[str, Fraction]:
    out = {}
    for name, v in model.parameters.items():
        if isinstance(v, ParamPoly):
            if v.is_constant():
                out[name] = v.constant_value()
        elif v not in ("sym", None):
            out[name] = as_fraction(v)
    return out


def _compile(pr: PhaseRational, params: Mapping[str, Fraction]) -> Callable:
    """PhaseRational -> fast float function of the 4-vector state."""
    num = pr.num.substitute(dict(params))
    den = pr.den.substitute(dict(params))
    for p in (num, den):
        extra = [s for s in p.symbols if s not in _PHASE and p.degree(s) > 0]
        if extra:
            raise DynamicsError(f"unbound parameters {extra}; supply exact values")

    def table(p: ParamPoly):
        rows = []
        for expo, c in p.terms.items():
            exps = [0, 0, 0, 0]
            for s, e in zip(p.symbols, expo):
                if s in _PHASE:
                    exps[_PHASE.index(s)] = e
            rows.append((float(c), tuple(exps)))
        return rows

    tn, td = table(num), table(den)

    def f(y):
        q1, p1, q2, p2 = y
        n = 0.0
        for c, (e1, e2, e3, e4) in tn:
            n += c * q1 ** e1 * p1 ** e2 * q2 ** e3 * p2 ** e4
        if not td:
            return 0.0
        d = 0.0
        for c, (e1, e2, e3, e4) in td:
            d += c * q1 ** e1 * p1 ** e2 * q2 ** e3 * p2 ** e4
        return n / d
    return f


def compile_rhs(model: HamiltonianModel) -> Callable:
    params = _concrete_params(model)
    fs = [_compile(eq, params) for eq in model.equations_of_motion()]

    def rhs(t, y):
        return [f(y[:4]) for f in fs]
    return rhs


def compile_jacobian(model: HamiltonianModel) -> Callable:
    params = _concrete_params(model)
    eqs = model.equations_of_motion()
    grid = [[_compile(eq.differentiate(v), params) for v in _PHASE] for eq in eqs]

    def jac(y):
        return np.array([[g(y[:4]) for g in row] for row in grid])
    return jac


def compile_energy(model: HamiltonianModel) -> Callable:
    params = _concrete_params(model)
    return _compile(model.hamiltonian, params)


def _state_vector(state0) -> np.ndarray:
    if isinstance(state0, Mapping):
        return np.array([float(state0[n]) for n in _PHASE], dtype=float)
    arr = np.asarray(state0, dtype=float)
    if arr.shape != (4,):
        raise DynamicsError("state must supply (q1, p1, q2, p2)")
    return arr


def integrate(model: HamiltonianModel, state0, eta_span: tuple[float, float],
              rel_tol: float = 1e-10, abs_tol: float = 1e-12,
              n_points: int = 200) -> Trajectory:
    """Adaptive integration with energy monitoring and a pole guard."""
    for tol in (rel_tol, abs_tol):
        if not (0 < tol <= 1e-3):
            raise DynamicsError("tolerances must lie in (0, 1e-3]")
    y0 = _state_vector(state0)
    if model.model_id in (MINIMAL, MINIMAL_SCALED) and abs(y0[0]) < POLE_ABORT:
        raise PoleApproachError("initial scale factor is on the pole locus")
    rhs = compile_rhs(model)
    events = []
    if model.model_id in (MINIMAL, MINIMAL_SCALED):
        def pole(t, y):
            return abs(y[0]) - POLE_ABORT
        pole.terminal = True
        pole.direction = -1
        events.append(pole)
    ts = np.linspace(eta_span[0], eta_span[1], n_points)
    sol = solve_ivp(rhs, eta_span, y0, method="DOP853", t_eval=ts,
                    rtol=rel_tol, atol=abs_tol, events=events or None,
                    dense_output=False)
    if events and sol.t_events and len(sol.t_events[0]):
        raise PoleApproachError(
            f"scale factor hit the guard at eta = {sol.t_events[0][0]:.6f}")
    if not sol.success:
        raise DynamicsError(f"integration failed: {sol.message}")
    ham = compile_energy(model)
    energy = np.array([ham(y) for y in sol.y.T])
    return Trajectory(sol.t, sol.y.T.copy(), energy,
                      {"rel_tol": rel_tol, "abs_tol": abs_tol,
                       "nfev": sol.nfev, "model": model.model_id})


@dataclass
class MLEEstimate:
    value: float
    trace: np.ndarray             # running estimates at each renormalization

    def __float__(self):
        return self.value


def mle_estimate(model: HamiltonianModel, state0, eta_span: tuple[float, float],
                 renorm_interval: float = 1.0, tangent0=None,
                 rel_tol: float = 1e-9, abs_tol: float = 1e-11) -> MLEEstimate:
    """Maximal Lyapunov exponent by tangent-vector renormalization.

    Advisory output only; no verdict depends on it.
    """
    y0 = _state_vector(state0)
    if tangent0 is None:
        tangent0 = np.array([1.0, 0.0, 0.0, 0.0])
    v0 = np.asarray(tangent0, dtype=float)
    if not np.any(v0):
        raise DynamicsError("tangent seed must be nonzero")
    v0 = v0 / np.linalg.norm(v0)
    rhs = compile_rhs(model)
    jac = compile_jacobian(model)

    def aug(t, y):
        dy = rhs(t, y[:4])
        dv = jac(y[:4]) @ y[4:]
        return [*dy, *dv]

    t0, t1 = eta_span
    total = 0.0
    trace = []
    y = np.concatenate([y0, v0])
    t = t0
    while t < t1 - 1e-12:
        t_next = min(t + renorm_interval, t1)
        sol = solve_ivp(aug, (t, t_next), y, method="DOP853",
                        rtol=rel_tol, atol=abs_tol)
        if not sol.success:
            raise DynamicsError(f"tangent integration failed: {sol.message}")
        y = sol.y[:, -1]
        norm = np.linalg.norm(y[4:])
        if norm == 0:
            raise DynamicsError("tangent vector collapsed")
        total += np.log(norm)
        y[4:] /= norm
        t = t_next
        trace.append(total / (t - t0))
    return MLEEstimate(trace[-1] if trace else 0.0, np.array(trace))


# -- the two-dimensional reduction at zero energy and curvature --------------------

def reduced_rhs(Lambda: float, m2: float) -> Callable:
    """Flow in (angle, expansion-rate) variables for the flat zero-energy case."""
    if m2 <= 0:
        raise DynamicsError("the angular reduction needs m2 > 0")
    m = float(np.sqrt(m2))

    def rhs(t, y):
        alpha, h = y
        return [np.sqrt(2.0) * m + 3 * h * np.sin(alpha) * np.cos(alpha),
                -3 * (h * h - 2 * Lambda) * np.cos(alpha) ** 2]
    return rhs


def reduce_and_integrate(Lambda, m2, state0: tuple[float, float],
                         t_span: tuple[float, float], tol: float = 1e-10,
                         n_points: int = 200) -> Trajectory:
    """Integrate the reduced (angle, h) system in cosmological time."""
    Lf, m2f = float(as_fraction(Lambda)), float(as_fraction(m2))
    alpha0, h0 = state0
    if h0 * h0 <= 2 * Lf:
        raise DynamicsError("h^2 > 2 Lambda is required on the real branch")
    rhs = reduced_rhs(Lf, m2f)
    ts = np.linspace(t_span[0], t_span[1], n_points)
    sol = solve_ivp(rhs, t_span, [alpha0, h0], method="DOP853", t_eval=ts,
                    rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        raise DynamicsError(f"reduced integration failed: {sol.message}")
    return Trajectory(sol.t, sol.y.T.copy(), None,
                      {"Lambda": Lf, "m2": m2f, "reduced": True})


def reconstruct_full_state(Lambda, m2, alpha: float, h: float,
                           a: float = 1.0) -> dict:
    """Lift a reduced point to the full minimal phase space at zero energy."""
    Lf, m2f = float(as_fraction(Lambda)), float(as_fraction(m2))
    amp = np.sqrt(h * h - 2 * Lf)
    m = np.sqrt(m2f)
    phi = amp * np.sin(alpha) / (np.sqrt(2.0) * m)
    omega = amp * np.cos(alpha)
    return {"q1": a, "p1": -h * a * a, "q2": phi, "p2": omega * a ** 3}


def reduced_coordinates(Lambda, m2, state: Sequence[float]) -> tuple[float, float]:
    """(alpha, h) read off a full minimal state."""
    m = np.sqrt(float(as_fraction(m2)))
    q1, p1, q2, p2 = state
    h = -p1 / (q1 * q1)
    omega = p2 / (q1 ** 3)
    alpha = np.arctan2(np.sqrt(2.0) * m * q2, omega)
    return float(alpha), float(h)


def compare_reduced_full(Lambda, m2, alpha0: float, h0: float,
                         eta_span: tuple[float, float], a0: float = 1.0,
                         rel_tol: float = 1e-11) -> dict:
    """Integrate the full flat zero-energy system and its reduction side by side.

    The full trajectory runs in conformal time with an auxiliary quadrature
    dt = a deta; the reduced one runs in cosmological time and is compared
    through the (alpha, h) readout at matching times.
    """
    from .models import build_model
    Lf, m2f = float(as_fraction(Lambda)), float(as_fraction(m2))
    model = build_model(MINIMAL, {"k": 0, "Lambda": Lambda, "m2": m2, "E": 0})
    full0 = reconstruct_full_state(Lambda, m2, alpha0, h0, a0)
    rhs = compile_rhs(model)

    def aug(t, y):
        dy = rhs(t, y[:4])
        return [*dy, y[0]]          # dt/deta = a

    y0 = [full0["q1"], full0["p1"], full0["q2"], full0["p2"], 0.0]
    sol = solve_ivp(aug, eta_span, y0, method="DOP853", rtol=rel_tol,
                    atol=rel_tol * 1e-2, dense_output=True)
    if not sol.success:
        raise DynamicsError(f"full integration failed: {sol.message}")
    t_end = sol.y[4, -1]
    reduced = reduce_and_integrate(Lambda, m2, (alpha0, h0), (0.0, t_end),
                                   tol=rel_tol, n_points=120)
    # interpolate the full trajectory at the reduced cosmological times
    etas = np.linspace(eta_span[0], eta_span[1], 600)
    ys = sol.sol(etas)
    tgrid = ys[4]
    errs = []
    for t_red, (al_red, h_red) in zip(reduced.times, reduced.states):
        i = np.searchsorted(tgrid, t_red)
        if i <= 0 or i >= len(etas):
            continue
        w = (t_red - tgrid[i - 1]) / (tgrid[i] - tgrid[i - 1])
        y = ys[:4, i - 1] * (1 - w) + ys[:4, i] * w
        al_f, h_f = reduced_coordinates(Lambda, m2, y)
        errs.append((abs(np.angle(np.exp(1j * (al_f - al_red)))), abs(h_f - h_red)))
    errs = np.array(errs)
    return {"max_alpha_err": float(np.max(errs[:, 0])),
            "max_h_err": float(np.max(errs[:, 1])),
            "n_compared": len(errs)}


def oracle_comparison(model: HamiltonianModel, solution, eta_grid) -> dict:
    """Max deviation between an integrated trajectory and a closed form.

    ``solution`` is a ClosedFormSolution; the trajectory starts from the
    oracle state at the first grid point.
    """
    start = solution.state(float(eta_grid[0]))
    y0 = [start[n].real for n in _PHASE]
    traj = integrate(model, y0, (float(eta_grid[0]), float(eta_grid[-1])),
                     rel_tol=1e-12, abs_tol=1e-13,
                     n_points=len(eta_grid))
    errs = []
    for t, y in zip(traj.times, traj.states):
        v_oracle = solution.a_squared(float(t)).real
        errs.append(abs(y[0] * y[0] - v_oracle))
    return {"max_a2_error": float(np.max(errs)), "trajectory": traj}
