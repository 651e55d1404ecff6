"""The evolved free-surface system in the conformal frame.

State is the pair (P, Zt) on the fixed grid a', where Z(a',t) = a' + P(a',t)
parametrizes the surface and Zt is the velocity trace.  Gravity is 1 and the
fluid has infinite depth and zero surface tension.  The closed evolution is

    dP/dt  = Zt  - b (1 + dP/da')
    dZt/dt = Ztt - b dZt/da'

with the transport velocity b, the Taylor factor A1 >= 1 and the acceleration
Ztt recovered from the state by commutator algebra:

    b   = Re([Zt, H](1/Z_a - 1)) + 2 Re Zt
    A1  = 1 - Im [Zt, H] d/da' conj(Zt)
    Ztt = i A1 / conj(Z_a) - i

Constraints (conj(Zt) and Z_a - 1 are holomorphic traces) are preserved by
the continuum flow; the discretization monitors their residuals and can
optionally re-project.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import A1ViolationError, JacobianError, MarkerCollisionError
from .grid import TWO_PI, GridFunction, modes
from .singular import commutator_h, commutator_h_dg, double_bracket_same
from .spectral import (
    dealias_23,
    derivative,
    evaluate,
    hilbert,
    holomorphic_residual,
    krasny_filter,
)


@dataclass(frozen=True)
class StepSettings:
    """Discrete stabilization and guard thresholds."""

    dealias: bool = True
    krasny_floor: float = 0.0
    project_velocity: bool = False
    jac_floor: float = 1e-6
    a1_tol: float = 1e-10
    cfl: float = 0.5


DEFAULT_SETTINGS = StepSettings()


class WaveState:
    """Immutable snapshot (t, P, Zt) with lazily cached derived quantities."""

    __slots__ = ("t", "pos", "vel", "_cache")

    def __init__(self, t: float, pos: GridFunction, vel: GridFunction):
        if pos.n != vel.n:
            raise ValueError("pos and vel must share a grid")
        object.__setattr__(self, "t", float(t))
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "vel", vel)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, *a):
        raise AttributeError("WaveState is immutable")

    @property
    def n(self) -> int:
        return self.pos.n

    def _get(self, key, builder):
        cache = object.__getattribute__(self, "_cache")
        if key not in cache:
            cache[key] = builder()
        return cache[key]

    # ---- derived fields -------------------------------------------------

    @property
    def za(self) -> GridFunction:
        """Z_{,a'} = 1 + dP/da'."""
        return self._get("za", lambda: derivative(self.pos) + 1.0)

    @property
    def inv_za(self) -> GridFunction:
        return self._get("inv_za", lambda: 1.0 / self.za)

    @property
    def min_jac(self) -> float:
        return float(np.min(np.abs(self.za.values)))

    @property
    def a1(self) -> GridFunction:
        """Taylor factor, real-valued, >= 1 up to discretization error."""

        def build():
            c = commutator_h_dg(self.vel, self.vel.conj())
            return GridFunction(1.0 - c.values.imag)

        return self._get("a1", build)

    @property
    def b(self) -> GridFunction:
        """Transport velocity of the conformal parametrization (real-valued)."""

        def build():
            c = commutator_h(self.vel, self.inv_za - 1.0)
            return GridFunction(c.values.real + 2.0 * self.vel.values.real)

        return self._get("b", build)

    def b_alternative(self) -> GridFunction:
        """Projection form Re (I - H)(Zt / Z_a); equals b when constraints hold."""
        ratio = self.vel * self.inv_za
        return GridFunction((ratio - hilbert(ratio)).values.real)

    @property
    def ztt(self) -> GridFunction:
        """Acceleration trace: i A1 / conj(Z_a) - i."""

        def build():
            return GridFunction(1j * self.a1.values / np.conj(self.za.values) - 1j)

        return self._get("ztt", build)

    def ztt_via_calA(self) -> GridFunction:
        """Same acceleration through i * (A1/|Z_a|^2) * Z_a - i (algebraic twin)."""
        cal_a = self.a1.values / np.abs(self.za.values) ** 2
        return GridFunction(1j * cal_a * self.za.values - 1j)

    @property
    def cal_a(self) -> GridFunction:
        """A1 / |Z_a|^2, the pressure-gradient weight in the conformal frame."""
        return self._get("cal_a", lambda: GridFunction(self.a1.values / np.abs(self.za.values) ** 2))

    @property
    def at_over_a(self) -> GridFunction:
        """Logarithmic time rate of the pressure-gradient weight along particles.

        -Im(2 [Zt,H] d conj(Ztt) + 2 [Ztt,H] d conj(Zt) - [Zt,Zt; D conj(Zt)]) / A1
        """

        def build():
            zt, ztt = self.vel, self.ztt
            t1 = commutator_h_dg(zt, ztt.conj())
            t2 = commutator_h_dg(ztt, zt.conj())
            dzt_bar = self.inv_za * derivative(zt.conj())
            t3 = double_bracket_same(zt, dzt_bar)
            num = 2.0 * t1.values + 2.0 * t2.values - t3.values
            return GridFunction(-num.imag / self.a1.values)

        return self._get("at_over_a", build)

    # ---- constraint residuals --------------------------------------------

    @property
    def holo_residual_vel(self) -> float:
        return self._get("holo_vel", lambda: holomorphic_residual(self.vel.conj()))

    @property
    def holo_residual_za(self) -> float:
        return self._get("holo_za", lambda: holomorphic_residual(self.za - 1.0))


def check_guards(state: WaveState, settings: StepSettings = DEFAULT_SETTINGS) -> None:
    if state.min_jac <= settings.jac_floor:
        raise JacobianError(
            f"min |Z_a| = {state.min_jac:.3e} <= floor {settings.jac_floor:.1e} at t = {state.t:.6g}"
        )
    min_a1 = float(np.min(state.a1.values.real))
    if min_a1 < 1.0 - 10.0 * settings.a1_tol:
        raise A1ViolationError(f"min A1 = {min_a1:.15g} at t = {state.t:.6g}")


def rhs(state: WaveState, settings: StepSettings = DEFAULT_SETTINGS) -> tuple[GridFunction, GridFunction]:
    """Fixed-frame tendencies (dP/dt, dZt/dt); raises on tripped guards."""
    check_guards(state, settings)
    dpos = state.vel - state.b * state.za
    dvel = state.ztt - state.b * derivative(state.vel)
    return dpos, dvel


def cfl_dt(state: WaveState, settings: StepSettings = DEFAULT_SETTINGS) -> float:
    """dt = cfl * min(1, 1/||b||_inf) * (2*pi/n), the transport-limited step."""
    bmax = state.b.linf()
    return settings.cfl * min(1.0, 1.0 / max(bmax, 1e-30)) * (TWO_PI / state.n)


def apply_filter(state: WaveState, settings: StepSettings = DEFAULT_SETTINGS) -> WaveState:
    """Per-step stabilization: 2/3 dealiasing, optional Krasny floor and
    re-projection of the velocity onto holomorphic traces."""
    pos, vel = state.pos, state.vel
    if settings.dealias:
        pos, vel = dealias_23(pos), dealias_23(vel)
    if settings.krasny_floor > 0.0:
        pos, vel = krasny_filter(pos, settings.krasny_floor), krasny_filter(vel, settings.krasny_floor)
    if settings.project_velocity:
        c = vel.conj().coeffs.copy()
        c[modes(vel.n) >= 0] = 0.0
        vel = GridFunction.from_coeffs(c).conj()
    return WaveState(state.t, pos, vel)


@dataclass(frozen=True)
class MarkerSet:
    """Lagrangian marker positions h_i(t) advected by dh/dt = b(h, t)."""

    positions: np.ndarray

    @classmethod
    def uniform(cls, m: int) -> "MarkerSet":
        return cls(TWO_PI * np.arange(m) / m)

    @property
    def m(self) -> int:
        return self.positions.size

    def cyclic_gaps(self) -> np.ndarray:
        """Successive gaps of the unwrapped positions; the last one closes the period."""
        h = self.positions
        return np.diff(np.concatenate([h, [h[0] + TWO_PI]]))

    def check_ordering(self) -> None:
        gaps = self.cyclic_gaps()
        if np.any(gaps <= 0.0):
            raise MarkerCollisionError(f"marker ordering violated (min gap {gaps.min():.3e})")


def _marker_velocity(b: GridFunction, positions: np.ndarray) -> np.ndarray:
    return evaluate(b, positions).real


def step_rk4(
    state: WaveState,
    dt: float,
    settings: StepSettings = DEFAULT_SETTINGS,
    markers: MarkerSet | None = None,
):
    """One classical four-stage step of the coupled (state, markers) system.

    Returns (state, markers); the filter is applied once, after the step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    s1 = state
    k1 = rhs(s1, settings)
    s2 = WaveState(state.t + dt / 2, state.pos + (dt / 2) * k1[0], state.vel + (dt / 2) * k1[1])
    k2 = rhs(s2, settings)
    s3 = WaveState(state.t + dt / 2, state.pos + (dt / 2) * k2[0], state.vel + (dt / 2) * k2[1])
    k3 = rhs(s3, settings)
    s4 = WaveState(state.t + dt, state.pos + dt * k3[0], state.vel + dt * k3[1])
    k4 = rhs(s4, settings)
    pos = state.pos + (dt / 6) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    vel = state.vel + (dt / 6) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    new = apply_filter(WaveState(state.t + dt, pos, vel), settings)

    new_markers = None
    if markers is not None:
        h = markers.positions
        v1 = _marker_velocity(s1.b, h)
        v2 = _marker_velocity(s2.b, h + (dt / 2) * v1)
        v3 = _marker_velocity(s3.b, h + (dt / 2) * v2)
        v4 = _marker_velocity(s4.b, h + dt * v3)
        new_markers = MarkerSet(h + (dt / 6) * (v1 + 2.0 * v2 + 2.0 * v3 + v4))
        new_markers.check_ordering()
    return new, new_markers


def advance_markers(markers: MarkerSet, b_stages, dt: float) -> MarkerSet:
    """RK4 update of markers from the four stage velocity fields of one step."""
    b1, b2, b3, b4 = b_stages
    h = markers.positions
    v1 = _marker_velocity(b1, h)
    v2 = _marker_velocity(b2, h + (dt / 2) * v1)
    v3 = _marker_velocity(b3, h + (dt / 2) * v2)
    v4 = _marker_velocity(b4, h + dt * v3)
    out = MarkerSet(h + (dt / 6) * (v1 + 2.0 * v2 + 2.0 * v3 + v4))
    out.check_ordering()
    return out


@dataclass
class Trajectory:
    """Result of run(): report series, snapshots and the termination record."""

    reports: list
    snapshots: list  # (t, WaveState) at report times
    markers: MarkerSet | None
    reason: str
    detail: str
    steps: int
    min_a1: float = float("inf")  # pointwise minimum of A1 over every accepted step

    @property
    def final_state(self) -> WaveState:
        return self.snapshots[-1][1]


def run(
    state: WaveState,
    horizon: float,
    settings: StepSettings = DEFAULT_SETTINGS,
    *,
    dt: float | None = None,
    report_dt: float = 0.05,
    policy=None,
    markers: MarkerSet | None = None,
    chord_arc_max_points: int = 512,
    eb_squared_tail: bool = False,
) -> Trajectory:
    """Integrate to the horizon, reporting diagnostics at a fixed cadence.

    dt=None chooses the transport-limited step per report interval and lands
    on report times exactly.  Termination reason is one of completed,
    blowup_monitor, jacobian_guard, a1_violation, self_intersection.
    """
    from . import diagnostics  # reports are assembled by the diagnostics layer

    if policy is None:
        policy = diagnostics.MonitorPolicy()

    def report_of(s):
        return diagnostics.energy_report(
            s,
            settings=settings,
            chord_arc_max_points=chord_arc_max_points,
            eb_squared_tail=eb_squared_tail,
        )

    reports = []
    snapshots = []
    steps = 0
    reason, detail = "completed", ""
    min_a1 = float(np.min(state.a1.values.real))
    try:
        rep = report_of(state)
        reports.append(rep)
        snapshots.append((state.t, state))
        e0 = rep.frak_e
        decision = diagnostics.blowup_decision(rep, e0, policy)
        if decision.stop:
            return Trajectory(reports, snapshots, markers, decision.reason, decision.detail, 0, min_a1)
        t_end = state.t + horizon
        while state.t < t_end - 1e-12:
            span = min(report_dt, t_end - state.t)
            base = dt if dt is not None else cfl_dt(state, settings)
            nsub = max(1, int(np.ceil(span / base - 1e-12)))
            sub = span / nsub
            for _ in range(nsub):
                state, markers = step_rk4(state, sub, settings, markers)
                steps += 1
                min_a1 = min(min_a1, float(np.min(state.a1.values.real)))
            rep = report_of(state)
            reports.append(rep)
            snapshots.append((state.t, state))
            decision = diagnostics.blowup_decision(rep, e0, policy)
            if decision.stop:
                reason, detail = decision.reason, decision.detail
                break
    except JacobianError as exc:
        reason, detail = "jacobian_guard", str(exc)
    except A1ViolationError as exc:
        reason, detail = "a1_violation", str(exc)
    return Trajectory(reports, snapshots, markers, reason, detail, steps, min_a1)


__all__ = [
    "StepSettings",
    "DEFAULT_SETTINGS",
    "WaveState",
    "MarkerSet",
    "Trajectory",
    "check_guards",
    "rhs",
    "cfl_dt",
    "apply_filter",
    "step_rk4",
    "advance_markers",
    "run",
]
