"""Energy functionals, geometric monitors and the per-step report.

All Lagrangian-frame weighted integrals are evaluated in the fixed conformal
frame through the change of variables that sends the particle measure
d(alpha)/a to |Z_a|^2/A1 d(alpha'); material time derivatives are
(d/dt + b d/da') applied to cached fields, with the fixed-frame d/dt obtained
by differentiating the evolution equations through the derived quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DEFAULT_SETTINGS, StepSettings, WaveState, rhs
from .errors import HolomorphicityError, UnderResolvedError
from .grid import TWO_PI, GridFunction, nodes
from .spectral import (
    band_limit_fraction,
    derivative,
    hhalf_norm,
    hilbert,
    proj_anti,
)


def _wl2sq(values: np.ndarray, weight: np.ndarray) -> float:
    """Weighted squared L2 integral (2*pi/n) * sum |v|^2 w."""
    return float(np.real(np.sum(np.abs(values) ** 2 * weight)) * TWO_PI / values.size)


@dataclass(frozen=True)
class TimeRates:
    """Fixed-frame d/dt of the state and of the cached derived fields."""

    dpos: GridFunction
    dvel: GridFunction
    dza: GridFunction
    dinv_za: GridFunction
    dvel_bar: GridFunction


def time_rates(state: WaveState, settings: StepSettings = DEFAULT_SETTINGS) -> TimeRates:
    dpos, dvel = rhs(state, settings)
    dza = derivative(dpos)
    dinv = GridFunction(-(state.inv_za.values ** 2) * dza.values)
    return TimeRates(dpos, dvel, dza, dinv, dvel.conj())


def _material(state: WaveState, g: GridFunction, dg: GridFunction) -> GridFunction:
    """(d/dt + b d/da') g, given the fixed-frame rate dg."""
    return dg + state.b * derivative(g)


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------


def energy_ea(state: WaveState, rates: TimeRates | None = None,
              settings: StepSettings = DEFAULT_SETTINGS) -> float:
    """Second-derivative velocity energy with 1/A1 weights.

    integral |(d/dt + b d)(D^2 conj Zt)|^2 / A1
      + || (1/Z_a) D^2 conj Zt ||_{H^{1/2}}^2
      + integral |D^2 conj Zt|^2 / A1
    """
    if rates is None:
        rates = time_rates(state, settings)
    q = state.inv_za
    ztb = state.vel.conj()
    inner = q * derivative(ztb)
    d2 = q * derivative(inner)
    dinner = rates.dinv_za * derivative(ztb) + q * derivative(rates.dvel_bar)
    dd2 = rates.dinv_za * derivative(inner) + q * derivative(dinner)
    mat = _material(state, d2, dd2)
    w = 1.0 / state.a1.values.real
    return _wl2sq(mat.values, w) + hhalf_norm(q * d2) ** 2 + _wl2sq(d2.values, w)


def energy_eb(state: WaveState, rates: TimeRates | None = None,
              settings: StepSettings = DEFAULT_SETTINGS, squared_tail: bool = False) -> float:
    """First-derivative velocity energy.

    The first term carries the particle weight, realized here as
    |Z_a|^2 / A1; the third term is the plain L2 norm of d/da' conj(Zt),
    unsquared by default (squared_tail switches the homogenized variant).
    """
    if rates is None:
        rates = time_rates(state, settings)
    q = state.inv_za
    ztb = state.vel.conj()
    inner = q * derivative(ztb)
    dinner = rates.dinv_za * derivative(ztb) + q * derivative(rates.dvel_bar)
    mat = _material(state, inner, dinner)
    w = np.abs(state.za.values) ** 2 / state.a1.values.real
    tail = derivative(ztb).l2()
    if squared_tail:
        tail = tail ** 2
    return _wl2sq(mat.values, w) + hhalf_norm(inner) ** 2 + tail


def energy_frak(state: WaveState, rates: TimeRates | None = None,
                settings: StepSettings = DEFAULT_SETTINGS, eb_squared_tail: bool = False) -> float:
    """Blow-up energy: Ea + Eb + || conj(Ztt) - i ||_inf."""
    if rates is None:
        rates = time_rates(state, settings)
    accel_gap = (state.ztt.conj() - 1j).linf()
    return (energy_ea(state, rates, settings)
            + energy_eb(state, rates, settings, eb_squared_tail)
            + accel_gap)


def energy_cal(state: WaveState) -> float:
    """Seven-term boundary energy equivalent to the blow-up energy."""
    q = state.inv_za
    ztb = state.vel.conj()
    dztb = derivative(ztb)
    d2v = q * derivative(q * dztb)
    dq = derivative(q)
    d2q = q * derivative(q * dq)
    return (dztb.l2() ** 2
            + d2v.l2() ** 2
            + dq.l2() ** 2
            + d2q.l2() ** 2
            + hhalf_norm(q * d2v) ** 2
            + hhalf_norm(q * dztb) ** 2
            + q.linf() ** 2)


def energy_k(state: WaveState, k: int, rates: TimeRates | None = None,
             settings: StepSettings = DEFAULT_SETTINGS, check_resolution: bool = True) -> float:
    """Higher-order energy built on the k-th plain derivative of conj(Zt).

    integral ( |d^k conj Zt|^2 + |Z_a (d/dt + b d)( (1/Z_a) d^k conj Zt )|^2 ) / A1
      + || (1/Z_a) d^k conj Zt ||_{H^{1/2}}^2
    """
    if k not in (2, 3):
        raise ValueError("energy_k implemented for k in {2, 3}")
    if rates is None:
        rates = time_rates(state, settings)
    ztb = state.vel.conj()
    dk = derivative(ztb, k)
    if check_resolution and band_limit_fraction(dk) > 0.10:
        raise UnderResolvedError(
            f"top-third band carries {band_limit_fraction(dk):.1%} of d^{k} conj(Zt)")
    q = state.inv_za
    prod = q * dk
    dprod = rates.dinv_za * dk + q * derivative(rates.dvel_bar, k)
    mat = _material(state, prod, dprod)
    w = 1.0 / state.a1.values.real
    return (_wl2sq(dk.values, w)
            + _wl2sq((state.za * mat).values, w)
            + hhalf_norm(prod) ** 2)


def energy_theta(theta: GridFunction, theta_t: GridFunction, cal_a: GridFunction,
                 holo_tol: float = 1e-6) -> float:
    """Basic quadratic energy of a holomorphic-trace field theta.

    integral (|theta_t|^2 + |theta|^2) / calA  +  ||theta||_{H^{1/2}}^2,
    where the middle pairing form i * integral d(theta) conj(theta) equals the
    multiplier seminorm because theta = H theta (checked).
    """
    scale = theta.l2()
    res = (theta - hilbert(theta)).l2()
    if res > holo_tol * max(1.0, scale):
        raise HolomorphicityError(f"(I-H) residual {res:.3e} exceeds {holo_tol:.1e}")
    w = 1.0 / cal_a.values.real
    return _wl2sq(theta_t.values, w) + _wl2sq(theta.values, w) + hhalf_norm(theta) ** 2


def hhalf_pairing(theta: GridFunction) -> float:
    """i * integral d/da'(theta) conj(theta) da', the quadrature twin of the
    squared H^{1/2} seminorm for holomorphic traces."""
    v = 1j * derivative(theta).values * np.conj(theta.values)
    return float(np.real(np.sum(v)) * TWO_PI / theta.n)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def taylor_sign(state: WaveState) -> GridFunction:
    """Pointwise Taylor sign A1 / |Z_a| (the negated normal pressure gradient)."""
    return GridFunction(state.a1.values.real / np.abs(state.za.values))


@dataclass(frozen=True)
class ChordArcResult:
    delta: float
    self_intersection: bool


def chord_arc(state: WaveState, max_points: int = 512) -> ChordArcResult:
    """Minimum chord/arc ratio over grid pairs of the periodized curve.

    For each pair both joining paths are considered: the direct one and the
    one wrapping through the period (the partner point shifted by 2*pi).
    Arc lengths are trapezoid integrals of |Z_a|.  A pair with vanishing
    chord but finite arc flags a self-intersection and returns delta 0.
    """
    n = state.n
    stride = max(1, n // max_points)
    x = nodes(n)
    z = x + state.pos.values
    speed = np.abs(state.za.values)
    # cumulative arclength at the nodes (trapezoid, periodic)
    mids = 0.5 * (speed + np.roll(speed, -1)) * (TWO_PI / n)
    s = np.concatenate([[0.0], np.cumsum(mids)])  # s[j] = length from node 0 to node j
    total = s[-1]
    idx = np.arange(0, n, stride)
    zs, ss = z[idx], s[idx]
    dz = zs[:, None] - zs[None, :]
    ds = np.abs(ss[:, None] - ss[None, :])
    arc_direct = ds
    arc_wrap = total - ds
    sign = np.sign(x[idx][:, None] - x[idx][None, :])
    chord_direct = np.abs(dz)
    chord_wrap = np.abs(dz - TWO_PI * sign)
    eye = np.eye(idx.size, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(eye, np.inf, chord_direct / arc_direct)
        r2 = np.where(eye, np.inf, chord_wrap / arc_wrap)
    pinch = ((chord_direct < 1e-12) & (arc_direct > 1e-6) & ~eye) | (
        (chord_wrap < 1e-12) & (arc_wrap > 1e-6) & ~eye)
    if np.any(pinch):
        return ChordArcResult(0.0, True)
    delta = float(min(np.min(r1), np.min(r2)))
    return ChordArcResult(min(delta, 1.0), False)


def chord_arc_delta(state: WaveState, max_points: int = 512) -> float:
    return chord_arc(state, max_points).delta


# ---------------------------------------------------------------------------
# report + monitor
# ---------------------------------------------------------------------------

PANEL_KEYS = (
    "D2_Zttbar_L2",
    "Ztbar_alpha_L2",
    "Zttbar_alpha_L2",
    "inv_Za_Linf",
    "Ztt_plus_i_Linf",
    "A1_Linf",
    "d_inv_Za_L2",
    "b_alpha_Linf",
    "D_Ztbar_Linf",
    "D_Ztt_Linf",
    "PA_dZt_over_Za_Linf",
    "PA_Zt_dinvZa_Linf",
    "D_b_alpha_L2",
)

CSV_COLUMNS = (
    "t", "Ea", "Eb", "frakE", "calE", "E2", "E3",
    "taylor_min", "chord_arc_delta", "holo_Zt", "holo_Za", "at_over_a_sup",
) + PANEL_KEYS


@dataclass
class EnergyReport:
    """One time slice of every scalar diagnostic."""

    t: float
    ea: float
    eb: float
    frak_e: float
    cal_e: float
    e2: float
    e3: float
    taylor_min: float
    chord_arc_delta: float
    holo_zt: float
    holo_za: float
    at_over_a_sup: float
    panel: dict = field(default_factory=dict)
    under_resolved: bool = False
    self_intersection: bool = False

    def row(self) -> list[float]:
        head = [self.t, self.ea, self.eb, self.frak_e, self.cal_e, self.e2, self.e3,
                self.taylor_min, self.chord_arc_delta, self.holo_zt, self.holo_za,
                self.at_over_a_sup]
        return head + [self.panel[k] for k in PANEL_KEYS]

    def has_nan(self) -> bool:
        return any(not math.isfinite(v) for v in self.row())


def appendix_panel(state: WaveState) -> dict:
    """The named quantity panel tracked along every run."""
    q = state.inv_za
    ztb = state.vel.conj()
    zttb = state.ztt.conj()
    dq = derivative(q)
    db = derivative(state.b)
    ratio = state.vel * q
    return {
        "D2_Zttbar_L2": (q * derivative(q * derivative(zttb))).l2(),
        "Ztbar_alpha_L2": derivative(ztb).l2(),
        "Zttbar_alpha_L2": derivative(zttb).l2(),
        "inv_Za_Linf": q.linf(),
        "Ztt_plus_i_Linf": (state.ztt + 1j).linf(),
        "A1_Linf": state.a1.linf(),
        "d_inv_Za_L2": dq.l2(),
        "b_alpha_Linf": db.linf(),
        "D_Ztbar_Linf": (q * derivative(ztb)).linf(),
        "D_Ztt_Linf": (q * derivative(state.ztt)).linf(),
        "PA_dZt_over_Za_Linf": derivative(proj_anti(ratio)).linf(),
        "PA_Zt_dinvZa_Linf": proj_anti(state.vel * dq).linf(),
        "D_b_alpha_L2": (q * derivative(db)).l2(),
    }


def energy_report(state: WaveState, settings: StepSettings = DEFAULT_SETTINGS,
                  chord_arc_max_points: int = 512, eb_squared_tail: bool = False) -> EnergyReport:
    rates = time_rates(state, settings)
    ea = energy_ea(state, rates, settings)
    eb = energy_eb(state, rates, settings, eb_squared_tail)
    frak = ea + eb + (state.ztt.conj() - 1j).linf()
    cal = energy_cal(state)
    under = False
    try:
        e2 = energy_k(state, 2, rates, settings)
        e3 = energy_k(state, 3, rates, settings)
    except UnderResolvedError:
        under = True
        e2 = energy_k(state, 2, rates, settings, check_resolution=False)
        e3 = energy_k(state, 3, rates, settings, check_resolution=False)
    ca = chord_arc(state, chord_arc_max_points)
    return EnergyReport(
        t=state.t,
        ea=ea,
        eb=eb,
        frak_e=frak,
        cal_e=cal,
        e2=e2,
        e3=e3,
        taylor_min=float(np.min(taylor_sign(state).values.real)),
        chord_arc_delta=ca.delta,
        holo_zt=state.holo_residual_vel,
        holo_za=state.holo_residual_za,
        at_over_a_sup=state.at_over_a.linf(),
        panel=appendix_panel(state),
        under_resolved=under,
        self_intersection=ca.self_intersection,
    )


@dataclass(frozen=True)
class MonitorPolicy:
    kappa: float = 50.0
    taylor_floor: float = 1e-8
    chord_arc_floor: float = 1e-4


@dataclass(frozen=True)
class Decision:
    stop: bool
    reason: str = ""
    detail: str = ""


def blowup_decision(report: EnergyReport, e0: float, policy: MonitorPolicy) -> Decision:
    """Stop on energy growth past kappa * E(0), degenerate geometry, loss of
    resolution, self-intersection, or any non-finite report field."""
    if report.has_nan():
        return Decision(True, "blowup_monitor", "nan_detected")
    if report.self_intersection:
        return Decision(True, "self_intersection", "chord collapse with finite arc")
    if report.frak_e > policy.kappa * e0:
        return Decision(True, "blowup_monitor", f"frakE {report.frak_e:.6g} > {policy.kappa:g} * {e0:.6g}")
    if report.taylor_min < policy.taylor_floor:
        return Decision(True, "blowup_monitor", f"taylor_min {report.taylor_min:.3e} below floor")
    if report.chord_arc_delta < policy.chord_arc_floor:
        return Decision(True, "blowup_monitor", f"chord_arc {report.chord_arc_delta:.3e} below floor")
    if report.under_resolved:
        return Decision(True, "blowup_monitor", "under_resolved")
    return Decision(False)


__all__ = [
    "TimeRates", "time_rates",
    "energy_ea", "energy_eb", "energy_frak", "energy_cal", "energy_k",
    "energy_theta", "hhalf_pairing",
    "taylor_sign", "chord_arc", "chord_arc_delta", "ChordArcResult",
    "EnergyReport", "energy_report", "appendix_panel",
    "MonitorPolicy", "Decision", "blowup_decision",
    "PANEL_KEYS", "CSV_COLUMNS",
]
