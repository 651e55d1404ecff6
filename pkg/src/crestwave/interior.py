"""Reconstruction of the holomorphic interior fields and the pressure.

Boundary traces extend into the lower half-plane by the Poisson multiplier
exp(-|k| |y|); for holomorphic traces this is evaluation of the holomorphic
extension at height y.  The pressure at height y < 0 is

    p(., y) = -|F(., y)|^2 / 2 - y + (K_y * |conj(Zt)|^2) / 2,

vanishing on the boundary and satisfying Lap p = -2 |F_z|^2.  The interior
Euler residual below is the master consistency check: a generalized solution
must satisfy

    Psi_z F_t - Psi_t F_z + conj(F) F_z - i Psi_z = -(d_x - i d_y) p

at every interior height.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_SETTINGS, StepSettings, WaveState
from .errors import HolomorphicityError
from .grid import GridFunction, modes
from .spectral import derivative, hhalf_norm, hilbert, poisson_extend


def _holo_defect(f: GridFunction) -> float:
    """L2 size of the modes with k > 0 (obstruction to a holomorphic trace)."""
    res = f - hilbert(f) - f.mean()
    return res.l2() / max(1.0, f.l2())


def extend_boundary_field(f: GridFunction, y: float, holo_tol: float = 1e-6) -> GridFunction:
    """Holomorphic extension of a trace to height y < 0 (Poisson multiplier)."""
    defect = _holo_defect(f)
    if defect > holo_tol:
        raise HolomorphicityError(f"trace has relative k>0 content {defect:.3e} > {holo_tol:.1e}")
    return poisson_extend(f, y)


def psi_t_over_psi_z(state: WaveState, y: float, holo_tol: float = 1e-6) -> GridFunction:
    """Interior value of Psi_t / Psi_z; its boundary trace is Zt/Z_a - b."""
    trace = state.vel * state.inv_za - state.b
    return extend_boundary_field(trace, y, holo_tol)


def f_t_interior(state: WaveState, dstate, y: float, holo_tol: float = 1e-6) -> GridFunction:
    """Interior time derivative of F: extension of conj(dZt/dt)."""
    _, dvel = dstate
    return extend_boundary_field(dvel.conj(), y, holo_tol)


def pressure(state: WaveState, y: float) -> GridFunction:
    """Real-valued pressure at height y < 0 (hydrostatic -y at rest)."""
    if y >= 0:
        raise ValueError("pressure is evaluated at interior heights y < 0")
    f_y = poisson_extend(state.vel.conj(), y)
    speed2 = GridFunction(np.abs(state.vel.values) ** 2)
    conv = poisson_extend(speed2, y)
    vals = -0.5 * np.abs(f_y.values) ** 2 - y + 0.5 * conv.values.real
    return GridFunction(vals)


@dataclass(frozen=True)
class InteriorSlice:
    """All reconstructed fields at one height, exportable as CSV."""

    y: float
    f: GridFunction
    psi_z: GridFunction
    inv_psi_z: GridFunction
    psi_t_over_psi_z: GridFunction
    f_t: GridFunction
    pressure: GridFunction


def interior_slice(state: WaveState, dstate, y: float, holo_tol: float = 1e-6) -> InteriorSlice:
    za_part = state.za - 1.0
    return InteriorSlice(
        y=y,
        f=extend_boundary_field(state.vel.conj(), y, holo_tol),
        psi_z=extend_boundary_field(za_part, y, holo_tol) + 1.0,
        inv_psi_z=extend_boundary_field(state.inv_za - 1.0, y, holo_tol) + 1.0,
        psi_t_over_psi_z=psi_t_over_psi_z(state, y, holo_tol),
        f_t=f_t_interior(state, dstate, y, holo_tol),
        pressure=pressure(state, y),
    )


def euler_residual(state: WaveState, dstate, y_grid, dy: float = 1e-3,
                   holo_tol: float = 1e-6) -> float:
    """max over heights of || LHS - RHS ||_L2 of the interior Euler identity.

    d_x is spectral at each height; d_y of the pressure is a centered
    difference with step dy.
    """
    dpos, dvel = dstate
    worst = 0.0
    for y in y_grid:
        if y >= 0 or y + dy >= 0:
            raise ValueError("heights must satisfy y + dy < 0")
        psi_z = extend_boundary_field(state.za - 1.0, y, holo_tol) + 1.0
        psi_t = extend_boundary_field(dpos, y, holo_tol)
        f_t = extend_boundary_field(dvel.conj(), y, holo_tol)
        f_z = extend_boundary_field(derivative(state.vel.conj()), y, holo_tol)
        f_bar = poisson_extend(state.vel.conj(), y).conj()
        lhs = psi_z * f_t - psi_t * f_z + f_bar * f_z - 1j * psi_z
        dx_p = derivative(pressure(state, y))
        dy_p = (pressure(state, y + dy) - pressure(state, y - dy)) * (0.5 / dy)
        rhs = -1.0 * (dx_p - 1j * dy_p)
        worst = max(worst, (lhs - rhs).l2())
    return worst


def pressure_laplacian_residual(state: WaveState, y: float, dy: float = 1e-3) -> float:
    """|| Lap p + 2 |F_z|^2 ||_L2 at height y (spectral d_xx, centered d_yy)."""
    p_mid = pressure(state, y)
    p_up = pressure(state, y + dy)
    p_dn = pressure(state, y - dy)
    lap = derivative(p_mid, 2) + (p_up - 2.0 * p_mid + p_dn) * (1.0 / dy ** 2)
    f_z = poisson_extend(derivative(state.vel.conj()), y)
    target = GridFunction(-2.0 * np.abs(f_z.values) ** 2)
    return (lap - target).l2()


_E1_TERMS = ("Fz_L2", "D2F_L2", "dinv_L2", "inv_Linf", "qD2F_Hhalf", "DF_Hhalf", "D2inv_L2")


def domain_energy_e1(state: WaveState, y_grid, return_details: bool = False):
    """Interior form of the seven-term boundary energy.

    Each addend is the squared norm of a holomorphic field, evaluated at the
    boundary and at every height in y_grid; the supremum over heights is
    approximated by the maximum, which the Poisson contraction pins to the
    boundary trace.
    """
    q = state.inv_za
    ztb = state.vel.conj()
    d_ztb = derivative(ztb)
    inner = q * d_ztb
    d2v = q * derivative(inner)
    dq = derivative(q)
    d2q = q * derivative(q * dq)
    traces = {
        "Fz_L2": (d_ztb, "l2"),
        "D2F_L2": (d2v, "l2"),
        "dinv_L2": (dq, "l2"),
        "inv_Linf": (q, "linf"),
        "qD2F_Hhalf": (q * d2v, "hhalf"),
        "DF_Hhalf": (inner, "hhalf"),
        "D2inv_L2": (d2q, "l2"),
    }

    def norm_at(g, kind, y):
        gy = g if y == 0.0 else poisson_extend(g, y)
        if kind == "l2":
            return gy.l2() ** 2
        if kind == "linf":
            return gy.linf() ** 2
        return hhalf_norm(gy) ** 2

    details = {}
    total = 0.0
    for name in _E1_TERMS:
        g, kind = traces[name]
        values = {0.0: norm_at(g, kind, 0.0)}
        for y in y_grid:
            values[y] = norm_at(g, kind, y)
        details[name] = values
        total += max(values.values())
    if return_details:
        return total, details
    return total


__all__ = [
    "extend_boundary_field",
    "psi_t_over_psi_z",
    "f_t_interior",
    "pressure",
    "InteriorSlice",
    "interior_slice",
    "euler_residual",
    "pressure_laplacian_residual",
    "domain_energy_e1",
]
