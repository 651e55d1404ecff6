"""Construction, validation and mollification of admissible initial data.

Admissible data satisfy, on the grid: conj(Zt) and Z_a - 1 are holomorphic
traces (modes k < 0), conj(Zt) is mean-free, and min |Z_a| > 0.  Mollifying
by eps evaluates the holomorphic extensions at depth eps, i.e. damps mode k
by exp(-|k| eps); mollification therefore composes additively in eps and can
only shrink every constituent norm of the boundary energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import WaveState
from .errors import ValidationError
from .grid import GridFunction, modes
from .spectral import derivative, hilbert, holomorphic_residual, poisson_extend

HOLO_TOL = 1e-10
JAC_FLOOR = 1e-6


@dataclass(frozen=True)
class ValidationRecord:
    residuals: dict
    passed: bool

    def worst(self) -> float:
        return max(self.residuals.values())


@dataclass(frozen=True)
class InitialData:
    pos0: GridFunction
    vel0: GridFunction
    family: str
    params: dict = field(default_factory=dict)
    mollify_eps: float = 0.0
    validation: ValidationRecord | None = None

    @property
    def n(self) -> int:
        return self.pos0.n

    def state(self) -> WaveState:
        return WaveState(0.0, self.pos0, self.vel0)


def validate(pos0: GridFunction, vel0: GridFunction) -> ValidationRecord:
    """Residual record for the admissibility invariants (side-effect free)."""
    vel_bar = vel0.conj()
    za = derivative(pos0) + 1.0
    residuals = {
        "holo_vel": holomorphic_residual(vel_bar),
        "holo_za": holomorphic_residual(za - 1.0),
        "mean_vel_bar": abs(vel_bar.mean()),
        "jac_defect": max(0.0, JAC_FLOOR - float(np.min(np.abs(za.values)))),
    }
    passed = (residuals["holo_vel"] < HOLO_TOL
              and residuals["holo_za"] < HOLO_TOL
              and residuals["mean_vel_bar"] < HOLO_TOL
              and residuals["jac_defect"] == 0.0)
    return ValidationRecord(residuals, passed)


def _finalize(pos0, vel0, family, params, eps=0.0) -> InitialData:
    record = validate(pos0, vel0)
    if not record.passed:
        raise ValidationError(f"{family} data failed validation: {record.residuals}")
    return InitialData(pos0, vel0, family, params, eps, record)


def make_flat(n: int) -> InitialData:
    return _finalize(GridFunction.zeros(n), GridFunction.zeros(n), "flat", {})


def make_smooth_wave(n: int, amplitude: float, mode: int, velocity_scale: float = 1.0) -> InitialData:
    """Single holomorphic mode P = a e^{-i m a'} with the linear traveling-wave
    velocity scaled by velocity_scale (0 releases the wave from rest)."""
    if mode < 1:
        raise ValidationError("mode must be a positive integer")
    if amplitude * mode >= 1.0:
        # |dP/da'| = a*m: beyond 1 the tangent winds and the curve loops
        raise ValidationError(f"slope a*m = {amplitude * mode:g} must be < 1 for a graph-like interface")
    x = GridFunction.zeros(n).x
    p = GridFunction(amplitude * np.exp(-1j * mode * x))
    vel_bar = GridFunction(-1j * velocity_scale * np.sqrt(mode) * amplitude * np.exp(-1j * mode * x))
    return _finalize(p, vel_bar.conj(), "smooth_wave",
                     {"amplitude": amplitude, "mode": mode, "velocity_scale": velocity_scale})


def _binomial_coeffs(beta: float, q: float, mmax: int) -> np.ndarray:
    """Coefficients of (1 - q w)^beta = sum_m c_m w^m, m = 0..mmax."""
    c = np.empty(mmax + 1)
    c[0] = 1.0
    for m in range(1, mmax + 1):
        c[m] = c[m - 1] * (m - 1 - beta) / m * q
    return c


def make_near_crest(n: int, r: float, q: float, velocity_scale: float = 0.0) -> InitialData:
    """Interface whose map derivative is (1 - q e^{-i a'})^(r-1).

    As q -> 1 the surface develops a corner of interior angle r*pi at a' = 0;
    for r < 1/2 the boundary energy stays finite while the Taylor sign
    degenerates.  The series is truncated at |k| = n/3 to stay inside the
    dealiased band.  The default is release from rest; a nonzero
    velocity_scale uses the bounded profile conj(Zt) = vs * (1/Z_a - 1).
    """
    if not (0.0 < r < 0.5):
        raise ValidationError(f"crest exponent r must lie in (0, 1/2), got {r}")
    if not (0.0 < q < 1.0):
        raise ValidationError(f"crest sharpness q must lie in (0, 1), got {q}")
    mmax = n // 3
    k = modes(n)
    za_c = np.zeros(n, dtype=np.complex128)
    cm = _binomial_coeffs(r - 1.0, q, mmax)
    za_c[0] = cm[0]
    for m in range(1, mmax + 1):
        za_c[k == -m] = cm[m]
    pos_c = np.zeros(n, dtype=np.complex128)
    for m in range(1, mmax + 1):
        pos_c[k == -m] = za_c[k == -m] / (-1j * m)
    pos0 = GridFunction.from_coeffs(pos_c)
    if velocity_scale != 0.0:
        inv_c = np.zeros(n, dtype=np.complex128)
        dm = _binomial_coeffs(1.0 - r, q, mmax)
        for m in range(1, mmax + 1):
            inv_c[k == -m] = dm[m]
        vel_bar = GridFunction.from_coeffs(velocity_scale * inv_c)
        vel0 = vel_bar.conj()
    else:
        vel0 = GridFunction.zeros(n)
    return _finalize(pos0, vel0, "near_crest",
                     {"r": r, "q": q, "velocity_scale": velocity_scale})


def mollify(data: InitialData, eps: float) -> InitialData:
    """Evaluate the data's holomorphic extensions at depth eps > 0."""
    if eps <= 0:
        raise ValidationError("mollification depth eps must be positive")
    pos0 = poisson_extend(data.pos0, -eps)
    vel0 = poisson_extend(data.vel0, -eps)
    return _finalize(pos0, vel0, data.family, dict(data.params), data.mollify_eps + eps)


FAMILIES = ("flat", "smooth_wave", "near_crest")


def make_family(family: str, n: int, params: dict, eps: float = 0.0) -> InitialData:
    """Dispatch by family name; applies mollification when eps > 0."""
    if family == "flat":
        data = make_flat(n)
    elif family == "smooth_wave":
        data = make_smooth_wave(n, params.get("amplitude", 0.05), int(params.get("mode", 1)),
                                params.get("velocity_scale", 1.0))
    elif family == "near_crest":
        data = make_near_crest(n, params.get("r", 0.4), params.get("q", 0.9),
                               params.get("velocity_scale", 0.0))
    else:
        raise ValidationError(f"unknown data family {family!r}; expected one of {FAMILIES}")
    if eps > 0.0:
        data = mollify(data, eps)
    return data


__all__ = [
    "InitialData",
    "ValidationRecord",
    "validate",
    "make_flat",
    "make_smooth_wave",
    "make_near_crest",
    "make_family",
    "mollify",
    "FAMILIES",
]
