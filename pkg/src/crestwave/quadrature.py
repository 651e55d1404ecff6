"""Principal-value quadrature oracles.

Independent O(n^2) realizations of the spectral operators, used by the test
suite and the verification battery as the second route of every dual-form
check.  All integrals use the singularity-removed trapezoid rule: the
integrand's value on the diagonal is replaced by its removable-singularity
limit, which keeps the rule spectrally accurate for smooth periodic data.
"""

from __future__ import annotations

import numpy as np

from .grid import TWO_PI, GridFunction
from .singular import _offsets, _periodized_kernel
from .spectral import derivative


def hilbert_pv(f: GridFunction) -> GridFunction:
    """pv cotangent-kernel quadrature of the Hilbert transform."""
    n = f.n
    ker = _periodized_kernel(n, 1)
    delta = f.values[None, :] - f.values[:, None]  # f(y) - f(x)
    acc = (ker * delta).sum(axis=1) - derivative(f).values
    return GridFunction(acc * (TWO_PI / n) / (np.pi * 1j))


def commutator_pv(f: GridFunction, g: GridFunction) -> GridFunction:
    """[f, H] g by quadrature: kernel (f(x)-f(y)) K1(x-y), diagonal f' g."""
    n = f.n
    ker = _periodized_kernel(n, 1)
    table = ker * (f.values[:, None] - f.values[None, :])
    acc = table @ g.values + derivative(f).values * g.values
    return GridFunction(acc * (TWO_PI / n) / (np.pi * 1j))


def commutator_dg_pv(f: GridFunction, g: GridFunction) -> GridFunction:
    """[f, H] d/da' g by quadrature, diagonal f' g'."""
    n = f.n
    ker = _periodized_kernel(n, 1)
    gp = derivative(g).values
    table = ker * (f.values[:, None] - f.values[None, :])
    acc = table @ gp + derivative(f).values * gp
    return GridFunction(acc * (TWO_PI / n) / (np.pi * 1j))


def double_bracket_pv(f: GridFunction, g: GridFunction, h: GridFunction) -> GridFunction:
    """[f, g; h] by quadrature with the squared periodized kernel."""
    n = f.n
    ker = _periodized_kernel(n, 2)
    table = ker * (f.values[:, None] - f.values[None, :]) * (g.values[:, None] - g.values[None, :])
    acc = table @ h.values + derivative(f).values * derivative(g).values * h.values
    return GridFunction(acc * (TWO_PI / n) / (np.pi * 1j))


def squared_difference_integral(f: GridFunction) -> np.ndarray:
    """For each x: integral of |f(x)-f(y)|^2 / (4 sin^2((x-y)/2)) dy.

    Diagonal limit |f'(x)|^2.  This is the kernel shared by the second form
    of the Taylor factor and by the Hardy-type bound.
    """
    n = f.n
    ker = _periodized_kernel(n, 2)
    diff2 = np.abs(f.values[:, None] - f.values[None, :]) ** 2
    acc = (ker * diff2).sum(axis=1) + np.abs(derivative(f).values) ** 2
    return acc * (TWO_PI / n)


def taylor_factor_quadrature(zt: GridFunction) -> GridFunction:
    """Second form of the Taylor factor: 1 + (1/2pi) * squared-difference integral."""
    return GridFunction(1.0 + squared_difference_integral(zt) / TWO_PI)


def hhalf_sq_quadrature(f: GridFunction) -> float:
    """Double-integral form of the squared H^{1/2} seminorm."""
    return float(np.real(np.sum(squared_difference_integral(f))) * (TWO_PI / f.n) / TWO_PI)


def hardy_sup(f: GridFunction) -> float:
    """sup_x of the squared-difference integral (Hardy-type quantity)."""
    return float(np.max(np.real(squared_difference_integral(f))))


__all__ = [
    "hilbert_pv",
    "commutator_pv",
    "commutator_dg_pv",
    "double_bracket_pv",
    "squared_difference_integral",
    "taylor_factor_quadrature",
    "hhalf_sq_quadrature",
    "hardy_sup",
]
