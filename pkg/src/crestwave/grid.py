"""Periodic grid functions with spectral access.

Everything in the solver lives on the uniform grid a'_j = 2*pi*j/n of the
periodic domain [0, 2*pi).  A GridFunction stores complex samples and caches
the discrete Fourier coefficients c_k of

    f(a') = sum_k c_k exp(i k a'),        k = -n/2 .. n/2-1.

Grid sizes are powers of two, n >= 16.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi

MIN_GRID = 16


@lru_cache(maxsize=32)
def modes(n: int) -> np.ndarray:
    """Integer wavenumbers in FFT order: [0, 1, .., n/2-1, -n/2, .., -1]."""
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    k.flags.writeable = False
    return k


@lru_cache(maxsize=32)
def nodes(n: int) -> np.ndarray:
    x = TWO_PI * np.arange(n) / n
    x.flags.writeable = False
    return x


def _check_size(n: int) -> None:
    if n < MIN_GRID or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= {MIN_GRID}, got {n}")


class GridFunction:
    """Immutable complex samples of a 2*pi-periodic function on n uniform nodes."""

    __slots__ = ("values", "_coeffs")

    def __init__(self, values, coeffs=None):
        values = np.array(values, dtype=np.complex128, copy=True)
        if values.ndim != 1:
            raise ValueError("GridFunction values must be one-dimensional")
        _check_size(values.size)
        values.flags.writeable = False
        self.values = values
        self._coeffs = coeffs

    # ---- constructors -------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs) -> "GridFunction":
        """Build from FFT-ordered coefficients c_k (f = sum c_k e^{ika'})."""
        coeffs = np.array(coeffs, dtype=np.complex128, copy=True)
        _check_size(coeffs.size)
        values = np.fft.ifft(coeffs * coeffs.size)
        coeffs.flags.writeable = False
        return cls(values, coeffs)

    @classmethod
    def from_callable(cls, fn, n: int) -> "GridFunction":
        return cls(np.asarray(fn(nodes(n)), dtype=np.complex128))

    @classmethod
    def zeros(cls, n: int) -> "GridFunction":
        _check_size(n)
        return cls(np.zeros(n, dtype=np.complex128), np.zeros(n, dtype=np.complex128))

    @classmethod
    def constant(cls, c, n: int) -> "GridFunction":
        return cls(np.full(n, c, dtype=np.complex128))

    # ---- spectral access ----------------------------------------------

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def coeffs(self) -> np.ndarray:
        """FFT-ordered coefficients; computed once and cached."""
        if self._coeffs is None:
            c = np.fft.fft(self.values) / self.n
            c.flags.writeable = False
            self._coeffs = c
        return self._coeffs

    def spectrum(self) -> "Spectrum":
        return Spectrum(np.fft.fftshift(self.coeffs), modes(self.n)[np.fft.fftshift(np.arange(self.n))])

    @property
    def k(self) -> np.ndarray:
        return modes(self.n)

    @property
    def x(self) -> np.ndarray:
        return nodes(self.n)

    # ---- pointwise algebra ---------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            if other.n != self.n:
                raise ValueError("grid size mismatch")
            return GridFunction(op(self.values, other.values))
        return GridFunction(op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return GridFunction(other - self.values)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __rtruediv__(self, other):
        return GridFunction(other / self.values)

    def __neg__(self):
        return GridFunction(-self.values)

    def conj(self) -> "GridFunction":
        return GridFunction(np.conj(self.values))

    @property
    def real(self) -> "GridFunction":
        return GridFunction(self.values.real.astype(np.complex128))

    @property
    def imag(self) -> "GridFunction":
        return GridFunction(self.values.imag.astype(np.complex128))

    # ---- norms ----------------------------------------------------------

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def l2(self) -> float:
        """Continuum L2 norm on [0, 2*pi): (2*pi/n * sum |f_j|^2)^(1/2)."""
        return float(np.sqrt(TWO_PI / self.n * np.sum(np.abs(self.values) ** 2)))

    def linf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"GridFunction(n={self.n}, linf={self.linf():.3g})"


@dataclass(frozen=True)
class Spectrum:
    """Coefficients c_k for k = -n/2 .. n/2-1 in increasing-k order."""

    coeffs: np.ndarray
    k: np.ndarray

    @property
    def n(self) -> int:
        return self.coeffs.size

    def to_grid(self) -> GridFunction:
        return GridFunction.from_coeffs(np.fft.ifftshift(self.coeffs))

    def conjugate_symmetry_defect(self) -> float:
        """max_k |c_{-k} - conj(c_k)|; zero for real-valued grid functions."""
        c = self.coeffs
        n = self.n
        # index of wavenumber k is k + n/2; the unpaired Nyquist row is skipped
        ks = np.arange(-n // 2 + 1, n // 2)
        defect = c[ks + n // 2] - np.conj(c[-ks + n // 2])
        return float(np.max(np.abs(defect)))
