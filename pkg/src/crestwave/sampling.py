"""Random band-limited fields for tests and the verification battery."""

from __future__ import annotations

import numpy as np

from .grid import GridFunction, modes


def random_band_limited(
    n: int,
    kmax: int,
    rng: np.random.Generator,
    *,
    real: bool = False,
    mean_zero: bool = False,
    holomorphic: bool = False,
    scale: float = 1.0,
) -> GridFunction:
    """Random function with spectrum supported on |k| <= kmax.

    Coefficients are complex Gaussian, damped by 1/(1+|k|) so the fields look
    like smooth waves rather than noise.  holomorphic keeps only k < 0.
    """
    k = modes(n)
    c = np.zeros(n, dtype=np.complex128)
    band = np.abs(k) <= kmax
    cnt = int(band.sum())
    raw = rng.standard_normal(cnt) + 1j * rng.standard_normal(cnt)
    c[band] = raw / (1.0 + np.abs(k[band]))
    if holomorphic:
        c[k >= 0] = 0.0
    if mean_zero:
        c[0] = 0.0
    g = GridFunction.from_coeffs(scale * c)
    if real:
        g = GridFunction((g + g.conj()).values * 0.5)
    return g


def random_admissible_pair(
    n: int,
    rng: np.random.Generator,
    *,
    kmax: int | None = None,
    geometry_scale: float = 0.1,
    velocity_scale: float = 0.1,
) -> tuple[GridFunction, GridFunction]:
    """Constraint-satisfying (P, Zt): P holomorphic, conj(Zt) holomorphic mean-free.

    The sample is rescaled so ||dP/da'||_inf = geometry_scale, keeping
    1 + dP/da' well away from zero, and ||Zt||_inf = velocity_scale.
    """
    if kmax is None:
        # 1/(1 + dP) fills the spectrum geometrically; n/10 of content keeps
        # its aliased tail (and hence the constraint residuals) below 1e-8
        kmax = n // 10
    from .spectral import derivative  # local import avoids a cycle at module load

    p = random_band_limited(n, kmax, rng, holomorphic=True)
    slope = derivative(p).linf()
    if slope > 0:
        p = (geometry_scale / slope) * p
    ztbar = random_band_limited(n, kmax, rng, holomorphic=True, mean_zero=True)
    if ztbar.linf() > 0:
        ztbar = (velocity_scale / ztbar.linf()) * ztbar
    return p, ztbar.conj()


__all__ = ["random_band_limited", "random_admissible_pair"]
