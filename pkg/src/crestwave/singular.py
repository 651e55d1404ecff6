"""Commutators and multilinear singular-integral operators.

Production-path operators are pure multiplier algebra, O(n log n):

    [f, H] g = f * Hg - H(f g)

The periodized principal-value kernels appearing in the quadrature forms are

    1/(x - y)      ->  (1/2) cot((x - y)/2)
    1/(x - y)^2    ->  1/(4 sin^2((x - y)/2))

and more generally 1/(x-y)^p periodizes to (-1)^(p-1)/(p-1)! times the
(p-1)-st derivative of (1/2)cot(u/2).  Difference quotients take their
removable-singularity limits on the diagonal: (f(x)-f(y))/(2 tan((x-y)/2))
and (f(x)-f(y))/(2 sin((x-y)/2)) both tend to f'(x).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grid import TWO_PI, GridFunction, nodes
from .spectral import derivative, hilbert


# ---------------------------------------------------------------------------
# spectral (production) forms
# ---------------------------------------------------------------------------


def commutator_h(f: GridFunction, g: GridFunction, hilbert_op=hilbert) -> GridFunction:
    """[f, H] g = f * Hg - H(fg)."""
    return f * hilbert_op(g) - hilbert_op(f * g)


def commutator_h_dg(f: GridFunction, g: GridFunction, hilbert_op=hilbert) -> GridFunction:
    """[f, H] d/da' g."""
    return commutator_h(f, derivative(g), hilbert_op)


def double_bracket_same(g: GridFunction, h: GridFunction, hilbert_op=hilbert) -> GridFunction:
    """[g, g; h] through the commutator reduction

        [g, g; h] = 2 [g, H] d(g h) - [g^2, H] d h,

    which is exact for the periodized squared-difference kernel and costs
    O(n log n) instead of the O(n^2) kernel table.
    """
    term1 = commutator_h(g, derivative(g * h), hilbert_op)
    term2 = commutator_h(g * g, derivative(h), hilbert_op)
    return 2.0 * term1 - term2


# ---------------------------------------------------------------------------
# kernel tables
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _offsets(n: int) -> np.ndarray:
    x = nodes(n)
    u = x[:, None] - x[None, :]
    u.flags.writeable = False
    return u


def _periodized_kernel(n: int, power: int) -> np.ndarray:
    """Periodization of 1/u^power on the off-diagonal offset table."""
    u = _offsets(n)
    half = 0.5 * u
    with np.errstate(divide="ignore", invalid="ignore"):
        if power == 1:
            ker = 0.5 / np.tan(half)
        elif power == 2:
            ker = 0.25 / np.sin(half) ** 2
        elif power == 3:
            ker = np.cos(half) / (8.0 * np.sin(half) ** 3)
        elif power == 4:
            s2 = np.sin(half) ** 2
            ker = 1.0 / (48.0 * s2) + np.cos(half) ** 2 / (16.0 * s2 * s2)
        else:
            raise ValueError("periodized kernels implemented for powers 1..4")
    np.fill_diagonal(ker, 0.0)
    return ker


def diff_quotient_table(f: GridFunction, kind: str = "cot") -> np.ndarray:
    """Periodized difference-quotient table d_jk with diagonal f'(a'_j).

    kind="cot": (f_j - f_k) / (2 tan((a'_j - a'_k)/2)), the table paired with
    single-power kernels.  kind="sin": denominator 2 sin(.), the square root
    of the periodized squared kernel.
    """
    n = f.n
    u = _offsets(n)
    if kind == "cot":
        den = 2.0 * np.tan(0.5 * u)
    elif kind == "sin":
        den = 2.0 * np.sin(0.5 * u)
    else:
        raise ValueError("kind must be 'cot' or 'sin'")
    num = f.values[:, None] - f.values[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        table = num / den
    np.fill_diagonal(table, derivative(f).values)
    return table


def double_bracket(f: GridFunction, g: GridFunction, h: GridFunction) -> GridFunction:
    """[f, g; h]: pv integral of the two-difference-quotient kernel against h.

    Singularity-removed trapezoid rule with the periodized squared kernel;
    the diagonal weight is f' g' h.
    """
    tf = diff_quotient_table(f, "sin")
    tg = diff_quotient_table(g, "sin")
    weights = (tf * tg) @ h.values
    out = weights * (TWO_PI / f.n) / (np.pi * 1j)
    return GridFunction(out)


# ---------------------------------------------------------------------------
# multilinear Calderon-type operators (verification battery only)
# ---------------------------------------------------------------------------


def c1_operator(a_list, f: GridFunction) -> GridFunction:
    """C1(A_1,..,A_m, f): pv integral of prod(A_i(x)-A_i(y)) / (x-y)^{m+1} f(y).

    The off-diagonal 1/u part of the integrand cancels pairwise on the
    symmetric uniform grid; the diagonal carries the finite part

        -prod_i A_i' f' - (f/2) sum_i A_i'' prod_{l != i} A_l'.
    """
    m = len(a_list)
    if m < 1:
        raise ValueError("c1_operator requires at least one A")
    n = f.n
    ker = _periodized_kernel(n, m + 1).astype(np.complex128)
    table = ker.copy()
    for a in a_list:
        table *= a.values[:, None] - a.values[None, :]
    d1 = [derivative(a).values for a in a_list]
    d2 = [derivative(a, 2).values for a in a_list]
    prod_d1 = np.prod(np.stack(d1), axis=0)
    fp = derivative(f).values
    corr = np.zeros(n, dtype=np.complex128)
    for i in range(m):
        part = np.ones(n, dtype=np.complex128)
        for l in range(m):
            part *= d2[i] if l == i else d1[l]
        corr += part
    diag = -prod_d1 * fp - 0.5 * f.values * corr
    out = (table @ f.values + diag) * (TWO_PI / n)
    return GridFunction(out)


def c2_operator(a_list, f: GridFunction) -> GridFunction:
    """C2(A, f): integral of prod(A_i(x)-A_i(y)) / (x-y)^m  d/dy f(y).

    The integrand is bounded; the diagonal limit is prod_i A_i' f'.
    """
    m = len(a_list)
    if m < 1:
        raise ValueError("c2_operator requires at least one A")
    n = f.n
    ker = _periodized_kernel(n, m).astype(np.complex128)
    table = ker.copy()
    for a in a_list:
        table *= a.values[:, None] - a.values[None, :]
    fp = derivative(f).values
    diag = np.prod(np.stack([derivative(a).values for a in a_list]), axis=0) * fp
    out = (table @ fp + diag) * (TWO_PI / n)
    return GridFunction(out)


__all__ = [
    "commutator_h",
    "commutator_h_dg",
    "double_bracket",
    "double_bracket_same",
    "diff_quotient_table",
    "c1_operator",
    "c2_operator",
]
