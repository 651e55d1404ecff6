"""Identity and inequality batteries.

The identity battery checks every dual-form relation the solver relies on:
spectral-vs-spectral relations to 1e-10, quadrature and finite-difference
relations to 1e-6.  The inequality battery sweeps randomized band-limited
inputs through the sharp Sobolev bound and the commutator estimates and
reports empirical max ratios LHS / (RHS without constant); the assertion
bounds (10, and 2 for the Sobolev form) are regression targets of this
artifact, not claimed sharp constants.  Deliberately broken operators are
re-run as negative controls so a vacuous pass cannot go unnoticed.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .diagnostics import hhalf_pairing
from .dynamics import MarkerSet, StepSettings, WaveState, step_rk4
from .grid import GridFunction, modes
from .initial import make_smooth_wave
from .quadrature import (
    commutator_dg_pv,
    double_bracket_pv,
    hardy_sup,
    hhalf_sq_quadrature,
    hilbert_pv,
    taylor_factor_quadrature,
)
from .sampling import random_admissible_pair, random_band_limited
from .singular import c1_operator, c2_operator, commutator_h, double_bracket
from .spectral import derivative, evaluate, hhalf_norm, hilbert, proj_anti, proj_holo

SPECTRAL_TOL = 1e-10
QUADRATURE_TOL = 1e-6
SOBOLEV_BOUND = 2.0 + 1e-6
GENERIC_BOUND = 10.0

# Flow-dependent operator identities that are not checked one by one: they
# enter the composite residuals instead (the interior Euler check and the
# term-by-term energy oracles exercise them together).
COVERED_BY_COMPOSITE = [
    {"identity": "second material derivative of transported fields",
     "covered_by": "interior_euler_residual"},
    {"identity": "wave-operator commutators with weighted derivatives",
     "covered_by": "energy_term_oracles"},
    {"identity": "material derivative of commutator expressions",
     "covered_by": "rate_of_weight_dual_form"},
    {"identity": "jacobian-ratio transport commutators",
     "covered_by": "marker_frame_consistency"},
]


def broken_hilbert(f: GridFunction) -> GridFunction:
    """Sign-flipped multiplier (+sgn k); used only as a negative control."""
    k = modes(f.n)
    mult = np.sign(k).astype(np.float64)
    mult[f.n // 2] = 0.0
    return GridFunction.from_coeffs(f.coeffs * mult)


def _b_two_forms(p, zt, hilbert_op):
    q = 1.0 / (derivative(p) + 1.0)
    b1 = commutator_h(zt, q - 1.0, hilbert_op).values.real + 2.0 * zt.values.real
    ratio = zt * q
    b2 = (ratio - hilbert_op(ratio)).values.real
    return float(np.max(np.abs(b1 - b2)))


def _a1_two_forms(zt, hilbert_op):
    c = commutator_h(zt, derivative(zt.conj()), hilbert_op)
    a1 = 1.0 - c.values.imag
    a1q = taylor_factor_quadrature(zt).values.real
    return float(np.max(np.abs(a1 - a1q)))


def _bracket_reduction(g1, g2, hilbert_op):
    lhs = (-2.0 * commutator_h(g1, derivative(g1 * g2), hilbert_op)
           + commutator_h(g1 * g1, derivative(g2), hilbert_op))
    rhs = -1.0 * double_bracket_pv(g1, g1, g2)
    return (lhs - rhs).linf()


def _material_fd_identities(n: int, dt: float):
    """Finite-difference checks of the transport commutator relations.

    Along marker paths, d/dt of a field G sampled at the moving markers is
    the material derivative (d/dt + b d/da') G.  The two relations checked:

      material(D conj Zt) - D conj(Ztt) = -(D Zt)(D conj Zt)
      material(d/da' conj Zt) - d/da' conj(Ztt) = -(db/da') d/da' conj Zt
    """
    data = make_smooth_wave(n, 0.05, 1)
    settings = StepSettings()
    state = data.state()
    markers = MarkerSet.uniform(32)
    for _ in range(3):
        state, markers = step_rk4(state, dt, settings, markers)

    def fields(s):
        q = s.inv_za
        ztb = s.vel.conj()
        return q * derivative(ztb), derivative(ztb)

    prev_state = state
    mid_state, mid_markers = step_rk4(prev_state, dt, settings, markers)
    next_state, _ = step_rk4(mid_state, dt, settings, mid_markers)

    # marker positions at the three time levels around the middle
    h_prev = markers.positions
    h_mid = mid_markers.positions
    h_next = step_rk4(mid_state, dt, settings, mid_markers)[1].positions

    g1_prev, g2_prev = fields(prev_state)
    g1_mid, g2_mid = fields(mid_state)
    g1_next, g2_next = fields(next_state)

    def material(gp, gn):
        return (evaluate(gn, h_next) - evaluate(gp, h_prev)) / (2.0 * dt)

    q = mid_state.inv_za
    ztb = mid_state.vel.conj()
    zttb = mid_state.ztt.conj()
    d_zt = mid_state.inv_za * derivative(mid_state.vel)
    d_ztb = q * derivative(ztb)
    rhs1 = q * derivative(zttb) - d_zt * d_ztb
    res1 = np.max(np.abs(material(g1_prev, g1_next) - evaluate(rhs1, h_mid)))

    db = derivative(mid_state.b)
    rhs2 = derivative(zttb) - db * derivative(ztb)
    res2 = np.max(np.abs(material(g2_prev, g2_next) - evaluate(rhs2, h_mid)))
    return float(res1), float(res2)


def run_identity_battery(n: int = 512, seed: int = 0, dt_fd: float = 2e-4) -> dict:
    """Per-identity max residuals; deterministic given (n, seed)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    p, zt = random_admissible_pair(n, rng)
    state = WaveState(0.0, p, zt)
    f = random_band_limited(n, n // 8, rng, mean_zero=True)
    g1 = random_band_limited(n, n // 8, rng)
    g2 = random_band_limited(n, n // 8, rng)

    identities = {}

    def record(name, residual, tol, kind):
        identities[name] = {
            "residual": float(residual),
            "tol": tol,
            "kind": kind,
            "pass": bool(residual <= tol),
        }

    # agreement of the two transport-velocity forms is limited by how well the
    # sampled state satisfies the holomorphic constraints, not by quadrature
    record("transport_velocity_two_forms", _b_two_forms(p, zt, hilbert),
           1e-7, "constraint")
    record("taylor_factor_two_forms", _a1_two_forms(zt, hilbert),
           QUADRATURE_TOL, "quadrature")
    record("hhalf_multiplier_vs_double_integral",
           abs(hhalf_norm(f) ** 2 - hhalf_sq_quadrature(f)) / max(1.0, hhalf_norm(f) ** 2),
           QUADRATURE_TOL, "quadrature")
    record("hhalf_multiplier_vs_pairing",
           abs(hhalf_norm(proj_holo(f)) ** 2 - hhalf_pairing(proj_holo(f)))
           / max(1.0, hhalf_norm(proj_holo(f)) ** 2),
           SPECTRAL_TOL, "spectral")
    record("bracket_reduction", _bracket_reduction(g1, g2, hilbert),
           QUADRATURE_TOL, "quadrature")
    record("hilbert_spectral_vs_pv", (hilbert(f) - hilbert_pv(f)).linf(),
           QUADRATURE_TOL, "quadrature")
    record("acceleration_two_routes", (state.ztt - state.ztt_via_calA()).linf(),
           SPECTRAL_TOL, "spectral")
    record("projection_partition", (proj_holo(g1) + proj_anti(g1) - g1).linf(),
           SPECTRAL_TOL, "spectral")
    record("projection_difference", (proj_holo(g1) - proj_anti(g1) - hilbert(g1)).linf(),
           SPECTRAL_TOL, "spectral")

    # operator Leibniz expansion [A, BC^2] = [A,B]C^2 + B[A,C]C + BC[A,C]
    # with A = multiplication by f, B = H, C = d/da'; the residual is measured
    # relative to the expression scale (the terms themselves are O(k^2))
    lhs = f * hilbert(derivative(g1, 2)) - hilbert(derivative(f * g1, 2))
    fp = derivative(f)
    term1 = f * hilbert(derivative(g1, 2)) - hilbert(f * derivative(g1, 2))
    term2 = hilbert(-1.0 * fp * derivative(g1))
    term3 = hilbert(derivative(-1.0 * fp * g1))
    record("operator_leibniz_expansion",
           (lhs - (term1 + term2 + term3)).linf() / max(1.0, lhs.linf()),
           SPECTRAL_TOL, "spectral")

    res1, res2 = _material_fd_identities(min(n, 256), dt_fd)
    record("material_weighted_derivative_commutator", res1, QUADRATURE_TOL, "finite_difference")
    record("material_plain_derivative_commutator", res2, QUADRATURE_TOL, "finite_difference")

    negative_controls = {
        "broken_hilbert_transport_velocity": _b_two_forms(p, zt, broken_hilbert),
        "broken_hilbert_taylor_factor": _a1_two_forms(zt, broken_hilbert),
        "broken_hilbert_bracket_reduction": _bracket_reduction(g1, g2, broken_hilbert),
    }

    return {
        "n": n,
        "seed": seed,
        "dt_fd": dt_fd,
        "identities": identities,
        "negative_controls": {k: float(v) for k, v in negative_controls.items()},
        "negative_controls_fail": bool(all(v > 1e-3 for v in negative_controls.values())),
        "covered_by_composite": COVERED_BY_COMPOSITE,
        "all_pass": bool(all(rec["pass"] for rec in identities.values())),
    }


# ---------------------------------------------------------------------------
# inequality battery
# ---------------------------------------------------------------------------


def _poisson_bump(n: int, width: float) -> GridFunction:
    """Sharply peaked mean-free bump (the near-extremal Sobolev family)."""
    k = np.abs(modes(n)).astype(np.float64)
    c = np.exp(-width * k).astype(np.complex128)
    c[0] = 0.0
    return GridFunction.from_coeffs(c)


def _safe_ratio(num: float, den: float) -> float:
    return num / den if den > 1e-14 else 0.0


def run_inequality_battery(n: int = 256, trials: int = 120, seed: int = 0) -> dict:
    """Empirical max ratios over randomized band-limited inputs."""
    if trials < 100:
        raise ValueError("inequality battery needs at least 100 trials")
    seeds = np.random.SeedSequence(seed).spawn(trials)
    ratios: dict[str, float] = {}
    argmax: dict[str, int] = {}

    def push(name, value, trial):
        if value > ratios.get(name, -1.0):
            ratios[name] = value
            argmax[name] = trial

    kmax = n // 6
    for trial in range(trials):
        rng = np.random.default_rng(seeds[trial])
        f = random_band_limited(n, kmax, rng, real=True, mean_zero=True)
        g = random_band_limited(n, kmax, rng, real=True, mean_zero=True)
        h = random_band_limited(n, kmax, rng)
        fp = derivative(f)
        gp = derivative(g)

        push("sobolev", _safe_ratio(f.linf() ** 2, f.l2() * fp.l2()), trial)
        push("hardy", _safe_ratio(hardy_sup(f), fp.l2() ** 2), trial)

        comm = commutator_h(f, g)
        push("commutator_l2_hhalf", _safe_ratio(comm.l2(), hhalf_norm(f) * g.l2()), trial)
        push("commutator_linf", _safe_ratio(comm.linf(), fp.l2() * g.l2()), trial)
        comm_dg = commutator_h(f, gp)
        push("commutator_derivative_l2", _safe_ratio(comm_dg.l2(), fp.l2() * hhalf_norm(g)), trial)

        br = double_bracket(f, g, h)
        push("bracket_l2", _safe_ratio(br.l2(), fp.l2() * gp.l2() * h.l2()), trial)
        push("bracket_linf", _safe_ratio(br.linf(), fp.l2() * gp.linf() * h.l2()), trial)

        nested = f * commutator_h(g, h) - commutator_h(g, f * h)
        push("nested_commutator_derivative_l2",
             _safe_ratio(derivative(nested).l2(), fp.l2() * gp.l2() * h.l2()), trial)

        c1a = c1_operator([f], h)
        push("calderon1_m1_l2", _safe_ratio(c1a.l2(), fp.linf() * h.l2()), trial)
        c1b = c1_operator([f, g], h)
        push("calderon1_m2_l2", _safe_ratio(c1b.l2(), fp.linf() * gp.linf() * h.l2()), trial)
        push("calderon1_m2_mixed", _safe_ratio(c1b.l2(), fp.l2() * gp.linf() * h.linf()), trial)

        c2a = c2_operator([f, g], h)
        push("calderon2_l2", _safe_ratio(c2a.l2(), fp.linf() * gp.linf() * h.l2()), trial)
        push("calderon2_mixed", _safe_ratio(c2a.l2(), fp.l2() * gp.linf() * h.linf()), trial)
        push("calderon2_derivative", _safe_ratio(c2a.l2(), f.linf() * gp.linf() * derivative(h).l2()), trial)

        wdenom = 1.0 + 0.8 * g.values.real / max(2.0 * g.linf(), 1e-12)
        w = GridFunction(wdenom.astype(np.complex128))
        push("hhalf_division",
             _safe_ratio(hhalf_norm(h), (1.0 / w).linf() * (hhalf_norm(w * h) + derivative(w).l2() * h.l2())),
             trial)

    # deterministic near-extremal bumps for the Sobolev ratio
    for i, width in enumerate((0.05, 0.1, 0.2, 0.4)):
        bump = _poisson_bump(n, width)
        push("sobolev", _safe_ratio(bump.linf() ** 2, bump.l2() * derivative(bump).l2()), -(i + 1))

    bounds = {name: (SOBOLEV_BOUND if name == "sobolev" else GENERIC_BOUND) for name in ratios}
    return {
        "n": n,
        "trials": trials,
        "seed": seed,
        "ratios": {k: float(v) for k, v in sorted(ratios.items())},
        "argmax_trial": {k: int(v) for k, v in sorted(argmax.items())},
        "bounds": bounds,
        "all_within_bounds": bool(all(ratios[k] <= bounds[k] for k in ratios)),
    }


def load_baseline() -> dict:
    """Stored reference ratios for the regression comparison."""
    with resources.files("crestwave.data").joinpath("inequality_baseline.json").open() as fh:
        return json.load(fh)


def compare_to_baseline(report: dict, factor: float = 1.2) -> dict:
    """Each ratio must not exceed its stored baseline by more than the factor."""
    base = load_baseline()["ratios"]
    failures = {k: (report["ratios"][k], base[k]) for k in base
                if report["ratios"].get(k, 0.0) > factor * base[k]}
    return {"pass": not failures, "failures": failures}


__all__ = [
    "run_identity_battery",
    "run_inequality_battery",
    "load_baseline",
    "compare_to_baseline",
    "broken_hilbert",
    "SPECTRAL_TOL",
    "QUADRATURE_TOL",
    "SOBOLEV_BOUND",
    "GENERIC_BOUND",
]
