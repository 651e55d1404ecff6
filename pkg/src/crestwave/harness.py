"""Run configuration, persistence and the sweep / study drivers.

Configuration is INI-style sectioned key=value text (see the README for the
grammar).  Every run directory is self-describing: a canonical config
snapshot, the energy CSV, interface snapshots, and a JSON summary with the
termination reason and code/config hashes.  Identical config and seed
produce byte-identical CSV output.
"""

from __future__ import annotations

import configparser
import hashlib
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics, initial, interior, verify
from .diagnostics import CSV_COLUMNS, MonitorPolicy
from .dynamics import MarkerSet, StepSettings, Trajectory, rhs, run
from .errors import ConfigError, ValidationError
from .grid import nodes


@dataclass(frozen=True)
class SimConfig:
    n: int = 512
    dt: float | None = None
    cfl: float | None = 0.5
    horizon: float = 1.0
    report_dt: float = 0.05
    family: str = "flat"
    amplitude: float = 0.05
    mode: int = 1
    velocity_scale: float | None = None
    crest_r: float = 0.4
    crest_q: float = 0.9
    mollify_eps: float = 0.0
    dealias: bool = True
    krasny_floor: float = 0.0
    projection: bool = False
    jac_floor: float = 1e-6
    a1_tol: float = 1e-10
    kappa: float = 50.0
    taylor_floor: float = 1e-8
    chord_arc_floor: float = 1e-4
    eb_squared_tail: bool = False
    chord_arc_max_points: int = 512
    markers: int = 0
    outdir: str = "runs/out"
    seed: int = 0
    snapshot_stride: int = 8
    verify_trials: int = 120

    def validated(self) -> "SimConfig":
        if self.n < 16 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"[grid] n must be a power of two >= 16, got {self.n}")
        if (self.dt is None) == (self.cfl is None):
            raise ConfigError("[time] exactly one of dt and cfl must be set")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("[time] dt must be positive")
        if self.cfl is not None and self.cfl <= 0:
            raise ConfigError("[time] cfl must be positive")
        if self.horizon <= 0 or self.report_dt <= 0:
            raise ConfigError("[time] horizon and report_dt must be positive")
        for name in ("jac_floor", "a1_tol", "kappa", "taylor_floor", "chord_arc_floor"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"[guards/monitor] {name} must be positive")
        if self.family not in initial.FAMILIES:
            raise ConfigError(f"[data] unknown family {self.family!r}")
        return self


# (section, key) -> (attribute, parser)
_BOOL = lambda s: s.strip().lower() in ("1", "true", "yes", "on")
_SCHEMA = {
    ("grid", "n"): ("n", int),
    ("time", "dt"): ("dt", float),
    ("time", "cfl"): ("cfl", float),
    ("time", "horizon"): ("horizon", float),
    ("time", "report_dt"): ("report_dt", float),
    ("data", "family"): ("family", str),
    ("data", "amplitude"): ("amplitude", float),
    ("data", "mode"): ("mode", int),
    ("data", "velocity_scale"): ("velocity_scale", float),
    ("data", "crest_r"): ("crest_r", float),
    ("data", "crest_q"): ("crest_q", float),
    ("data", "mollify_eps"): ("mollify_eps", float),
    ("filter", "dealias"): ("dealias", _BOOL),
    ("filter", "krasny_floor"): ("krasny_floor", float),
    ("filter", "projection"): ("projection", _BOOL),
    ("guards", "jac_floor"): ("jac_floor", float),
    ("guards", "a1_tol"): ("a1_tol", float),
    ("monitor", "kappa"): ("kappa", float),
    ("monitor", "taylor_floor"): ("taylor_floor", float),
    ("monitor", "chord_arc_floor"): ("chord_arc_floor", float),
    ("diagnostics", "eb_squared_tail"): ("eb_squared_tail", _BOOL),
    ("diagnostics", "chord_arc_max_points"): ("chord_arc_max_points", int),
    ("diagnostics", "markers"): ("markers", int),
    ("output", "dir"): ("outdir", str),
    ("output", "seed"): ("seed", int),
    ("output", "snapshot_stride"): ("snapshot_stride", int),
    ("verify", "trials"): ("verify_trials", int),
}
_ATTR_TO_SECTION = {attr: (sec, key) for (sec, key), (attr, _) in _SCHEMA.items()}


def parse_config(path: str | None = None, overrides: list[str] | None = None) -> SimConfig:
    """Load an INI file (optional) and apply section.key=value overrides."""
    values: dict[str, object] = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                entry = _SCHEMA.get((section, key))
                if entry is None:
                    raise ConfigError(f"unknown config entry [{section}] {key}")
                attr, conv = entry
                try:
                    values[attr] = conv(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        section, key = dotted.split(".", 1)
        entry = _SCHEMA.get((section.strip(), key.strip()))
        if entry is None:
            raise ConfigError(f"unknown override [{section}] {key}")
        attr, conv = entry
        try:
            values[attr] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad override value for {dotted}: {raw!r} ({exc})") from exc
    if "dt" in values and "cfl" not in values:
        values["cfl"] = None
    return SimConfig(**values).validated()


def config_ini(cfg: SimConfig) -> str:
    """Canonical INI snapshot (fixed order; the basis of the config hash)."""
    lines = []
    last_section = None
    for (section, key), (attr, _) in _SCHEMA.items():
        value = getattr(cfg, attr)
        if value is None:
            continue
        if section != last_section:
            if last_section is not None:
                lines.append("")
            lines.append(f"[{section}]")
            last_section = section
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: SimConfig) -> str:
    return hashlib.sha256(config_ini(cfg).encode()).hexdigest()[:16]


def code_hash() -> str:
    digest = hashlib.sha256()
    pkg = Path(__file__).parent
    for path in sorted(pkg.rglob("*.py")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()[:16]


def build_data(cfg: SimConfig) -> initial.InitialData:
    vs = cfg.velocity_scale
    if vs is None:
        vs = 1.0 if cfg.family == "smooth_wave" else 0.0
    params = {"amplitude": cfg.amplitude, "mode": cfg.mode, "velocity_scale": vs,
              "r": cfg.crest_r, "q": cfg.crest_q}
    return initial.make_family(cfg.family, cfg.n, params, cfg.mollify_eps)


def step_settings(cfg: SimConfig) -> StepSettings:
    return StepSettings(dealias=cfg.dealias, krasny_floor=cfg.krasny_floor,
                        project_velocity=cfg.projection, jac_floor=cfg.jac_floor,
                        a1_tol=cfg.a1_tol, cfl=cfg.cfl if cfg.cfl is not None else 0.5)


def monitor_policy(cfg: SimConfig) -> MonitorPolicy:
    return MonitorPolicy(kappa=cfg.kappa, taylor_floor=cfg.taylor_floor,
                         chord_arc_floor=cfg.chord_arc_floor)


@dataclass
class RunRecord:
    config: SimConfig
    trajectory: Trajectory
    wall_seconds: float
    config_hash: str
    code_hash: str
    outdir: str | None = None

    @property
    def reason(self) -> str:
        return self.trajectory.reason


def run_config(cfg: SimConfig) -> RunRecord:
    """Execute one trajectory without touching the filesystem."""
    cfg = cfg.validated()
    data = build_data(cfg)
    markers = MarkerSet.uniform(cfg.markers) if cfg.markers > 0 else None
    t0 = time.perf_counter()
    traj = run(
        data.state(),
        cfg.horizon,
        step_settings(cfg),
        dt=cfg.dt,
        report_dt=cfg.report_dt,
        policy=monitor_policy(cfg),
        markers=markers,
        chord_arc_max_points=cfg.chord_arc_max_points,
        eb_squared_tail=cfg.eb_squared_tail,
    )
    wall = time.perf_counter() - t0
    return RunRecord(cfg, traj, wall, config_hash(cfg), code_hash())


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_energy_csv(path: Path, reports) -> None:
    with path.open("w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rep in reports:
            fh.write(",".join(_fmt(v) for v in rep.row()) + "\n")


def write_snapshots_csv(path: Path, snapshots, stride: int) -> None:
    with path.open("w") as fh:
        fh.write("t,alpha,Re_Z,Im_Z,Re_Zt,Im_Zt\n")
        for t, state in snapshots:
            x = nodes(state.n)[::stride]
            z = x + state.pos.values[::stride]
            zt = state.vel.values[::stride]
            for j in range(x.size):
                fh.write(",".join(_fmt(v) for v in
                                  (t, x[j], z[j].real, z[j].imag, zt[j].real, zt[j].imag)) + "\n")


def simulate(cfg: SimConfig, outdir: str | None = None) -> RunRecord:
    """Run one trajectory and persist the auditable run directory."""
    record = run_config(cfg)
    out = Path(outdir if outdir is not None else cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(config_ini(record.config))
    write_energy_csv(out / "energy.csv", record.trajectory.reports)
    write_snapshots_csv(out / "snapshots.csv", record.trajectory.snapshots, record.config.snapshot_stride)
    summary = {
        "reason": record.trajectory.reason,
        "detail": record.trajectory.detail,
        "steps": record.trajectory.steps,
        "reports": len(record.trajectory.reports),
        "wall_seconds": record.wall_seconds,
        "config_hash": record.config_hash,
        "code_hash": record.code_hash,
        "frakE_initial": record.trajectory.reports[0].frak_e,
        "frakE_final": record.trajectory.reports[-1].frak_e,
        "frakE_sup": max(r.frak_e for r in record.trajectory.reports),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    record.outdir = str(out)
    return record


def _apply_overrides(cfg: SimConfig, assignment: dict[str, object]) -> SimConfig:
    updated = replace(cfg, **assignment)
    return updated.validated()


def _sweep_cell(args):
    cfg_dict, assignment, cell_dir = args
    cfg = SimConfig(**cfg_dict)
    try:
        cfg = _apply_overrides(cfg, assignment)
        record = simulate(cfg, cell_dir)
        reports = record.trajectory.reports
        return {
            "assignment": assignment,
            "reason": record.trajectory.reason,
            "detail": record.trajectory.detail,
            "frakE_initial": reports[0].frak_e,
            "frakE_sup": max(r.frak_e for r in reports),
            "taylor_min": min(r.taylor_min for r in reports),
            "chord_arc_min": min(r.chord_arc_delta for r in reports),
            "steps": record.trajectory.steps,
        }
    except Exception as exc:  # cell isolation: one failure must not abort siblings
        return {"assignment": assignment, "reason": "error", "detail": f"{type(exc).__name__}: {exc}",
                "frakE_initial": float("nan"), "frakE_sup": float("nan"),
                "taylor_min": float("nan"), "chord_arc_min": float("nan"), "steps": 0}


def sweep(cfg: SimConfig, grid: dict[str, list], outdir: str, workers: int = 1) -> list[dict]:
    """Cross-product parameter sweep; each cell is an independent run directory."""
    keys = sorted(grid)
    cells = list(itertools.product(*(grid[k] for k in keys)))
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, combo in enumerate(cells):
        assignment = dict(zip(keys, combo))
        cell_dir = out / f"cell_{i:03d}"
        jobs.append((asdict(cfg), assignment, str(cell_dir)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(job) for job in jobs]
    with (out / "sweep_summary.csv").open("w") as fh:
        fh.write(",".join(["cell"] + keys +
                          ["reason", "frakE_initial", "frakE_sup", "taylor_min",
                           "chord_arc_min", "steps"]) + "\n")
        for i, row in enumerate(rows):
            cols = [str(i)] + [str(row["assignment"][k]) for k in keys]
            cols += [row["reason"], _fmt(row["frakE_initial"]), _fmt(row["frakE_sup"]),
                     _fmt(row["taylor_min"]), _fmt(row["chord_arc_min"]), str(row["steps"])]
            fh.write(",".join(cols) + "\n")
    return rows


def mollify_study(cfg: SimConfig, eps_grid: list[float], outdir: str) -> list[dict]:
    """Successive-mollification convergence table.

    For each eps in the grid the trajectories for eps and eps/2 are compared:
    d_eps = sup over report times and grid nodes of |Z_eps - Z_{eps/2}|.
    The chord-arc column tracks min_t delta(t) against delta(0)/2.
    """
    needed = sorted({e for e in eps_grid} | {e / 2 for e in eps_grid}, reverse=True)
    trajectories: dict[float, Trajectory] = {}
    for eps in needed:
        run_cfg = replace(cfg, mollify_eps=eps).validated()
        trajectories[eps] = run_config(run_cfg).trajectory
    rows = []
    prev_d = None
    for eps in sorted(eps_grid, reverse=True):
        ta, tb = trajectories[eps], trajectories[eps / 2]
        m = min(len(ta.snapshots), len(tb.snapshots))
        d = 0.0
        for (t1, s1), (t2, s2) in zip(ta.snapshots[:m], tb.snapshots[:m]):
            d = max(d, float(np.max(np.abs(s1.pos.values - s2.pos.values))))
        deltas = [r.chord_arc_delta for r in ta.reports]
        row = {
            "eps": eps,
            "d_eps": d,
            "ratio_to_coarser": (d / prev_d) if prev_d else float("nan"),
            "delta0": deltas[0],
            "delta_min": min(deltas),
            "chord_arc_ok": bool(min(deltas) >= 0.5 * deltas[0]),
            "reason": ta.reason,
        }
        rows.append(row)
        prev_d = d
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "mollify_study.csv").open("w") as fh:
        fh.write("eps,d_eps,ratio_to_coarser,delta0,delta_min,chord_arc_ok,reason\n")
        for row in rows:
            fh.write(",".join([
                _fmt(row["eps"]), _fmt(row["d_eps"]), _fmt(row["ratio_to_coarser"]),
                _fmt(row["delta0"]), _fmt(row["delta_min"]),
                str(row["chord_arc_ok"]).lower(), row["reason"]]) + "\n")
    return rows


def euler_check(cfg: SimConfig, heights: list[float], outdir: str) -> list[dict]:
    """Interior Euler residual along a run, tabulated per report time and height.

    Also exports the reconstructed interior slices of the final state, one row
    per (height, node), for plotting.
    """
    record = run_config(cfg)
    rows = []
    for t, state in record.trajectory.snapshots:
        dstate = rhs(state, step_settings(cfg))
        for y in heights:
            res = interior.euler_residual(state, dstate, [y])
            rows.append({"t": t, "y": y, "residual": res})
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "euler_check.csv").open("w") as fh:
        fh.write("t,y,residual\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in (row["t"], row["y"], row["residual"])) + "\n")
    final = record.trajectory.final_state
    dfinal = rhs(final, step_settings(cfg))
    stride = max(1, cfg.snapshot_stride)
    with (out / "interior_slices.csv").open("w") as fh:
        fields = ("f", "psi_z", "inv_psi_z", "psi_t_over_psi_z", "f_t", "pressure")
        header = ["y", "alpha"]
        for name in fields:
            header += [f"Re_{name}", f"Im_{name}"]
        fh.write(",".join(header) + "\n")
        alphas = nodes(final.n)[::stride]
        for y in heights:
            sl = interior.interior_slice(final, dfinal, y)
            cols = [getattr(sl, name).values[::stride] for name in fields]
            for j, alpha in enumerate(alphas):
                row = [y, alpha]
                for v in cols:
                    row += [v[j].real, v[j].imag]
                fh.write(",".join(_fmt(c) for c in row) + "\n")
    return rows


def verify_report(cfg: SimConfig, outdir: str) -> dict:
    """Run both batteries, compare to the stored baseline, write JSON."""
    identities = verify.run_identity_battery(n=min(cfg.n, 512), seed=cfg.seed)
    inequalities = verify.run_inequality_battery(n=256, trials=cfg.verify_trials, seed=cfg.seed)
    regression = verify.compare_to_baseline(inequalities)
    report = {"identities": identities, "inequalities": inequalities, "regression": regression}
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


__all__ = [
    "SimConfig", "parse_config", "config_ini", "config_hash", "code_hash",
    "build_data", "step_settings", "monitor_policy",
    "RunRecord", "run_config", "simulate", "sweep", "mollify_study",
    "euler_check", "verify_report", "write_energy_csv", "write_snapshots_csv",
]
