"""Command-line interface.

Subcommands: simulate, sweep, mollify-study, verify, euler-check.
Exit codes: 0 success, 2 configuration error, 3 guard-terminated simulate run
(the reason goes to stderr).
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, ValidationError
from .harness import (
    euler_check,
    mollify_study,
    parse_config,
    simulate,
    sweep,
    verify_report,
)


def _base_parser(sub):
    sub.add_argument("--config", default=None, help="INI config file")
    sub.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    sub.add_argument("--workers", type=int, default=1, help="parallel workers (sweep)")
    sub.add_argument("--seed", type=int, default=None, help="seed override")
    sub.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE",
                     help="config override, repeatable")


def _load(args):
    cfg = parse_config(args.config, args.override)
    if args.seed is not None:
        cfg = parse_config(args.config, args.override + [f"output.seed={args.seed}"])
    return cfg


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="crestwave",
                                     description="Pseudo-spectral water-wave simulator in conformal variables")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep", "mollify-study", "verify", "euler-check"):
        sub = subs.add_parser(name)
        _base_parser(sub)
        if name == "sweep":
            sub.add_argument("--grid", action="append", default=[], metavar="SECTION.KEY=V1,V2,...",
                             help="sweep axis, repeatable (cross product)")
        if name == "mollify-study":
            sub.add_argument("--eps", default="0.1,0.05,0.025,0.0125",
                             help="comma-separated mollification grid")
        if name == "euler-check":
            sub.add_argument("--heights", default="-0.2,-0.5,-1.0",
                             help="comma-separated interior heights (negative)")
    args = parser.parse_args(argv)

    try:
        cfg = _load(args)
        outdir = args.out if args.out is not None else cfg.outdir

        if args.command == "simulate":
            record = simulate(cfg, outdir)
            print(f"run written to {record.outdir} ({record.trajectory.steps} steps, "
                  f"reason={record.trajectory.reason})")
            if record.trajectory.reason != "completed":
                print(f"terminated by guard: {record.trajectory.reason}: "
                      f"{record.trajectory.detail}", file=sys.stderr)
                return 3
            return 0

        if args.command == "sweep":
            grid = {}
            for item in args.grid:
                if "=" not in item:
                    raise ConfigError(f"--grid expects section.key=v1,v2,..., got {item!r}")
                dotted, raw = item.split("=", 1)
                section_key = dotted.strip()
                if "." not in section_key:
                    raise ConfigError(f"--grid axis must be section.key, got {dotted!r}")
                from .harness import _SCHEMA  # axis values reuse the config schema parsers
                section, key = section_key.split(".", 1)
                entry = _SCHEMA.get((section, key))
                if entry is None:
                    raise ConfigError(f"unknown sweep axis [{section}] {key}")
                attr, conv = entry
                grid[attr] = [conv(v) for v in raw.split(",") if v.strip()]
            if not grid:
                print("empty grid: nothing to do")
                return 0
            rows = sweep(cfg, grid, outdir, workers=args.workers)
            bad = [r for r in rows if r["reason"] == "error"]
            print(f"sweep complete: {len(rows)} cells, {len(bad)} errored; "
                  f"summary in {outdir}/sweep_summary.csv")
            return 0

        if args.command == "mollify-study":
            rows = mollify_study(cfg, _float_list(args.eps), outdir)
            for row in rows:
                print(f"eps={row['eps']:<8g} d_eps={row['d_eps']:.6e} "
                      f"ratio={row['ratio_to_coarser']:.3f} chord_arc_ok={row['chord_arc_ok']}")
            return 0

        if args.command == "verify":
            report = verify_report(cfg, outdir)
            ok = (report["identities"]["all_pass"]
                  and report["identities"]["negative_controls_fail"]
                  and report["inequalities"]["all_within_bounds"]
                  and report["regression"]["pass"])
            print(f"identities: {'pass' if report['identities']['all_pass'] else 'FAIL'}; "
                  f"inequalities: {'pass' if report['inequalities']['all_within_bounds'] else 'FAIL'}; "
                  f"regression: {'pass' if report['regression']['pass'] else 'FAIL'}")
            return 0 if ok else 1

        if args.command == "euler-check":
            heights = _float_list(args.heights)
            rows = euler_check(cfg, heights, outdir)
            worst = max(r["residual"] for r in rows)
            print(f"max interior Euler residual over {len(rows)} samples: {worst:.3e}")
            return 0

    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
