import json
from pathlib import Path

import numpy as np
import pytest

from crestwave.cli import main
from crestwave.errors import ConfigError
from crestwave.harness import (
    SimConfig,
    config_hash,
    config_ini,
    mollify_study,
    parse_config,
    run_config,
    simulate,
    sweep,
)


class TestConfig:
    def test_defaults_validate(self):
        cfg = SimConfig().validated()
        assert cfg.n == 512 and cfg.cfl == 0.5

    def test_power_of_two_enforced(self):
        with pytest.raises(ConfigError):
            SimConfig(n=500).validated()

    def test_exactly_one_time_step_rule(self):
        with pytest.raises(ConfigError):
            SimConfig(dt=1e-3, cfl=0.5).validated()
        with pytest.raises(ConfigError):
            SimConfig(dt=None, cfl=None).validated()
        SimConfig(dt=1e-3, cfl=None).validated()

    def test_parse_file_and_overrides(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[grid]\nn = 256\n\n[time]\nhorizon = 0.5\n\n[data]\nfamily = smooth_wave\n")
        cfg = parse_config(str(ini), ["data.amplitude=0.02", "output.seed=3"])
        assert cfg.n == 256 and cfg.amplitude == 0.02 and cfg.seed == 3

    def test_unknown_key_identified(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[grid]\nn = 256\nwhat = 1\n")
        with pytest.raises(ConfigError, match=r"\[grid\] what"):
            parse_config(str(ini))

    def test_dt_override_clears_cfl(self):
        cfg = parse_config(None, ["time.dt=0.001"])
        assert cfg.dt == 0.001 and cfg.cfl is None

    def test_config_hash_stable(self):
        a = SimConfig(n=256)
        b = SimConfig(n=256)
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(SimConfig(n=512))

    def test_snapshot_round_trips(self, tmp_path):
        cfg = SimConfig(n=256, family="near_crest", crest_q=0.95, mollify_eps=0.01)
        path = tmp_path / "snap.ini"
        path.write_text(config_ini(cfg))
        again = parse_config(str(path))
        assert config_ini(again) == config_ini(cfg)


class TestSimulate:
    def test_flat_run_outputs(self, tmp_path):
        cfg = SimConfig(n=256, family="flat", horizon=0.3, report_dt=0.1)
        record = simulate(cfg, str(tmp_path / "flat"))
        assert record.trajectory.reason == "completed"
        out = Path(record.outdir)
        for name in ("config.ini", "energy.csv", "snapshots.csv", "summary.json"):
            assert (out / name).exists()
        rows = (out / "energy.csv").read_text().splitlines()
        assert len(rows) == 1 + 4  # header + reports at t = 0, .1, .2, .3
        first = rows[1].split(",")
        assert float(first[1]) == 0.0 and float(first[2]) == 0.0  # Ea, Eb zero

    def test_determinism_byte_identical(self, tmp_path):
        cfg = SimConfig(n=256, family="smooth_wave", amplitude=0.05, mode=1,
                        horizon=0.2, report_dt=0.1, seed=11)
        a = simulate(cfg, str(tmp_path / "a"))
        b = simulate(cfg, str(tmp_path / "b"))
        for name in ("energy.csv", "snapshots.csv", "config.ini"):
            assert (Path(a.outdir) / name).read_bytes() == (Path(b.outdir) / name).read_bytes()

    def test_summary_contains_audit_fields(self, tmp_path):
        cfg = SimConfig(n=256, family="flat", horizon=0.1, report_dt=0.1)
        record = simulate(cfg, str(tmp_path / "r"))
        summary = json.loads((Path(record.outdir) / "summary.json").read_text())
        for key in ("reason", "steps", "config_hash", "code_hash", "frakE_sup"):
            assert key in summary


class TestSweep:
    def test_cells_isolated(self, tmp_path):
        cfg = SimConfig(n=256, family="near_crest", horizon=0.05, report_dt=0.05)
        rows = sweep(cfg, {"crest_q": [0.5, 2.0]}, str(tmp_path))  # q=2 is invalid
        assert rows[0]["reason"] == "completed"
        assert rows[1]["reason"] == "error"
        summary = (tmp_path / "sweep_summary.csv").read_text().splitlines()
        assert len(summary) == 3

    def test_summary_columns_keyed_by_grid(self, tmp_path):
        cfg = SimConfig(n=256, family="smooth_wave", horizon=0.05, report_dt=0.05)
        sweep(cfg, {"amplitude": [0.01, 0.02], "mode": [1, 2]}, str(tmp_path))
        lines = (tmp_path / "sweep_summary.csv").read_text().splitlines()
        assert lines[0].startswith("cell,amplitude,mode,reason")
        assert len(lines) == 5


class TestMollifyStudy:
    def test_smooth_data_tiny_differences(self, tmp_path):
        cfg = SimConfig(n=256, family="smooth_wave", amplitude=0.05, mode=1,
                        horizon=0.1, report_dt=0.05)
        rows = mollify_study(cfg, [0.02, 0.01], str(tmp_path))
        assert all(row["d_eps"] < 2 * 0.05 * row["eps"] for row in rows)
        assert rows[0]["d_eps"] > rows[1]["d_eps"]

    def test_flat_data_at_floor(self, tmp_path):
        cfg = SimConfig(n=256, family="flat", horizon=0.1, report_dt=0.05)
        rows = mollify_study(cfg, [0.1, 0.05], str(tmp_path))
        assert all(row["d_eps"] < 1e-14 for row in rows)


class TestCli:
    def test_config_error_exit_code(self, capsys):
        assert main(["simulate", "--override", "grid.n=100"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_override_exit_code(self):
        assert main(["simulate", "--override", "grid.bogus=1"]) == 2

    def test_guard_trip_exit_code(self, tmp_path, capsys):
        # kappa below 1 stops at the first report; simulate must exit 3
        code = main(["simulate", "--out", str(tmp_path / "g"),
                     "--override", "grid.n=256",
                     "--override", "data.family=smooth_wave",
                     "--override", "time.horizon=0.2",
                     "--override", "monitor.kappa=0.5"])
        assert code == 3
        assert "blowup_monitor" in capsys.readouterr().err

    def test_empty_sweep_grid(self, tmp_path, capsys):
        assert main(["sweep", "--out", str(tmp_path)]) == 0
        assert "nothing to do" in capsys.readouterr().out

    def test_simulate_and_euler_check(self, tmp_path):
        code = main(["simulate", "--out", str(tmp_path / "run"),
                     "--override", "grid.n=256",
                     "--override", "data.family=smooth_wave",
                     "--override", "time.horizon=0.1"])
        assert code == 0
        code = main(["euler-check", "--out", str(tmp_path / "euler"),
                     "--override", "grid.n=256",
                     "--override", "data.family=smooth_wave",
                     "--override", "time.horizon=0.1",
                     "--heights=-0.3,-0.8"])
        assert code == 0
        assert (tmp_path / "euler" / "euler_check.csv").exists()
