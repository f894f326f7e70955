import json

import numpy as np
import pytest

from braess_steering.cli import build_config, main, make_parser, read_config_file
from braess_steering.reporting import TRAJECTORY_COLUMNS


class TestConfigFile:
    def test_parses_types_comments_and_blanks(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# population\nagents = 20\nalpha = 0.05\n\nepsilon_decay = false\ninit = aligned\n"
        )
        values = read_config_file(str(path))
        assert values == {
            "agents": 20,
            "alpha": 0.05,
            "epsilon_decay": False,
            "init": "aligned",
        }

    def test_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("horizon = 10\n")
        with pytest.raises(ValueError):
            read_config_file(str(path))

    def test_rejects_missing_equals(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("agents 20\n")
        with pytest.raises(ValueError):
            read_config_file(str(path))

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("agents = 20\nsteps = 50\n")
        args = make_parser().parse_args(
            ["run", "--config", str(path), "--agents", "7"]
        )
        config = build_config(args)
        assert config.agents == 7
        assert config.steps == 50


class TestRunCommand:
    def test_writes_trajectories_aggregate_manifest(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            ["run", "--agents", "6", "--steps", "10", "--reps", "2", "--out", str(out)]
        )
        assert code == 0
        assert (out / "aggregate.csv").exists()
        assert (out / "manifest.json").exists()
        for rep in (0, 1):
            lines = (out / f"run-rep{rep}.csv").read_text().splitlines()
            assert lines[0] == ",".join(TRAJECTORY_COLUMNS)
            assert len(lines) == 11  # header + one row per step

    def test_same_seed_is_bit_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        argv = ["run", "--agents", "6", "--steps", "12", "--reps", "1", "--seed", "9"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert (a / "run-rep0.csv").read_bytes() == (b / "run-rep0.csv").read_bytes()

    def test_error_is_machine_readable_and_nonzero(self, tmp_path, capsys):
        code = main(
            ["run", "--recommender", "route3", "--network", "initial",
             "--agents", "4", "--out", str(tmp_path / "x")]
        )
        assert code == 2
        err = capsys.readouterr().err.strip()
        payload = json.loads(err)
        assert payload["command"] == "run"
        assert "route3" in payload["error"]

    def test_plot_renders_pngs(self, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["run", "--agents", "6", "--steps", "10", "--reps", "1",
             "--out", str(out), "--plot"]
        )
        assert code == 0
        assert (out / "welfare.png").stat().st_size > 0
        assert (out / "simplex.png").stat().st_size > 0


class TestOtherCommands:
    def test_two_route_grid(self, tmp_path):
        out = tmp_path / "tr"
        code = main(
            ["two-route", "--agents", "6", "--steps", "20", "--reps", "1",
             "--eps-grid", "0.5", "--out", str(out)]
        )
        assert code == 0
        names = {p.name for p in out.glob("*.csv")}
        assert "twostep-aligned-eps0.5-rep0.csv" in names
        assert "none-eps0.5-rep0.csv" in names

    def test_sweep_smoke_cell_emits_all_columns(self, tmp_path):
        out = tmp_path / "sweep"
        code = main(
            ["sweep", "--agents-grid", "4", "--states-grid", "2",
             "--recommenders", "none,heuristic", "--steps", "10", "--reps", "1",
             "--out", str(out)]
        )
        assert code == 0
        agg = (out / "aggregate.csv").read_text().splitlines()
        assert len(agg) == 3  # header + one row per (cell, rep)
        cell = (out / "heuristic-n4-m2-rep0.csv").read_text().splitlines()
        assert len(cell[0].split(",")) == len(TRAJECTORY_COLUMNS)

    def test_fig2_defaults_to_constant_epsilon(self, tmp_path):
        out = tmp_path / "fig2"
        code = main(["fig2", "--steps", "15", "--reps", "1", "--agents", "6",
                     "--out", str(out)])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["states"] == 1
        assert manifest["config"]["gamma"] == 0.8
        assert manifest["config"]["epsilon_decay"] is False

    def test_verify_theory_passes_and_writes_coverage(self, tmp_path, capsys):
        out = tmp_path / "vt"
        code = main(["verify-theory", "--trials", "200", "--max-states", "15",
                     "--out", str(out)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert all(line.startswith("PASS") for line in lines)
        coverage = (out / "coverage.csv").read_text().splitlines()
        assert coverage[0] == "num_states,coverage"
        assert len(coverage) == 16
