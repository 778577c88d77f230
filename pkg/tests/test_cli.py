"""CLI behaviour: exit codes, artifacts on disk, overrides, determinism."""

import json

import pytest

from learnsim.cli import main


def write_bad_config(path):
    path.write_text(json.dumps({
        "scenario": "lessons",
        "model": "four",
        "params": {"alphas": [0.5, 0.1, 0.05, 0.02], "gammas": [0.1, 0.2, 0.3, 0.4]},
        "schedule": {"segments": [{"t_start": 0, "t_end": 1, "teaching": 1, "u_base": 4}]},
    }))


class TestSimulate:
    def test_builtin_run_writes_artifacts(self, tmp_path, capsys):
        status = main(["simulate", "builtin:lessons_fixed", "--out", str(tmp_path)])
        assert status == 0
        for suffix in (".csv", ".events.jsonl", ".meta.json", ".summary.json"):
            assert (tmp_path / f"lessons_fixed{suffix}").exists()
        out = capsys.readouterr().out
        assert "final Z" in out

    def test_repeat_runs_byte_identical(self, tmp_path):
        main(["simulate", "builtin:task_staircase", "--out", str(tmp_path / "a")])
        main(["simulate", "builtin:task_staircase", "--out", str(tmp_path / "b")])
        a = (tmp_path / "a/task_staircase.csv").read_bytes()
        b = (tmp_path / "b/task_staircase.csv").read_bytes()
        assert a == b

    def test_seed_override_changes_stochastic_run(self, tmp_path):
        main(["simulate", "builtin:task_staircase", "--out", str(tmp_path / "a")])
        main(["simulate", "builtin:task_staircase", "--seed", "12345",
              "--out", str(tmp_path / "b")])
        a = (tmp_path / "a/task_staircase.csv").read_bytes()
        b = (tmp_path / "b/task_staircase.csv").read_bytes()
        assert a != b

    def test_dt_override(self, tmp_path):
        main(["simulate", "builtin:lessons_fixed", "--dt", "0.005", "--out", str(tmp_path)])
        meta = json.loads((tmp_path / "lessons_fixed.meta.json").read_text())
        assert meta["dt"] == 0.005

    def test_json_format(self, tmp_path):
        status = main(["simulate", "builtin:lessons_fixed", "--format", "json",
                       "--out", str(tmp_path)])
        assert status == 0
        doc = json.loads((tmp_path / "lessons_fixed.json").read_text())
        assert doc["columns"][0] == "t"
        assert len(doc["samples"]) > 10

    def test_validation_error_exits_one(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        write_bad_config(cfg)
        status = main(["simulate", str(cfg), "--out", str(tmp_path)])
        assert status == 1
        assert "strictly decreasing" in capsys.readouterr().err

    def test_missing_config_exits_one(self, tmp_path, capsys):
        status = main(["simulate", str(tmp_path / "none.json")])
        assert status != 0

    def test_runtime_failure_exits_two_and_cleans_up(self, tmp_path, capsys):
        target = tmp_path / "blocked"
        target.write_text("a file, not a directory")
        status = main(["simulate", "builtin:lessons_fixed", "--out", str(target)])
        assert status == 2

    def test_parallel_jobs(self, tmp_path):
        status = main([
            "simulate", "builtin:lessons_fixed", "builtin:lessons_rising",
            "builtin:school_career", "--jobs", "3", "--out", str(tmp_path),
        ])
        assert status == 0
        assert (tmp_path / "lessons_fixed.csv").exists()
        assert (tmp_path / "lessons_rising.csv").exists()
        assert (tmp_path / "school_career.csv").exists()

    def test_plot_flag_renders_figures(self, tmp_path):
        main(["simulate", "builtin:lessons_fixed", "--plot", "--out", str(tmp_path)])
        assert (tmp_path / "lessons_fixed_knowledge.png").exists()
        assert (tmp_path / "lessons_fixed_strength.png").exists()


class TestReport:
    def test_report_from_csv(self, tmp_path, capsys):
        main(["simulate", "builtin:lessons_fixed", "--out", str(tmp_path)])
        capsys.readouterr()
        status = main(["report", str(tmp_path / "lessons_fixed.csv")])
        assert status == 0
        out = capsys.readouterr().out
        assert "final Z" in out
        assert (tmp_path / "lessons_fixed_knowledge.png").exists()

    def test_report_missing_path(self, tmp_path, capsys):
        assert main(["report", str(tmp_path / "ghost.csv")]) == 1


class TestConfigsListing:
    def test_configs_listed(self, capsys):
        assert main(["configs"]) == 0
        out = capsys.readouterr().out
        assert "builtin:lessons_fixed" in out
        assert "builtin:school_career" in out
