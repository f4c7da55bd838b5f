import json

import pytest

from rivercomp.cli import main

WEAK_FLAGS = [
    "--d1", "0.08", "--d2", "0.07", "--alpha1", "0.05", "--alpha2", "0.04",
    "--mu", "0.009",
]


def test_simulate_writes_bundle_and_exits_zero(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(
        ["simulate", *WEAK_FLAGS, "--n", "16", "--t-end", "1.0",
         "--samples", "5", "--out-dir", str(out)]
    )
    assert code == 0
    assert (out / "config.echo.json").exists()
    assert (out / "norms.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["outcome"] == "Undecided"
    assert "-> " + str(out) in capsys.readouterr().out


def test_unknown_config_key_in_file_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d1": 0.08, "d2": 0.07, "bogus": 1}))
    code = main(["simulate", "--config", str(path)])
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "config"
    assert "bogus" in record["message"]


def test_figure_rejects_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{}")
    code = main(["figure", "fig1", "--config", str(path)])
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert "presets carry their own parameters" in record["message"]


def test_unknown_figure_exits_two(capsys):
    code = main(["figure", "fig99"])
    assert code == 2
    assert "known presets" in json.loads(capsys.readouterr().err.strip())["message"]


def test_sweep_without_window_reports_none(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main(
        ["sweep", "--d1", "0.002", "--d2", "0.001", "--alpha1", "0.001",
         "--mu", "0.3", "--n", "64", "--points", "8", "--out-dir", str(out)]
    )
    assert code == 0
    assert "coexistence window none" in capsys.readouterr().out
    report = json.loads((out / "report.json").read_text())
    assert report["window"] is None
    assert report["pattern"] == ["VWins"] * 8
    assert report["transitions"] == []


def test_verify_prints_one_line_per_check(tmp_path, capsys):
    out = tmp_path / "verify"
    code = main(["verify", *WEAK_FLAGS, "--n", "128", "--out-dir", str(out)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    checks = [l for l in lines if l.lstrip().startswith(("pass", "skip", "FAIL"))]
    assert len(checks) == 6
    assert not any(l.lstrip().startswith("FAIL") for l in checks)
    assert lines[-1].startswith("all checks pass")


def test_eigen_subcommand_prints_verdicts(tmp_path, capsys):
    out = tmp_path / "eigen"
    code = main(["eigen", *WEAK_FLAGS, "--n", "64", "--out-dir", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "(unstable)" in text and "(stable)" in text


def test_workers_env_used_when_flag_absent(tmp_path, monkeypatch):
    monkeypatch.setenv("RIVERCOMP_WORKERS", "2")
    out = tmp_path / "sweep-env"
    code = main(
        ["sweep", "--d1", "0.002", "--d2", "0.001", "--alpha1", "0.001",
         "--mu", "0.3", "--n", "64", "--points", "8", "--out-dir", str(out)]
    )
    assert code == 0
    assert json.loads((out / "config.echo.json").read_text())["workers"] == 2


def test_workers_flag_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RIVERCOMP_WORKERS", "7")
    out = tmp_path / "sweep-flag"
    code = main(
        ["sweep", "--d1", "0.002", "--d2", "0.001", "--alpha1", "0.001",
         "--mu", "0.3", "--n", "64", "--points", "8", "--workers", "1",
         "--out-dir", str(out)]
    )
    assert code == 0
    assert json.loads((out / "config.echo.json").read_text())["workers"] == 1


def test_workers_env_must_be_integer(monkeypatch, capsys):
    monkeypatch.setenv("RIVERCOMP_WORKERS", "many")
    code = main(["sweep", "--d1", "0.002", "--d2", "0.001", "--alpha1", "0.001"])
    assert code == 2
    assert "RIVERCOMP_WORKERS" in json.loads(capsys.readouterr().err.strip())["message"]
