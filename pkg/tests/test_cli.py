import json
from pathlib import Path

import pytest

from nicomlab.harness.cli import main

CONFIGS = Path(__file__).parent.parent / "configs"
TINY = str(CONFIGS / "facility_tiny.toml")


def load(path):
    return json.loads(Path(path).read_text())


def test_run_writes_traces_and_summary(tmp_path, capsys):
    assert main(["run", "--config", TINY, "--out", str(tmp_path), "--reps", "2", "--seed", "9"]) == 0
    summary = load(tmp_path / "summary.json")
    assert summary["seeds"]["master"] == 9 and len(summary["replications"]) == 2
    assert (tmp_path / "traces" / "trace_0001.csv").exists()
    assert "mean_regret" in capsys.readouterr().out


def test_run_is_reproducible(tmp_path):
    for d in ("a", "b"):
        main(["run", "--config", TINY, "--out", str(tmp_path / d), "--seed", "3"])
    a = (tmp_path / "a" / "traces" / "trace_0000.csv").read_bytes()
    b = (tmp_path / "b" / "traces" / "trace_0000.csv").read_bytes()
    assert a == b


def test_audit_nic(tmp_path):
    assert main(["audit-nic", "--config", TINY, "--out", str(tmp_path)]) == 0
    reports = load(tmp_path / "audit_nic.json")["reports"]
    assert [r["agent"] for r in reports] == [0, 1]
    assert all(r["certified"] for r in reports)


def test_audit_nic_budget(tmp_path, capsys):
    assert main(["audit-nic", "--config", TINY, "--out", str(tmp_path), "--budget", "5"]) == 4
    assert "instance too large" in capsys.readouterr().err


def test_audit_dsic(tmp_path):
    assert main(["audit-dsic", "--config", TINY, "--out", str(tmp_path), "--commitment"]) == 0
    results = load(tmp_path / "audit_dsic.json")["results"]
    assert len(results) == 5 and not any(r["violations"] for r in results)


def test_audit_dsic_flags_mmf(tmp_path):
    cfg = tmp_path / "mmf.toml"
    cfg.write_text('[domain]\nname = "resource"\nn = 2\nk = 2\nclass = "max-min-fair"\n')
    code = main(["audit-dsic", "--config", str(cfg), "--out", str(tmp_path)])
    results = load(tmp_path / "audit_dsic.json")["results"]
    assert code == (1 if any(r["violations"] for r in results) else 0)


def test_dp_check(tmp_path):
    assert main(["dp-check", "--config", TINY, "--out", str(tmp_path),
                 "--eta", "0.1", "--eta", "0.5", "--max-t", "2"]) == 0
    rows = load(tmp_path / "dp_check.json")["results"]
    assert [r["eta"] for r in rows] == [0.1, 0.5]
    assert all(r["max_log_ratio"] <= r["bound"] for r in rows)


def test_penalty_gap(tmp_path):
    assert main(["penalty-gap", "--config", TINY, "--out", str(tmp_path)]) == 0
    assert load(tmp_path / "penalty_gap.json")["beta"] == "1/4"


def test_regret_sweep(tmp_path):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text('[domain]\nname = "facility"\nn = 1\nm = 1\nk = 2\n'
                   '[nicom]\nalpha_T = "1"\n[run]\nhorizons = [256, 512, 1024]\nreps = 2\n')
    assert main(["regret-sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    sweep = load(tmp_path / "sweep.json")
    assert [r["T"] for r in sweep["rows"]] == [256, 512, 1024]
    header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
    assert header.startswith("T,status,reps")


def test_infeasible_exit_code(tmp_path, capsys):
    cfg = tmp_path / "x.toml"
    cfg.write_text('[domain]\nname = "facility"\nm = 2\n[agents]\nT = 8\n')
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    assert "infeasible" in capsys.readouterr().err


def test_unknown_key_exit_code(tmp_path, capsys):
    cfg = tmp_path / "x.toml"
    cfg.write_text('[run]\nseeds = 3\n')
    assert main(["run", "--config", str(cfg)]) == 2
    assert "unknown keys" in capsys.readouterr().err


def test_subcommand_required():
    with pytest.raises(SystemExit):
        main([])
