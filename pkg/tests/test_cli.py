import csv
import json
import subprocess
import sys

import pytest

from aniso_lp.cli import main
from aniso_lp.sobolev import CSV_COLUMNS, SCHEMA_VERSION

SWEEP = {"seeds": 3, "points": 32, "suites": ["T1.3", "T1.4"], "alpha": [0.5], "p": [2.0, 3.0], "refine": False}


def _write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(path)


@pytest.fixture(scope="module")
def verify_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("verify")
    cfg = _write(d, "c.json", {})
    return main(["verify", "--config", cfg, "--output", str(d / "out")]), d / "out"


def test_verify_exit_and_reports(verify_run, capsys):
    code, out = verify_run
    assert code == 0
    summary = json.loads((out / "verify_summary.json").read_text())
    assert summary["schema_version"] == SCHEMA_VERSION and summary["passed"] and summary["n_failed"] == 0
    raw = (out / "verify_checks.csv").read_bytes()
    assert raw.startswith(b"name,value,limit,passed,detail\r\n")
    rows = list(csv.DictReader(raw.decode("utf-8").splitlines()))
    assert len(rows) == summary["n_checks"] and all(r["passed"] == "true" for r in rows)


def test_sweep_reports_byte_identical(tmp_path):
    cfg = _write(tmp_path, "s.json", SWEEP)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["sweep", "--config", cfg, "--output", str(o), "--threads", "1"]) == 0
    for name in ("sweep.csv", "sweep_histograms.csv", "sweep_checks.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    rows = list(csv.reader((outs[0] / "sweep.csv").read_text(encoding="utf-8").splitlines()))
    assert tuple(rows[0]) == CSV_COLUMNS
    # one radial and one kernel cell for T1.4, one for T1.3; two p and two weights each
    assert len(rows) - 1 == 3 * 2 * 2 * SWEEP["seeds"]
    summary = json.loads((outs[0] / "sweep_summary.json").read_text())
    assert len(summary["cells"]) == 12


def test_sweep_threads_do_not_change_results(tmp_path):
    cfg = _write(tmp_path, "s.json", {**SWEEP, "suites": ["T1.3"]})
    for o, t in (("one", "1"), ("four", "4")):
        assert main(["sweep", "--config", cfg, "--output", str(tmp_path / o), "--threads", t]) == 0
    assert (tmp_path / "one" / "sweep.csv").read_bytes() == (tmp_path / "four" / "sweep.csv").read_bytes()


@pytest.mark.parametrize("cfg", [
    {"suites": ["T1.2"], "alpha": [5.0]},
    {"no_such_key": 1},
    {"p": [1.0]},
    {"suites": ["T7.7"]},
    "{not json",
])
def test_bad_config_exit_2(tmp_path, capsys, cfg):
    path = _write(tmp_path, "bad.json", cfg)
    assert main(["verify", "--config", path, "--output", str(tmp_path / "o")]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_range_diagnostic(tmp_path, capsys):
    path = _write(tmp_path, "bad.json", {"suites": ["T1.2"], "alpha": [5.0]})
    assert main(["sweep", "--config", path, "--output", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "T1.2" in err and "(0, 2)" in err


def test_failed_check_exit_1(tmp_path, monkeypatch):
    import aniso_lp.cli as cli
    from aniso_lp.suites import below

    monkeypatch.setattr(cli, "verify_checks", lambda points, n_fields: [below("always fails", 1.0, 0.5)])
    assert main(["verify", "--config", _write(tmp_path, "c.json", {}), "--output", str(tmp_path / "o")]) == 1
    summary = json.loads((tmp_path / "o" / "verify_summary.json").read_text())
    assert summary["passed"] is False and summary["n_failed"] == 1


def test_missing_config_exit_2(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "absent.json")]) == 2


def test_threads_from_environment(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "c.json", {})
    monkeypatch.setenv("ANISO_LP_THREADS", "many")
    assert main(["verify", "--config", cfg, "--output", str(tmp_path / "o")]) == 2
    monkeypatch.setenv("ANISO_LP_THREADS", "0")
    assert main(["verify", "--config", cfg, "--output", str(tmp_path / "o")]) == 2


def test_threads_env_used(tmp_path, monkeypatch):
    import aniso_lp.cli as cli

    seen = []
    monkeypatch.setenv("ANISO_LP_THREADS", "3")
    monkeypatch.setitem(cli.COMMANDS, "verify", lambda cfg, out: seen.append(cli.sfft.get_workers()) or 0)
    assert main(["verify", "--config", _write(tmp_path, "c.json", {}), "--output", str(tmp_path / "o")]) == 0
    assert main(["verify", "--config", _write(tmp_path, "c.json", {}), "--output", str(tmp_path / "o"),
                 "--threads", "2"]) == 0
    assert seen == [3, 2]


def test_demo(tmp_path):
    cfg = _write(tmp_path, "d.json", {"seeds": 3, "points": 64})
    assert main(["demo", "--config", cfg, "--output", str(tmp_path / "o")]) == 0
    for name in ("demo_diag12.csv", "demo_poisson_profile.csv", "demo_checks.csv", "demo_summary.json"):
        assert (tmp_path / "o" / name).exists()


def test_console_script_usage():
    r = subprocess.run([sys.executable, "-m", "aniso_lp.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout
    r = subprocess.run([sys.executable, "-m", "aniso_lp.cli", "bogus", "--config", "x"], capture_output=True, text=True)
    assert r.returncode == 2
