import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from limloc.cli import main
from limloc.constraints import ConstraintSpec, check_K
from limloc.localtime import LocalTimeProfile
from limloc.paths import Path


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_is_reproducible(tmp_path, capsys):
    digests = []
    for d in ("a", "b"):
        code, out, _ = _run(capsys, "simulate", "--process", "bm", "--horizon", "1", "--dt", "0.001",
                            "--seed", "7", "--out", str(tmp_path / d))
        assert code == 0
        m = json.loads(out)
        assert m["seed_root"] == 7 and m["params"]["process"] == "bm"
        digests.append([o["sha256"] for o in m["outputs"]])
    assert digests[0] == digests[1]


def test_simulate_bessel_is_nonnegative(tmp_path, capsys):
    code, out, _ = _run(capsys, "simulate", "--process", "bessel3", "--horizon", "1", "--dt", "0.001",
                        "--out", str(tmp_path))
    assert code == 0
    p = Path.from_csv(json.loads(out)["outputs"][0]["path"])
    assert np.all(p.values >= 0)


@pytest.mark.parametrize("argv", [["simulate", "--process", "bm", "--horizon", "1", "--dt", "0"],
                                  ["simulate", "--process", "levy", "--horizon", "1", "--dt", "0.1"],
                                  ["verify", "--suite", "everything"],
                                  ["classify", "--f", "{not json"],
                                  ["probe-conjecture", "--gamma", "1.5", "--t", "10"],
                                  []])
def test_usage_errors(argv, capsys):
    code, _, err = _run(capsys, *argv)
    assert code == 2 and err


def test_module_entry_point_exit_status():
    r = subprocess.run([sys.executable, "-m", "limloc", "simulate", "--process", "bm", "--horizon", "1",
                        "--dt", "0"], capture_output=True, text=True)
    assert r.returncode == 2


@pytest.mark.parametrize("text,line", [('{"variant": "power_log", "params": {"gamma": 1.1}}', "transient regime"),
                                       ('{"variant": "power_log", "params": {"gamma": 0.5}}',
                                        "conjectured recurrent regime"),
                                       ('{"variant": "constant", "params": {"c": 1}}', "transient regime")])
def test_classify(text, line, capsys):
    code, out, _ = _run(capsys, "classify", "--f", text)
    assert code == 0 and out.splitlines()[0] == line


def test_classify_table_reports_partial_integrals(tmp_path, capsys):
    t = np.geomspace(1, 1e6, 200)
    (tmp_path / "f.csv").write_text("t,f\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(t, np.log(t) + 1)))
    code, out, _ = _run(capsys, "classify", "--f", str(tmp_path / "f.csv"))
    detail = json.loads(out.splitlines()[1])
    assert code == 0 and detail["method"] == "numerical" and len(detail["partial_integrals"]) >= 4


def test_verify_analytics_suite(tmp_path, capsys):
    reports = []
    for name in ("r1.json", "r2.json"):
        code, _, _ = _run(capsys, "verify", "--suite", "analytics", "--out", str(tmp_path / name))
        assert code == 0
        reports.append((tmp_path / name).read_bytes())
    assert reports[0] == reports[1]
    assert json.loads(reports[0])["overall"] == "pass"


def test_verify_below_sample_floor(capsys):
    code, out, err = _run(capsys, "verify", "--suite", "dominance", "--n", "10")
    rep = json.loads(out)
    assert code == 0 and "warning" in err
    assert rep["overall"] == "inconclusive"
    assert {c["status"] for c in rep["criteria"]} == {"inconclusive"}


def test_figure1_trajectories_respect_constraint(tmp_path, capsys):
    code, out, _ = _run(capsys, "figure1", "--gamma", "0.5,1.1", "--t", "100", "--dt", "0.01",
                        "--seed", "3", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "figure1_summary.json").read_text())
    for e in summary["trajectories"]:
        f = ConstraintSpec.power_log(e["gamma"])
        prof = LocalTimeProfile.from_csv(tmp_path / e["files"][1])
        assert check_K(prof, f, 100.0).holds and e["ratio_L_over_f"] <= 1
    assert len(json.loads(out)["outputs"]) == 5


def test_figure1_budget_exhaustion(tmp_path, capsys):
    code, _, _ = _run(capsys, "figure1", "--gamma", "0.5", "--t", "1000", "--dt", "0.01", "--budget", "1",
                      "--seed", "1", "--out", str(tmp_path))
    summary = json.loads((tmp_path / "figure1_summary.json").read_text())
    assert code == 3 and summary["trajectories"][0]["status"] == "budget_exhausted"


@pytest.mark.slow
def test_figure1_acceptance_curve_decreases(tmp_path, capsys):
    code, _, _ = _run(capsys, "figure1", "--gamma", "0.9", "--t", "100", "--dt", "0.01",
                      "--curve-attempts", "20000", "--out", str(tmp_path))
    curve = json.loads((tmp_path / "figure1_summary.json").read_text())["trajectories"][0]["acceptance_curve"]
    rates = [c["rate"] for c in curve]
    assert code == 0 and [c["t"] for c in curve] == [1e2, 1e3, 1e4]
    assert rates[0] > rates[1] > rates[2]


def test_probe_conjecture_schema(tmp_path, capsys):
    code, out, _ = _run(capsys, "probe-conjecture", "--gamma", "0.5", "--t", "50,200", "--n", "40",
                        "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "probe_conjecture.csv")))
    assert [float(r["t"]) for r in rows] == [50.0, 200.0]
    assert {"q10", "q50", "q90"} <= set(rows[0])
    assert all(float(r["max_ratio"]) <= 1 for r in rows)
    assert "exploratory" in json.loads(out)["params"]["label"]


def test_threads_flag_does_not_change_output(tmp_path, capsys, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("LIMLOC_THREADS", threads)
        code, out, _ = _run(capsys, "probe-conjecture", "--gamma", "0.5", "--t", "50", "--n", "30",
                            "--out", str(tmp_path / threads))
        outs.append((tmp_path / threads / "probe_conjecture.csv").read_bytes())
    assert outs[0] == outs[1]
