import json
import os
import subprocess
import sys

import pytest

from peres_lab import lab
from peres_lab.cli import apply_override, main

SCENARIOS = sorted(lab.DEFAULTS)
FAST = {
    "algebra-check": {"n_pairs": 10},
    "smatrix-theorem": {"n_trials": 10},
    "two-barrier-scan": {"num": 21},
}


def write_config(tmp_path, scenario, name="cfg.json", **extra):
    doc = {"scenario": scenario, "parameters": FAST.get(scenario, {}), "seed": 7, **extra}
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.mark.parametrize("scenario", [s for s in SCENARIOS if s != "two-barrier-scan"])
def test_scenarios_pass(tmp_path, scenario, capsys):
    out = tmp_path / "out"
    assert main(["run", str(write_config(tmp_path, scenario)), "--out", str(out)]) == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["passed"] and doc["scenario"] == scenario
    assert "wall_time_s" in json.loads((out / "timing.json").read_text())
    assert "PASS" in capsys.readouterr().out


def test_far_zone_invariant_fails_loudly(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(write_config(tmp_path, "two-barrier-scan")), "--out", str(out)]) == 1
    inv = json.loads((out / "result.json").read_text())["invariants"]
    assert not inv["far_zone_delta"]["passed"]


def test_far_zone_passes_with_relaxed_limit(tmp_path):
    cfg = write_config(tmp_path, "two-barrier-scan")
    code = main(["run", str(cfg), "--set", "far_limit=1e-3", "--out", str(tmp_path / "o")])
    assert code == 0


def test_override_changes_parameters(tmp_path):
    cfg = write_config(tmp_path, "scatter1d")
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--set", "energies=[2.0]", "--set", "seed=3", "--out", str(out)]) == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["inputs"]["parameters"]["energies"] == [2.0] and doc["inputs"]["seed"] == 3


def test_apply_override_dotted():
    doc = {"scenario": "peres"}
    apply_override(doc, "A.N=2e-7")
    apply_override(doc, "relation=serber")
    assert doc["parameters"] == {"A": {"N": 2e-7}, "relation": "serber"}


@pytest.mark.parametrize("bad", [
    {"scenario": "no-such-thing"},
    {"scenario": "scatter1d", "parameters": {"bogus": 1}},
    {"scenario": "scatter1d", "formats": ["xml"]},
    {"scenario": "scatter1d", "seed": "x"},
    {"scenario": "scatter1d", "parameters": {"energies": [-1.0]}},
])
def test_input_errors_exit_2(tmp_path, bad):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(write_config(tmp_path, "scatter1d")), "--out", str(blocker / "sub")]) == 2


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(lab.OUTPUT_ENV, str(tmp_path / "envout"))
    assert main(["run", str(write_config(tmp_path, "scatter1d"))]) == 0
    assert (tmp_path / "envout" / "result.json").exists()


def test_json_only_format(tmp_path):
    out = tmp_path / "o"
    main(["run", str(write_config(tmp_path, "near-zone", formats=["json"])), "--out", str(out)])
    assert not list(out.glob("*.csv"))


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_deterministic(tmp_path, scenario):
    cfg = write_config(tmp_path, scenario)
    docs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        main(["run", str(cfg), "--out", str(out)])
        docs.append((out / "result.json").read_bytes())
    assert docs[0] == docs[1]


@pytest.mark.parametrize("scenario,kind,header", [
    ("near-zone", "decay", "x,log_abs_psi_beta"),
    ("two-barrier-scan", "scan", "d,log_delta"),
    ("partial-waves", "phases", "E,ell,delta_ell"),
])
def test_emit_plot(tmp_path, scenario, kind, header):
    out = tmp_path / "o"
    main(["run", str(write_config(tmp_path, scenario)), "--out", str(out)])
    plots = tmp_path / "plots"
    assert main(["emit-plot", str(out / "result.json"), "--kind", kind, "--out", str(plots)]) == 0
    lines = (plots / f"{kind}.csv").read_text().splitlines()
    assert lines[0] == header and len(lines) > 2
    if kind == "decay":
        fit = json.loads((plots / "decay_fit.json").read_text())
        assert fit["kappa_fit"] == pytest.approx(1.0, rel=1e-2)


def test_emit_plot_missing_table(tmp_path):
    out = tmp_path / "o"
    main(["run", str(write_config(tmp_path, "scatter1d")), "--out", str(out)])
    plots = tmp_path / "plots"
    assert main(["emit-plot", str(out / "result.json"), "--kind", "scan", "--out", str(plots)]) == 2
    assert not (plots / "scan.csv").exists()


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path, "refractive-index")
    proc = subprocess.run([sys.executable, "-m", "peres_lab", "run", str(cfg), "--out",
                           str(tmp_path / "o")], capture_output=True, text=True,
                          env={**os.environ})
    assert proc.returncode == 0, proc.stderr
    assert "all invariants pass" in proc.stdout
