import json
import os
import subprocess
import sys

import pytest

from geomtomo.cli import main, read_config
from geomtomo.scenarios import REGISTRY, list_scenarios, make_scenario, run_scenario

FAST = "prop-3-x-planar-pair"


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_list(capsys):
    code, out = _run(capsys, "list")
    assert code == 0
    assert "thm-4-1-harmonic" in out.out and "thm-4-1-ell2" in out.out
    line = next(l for l in out.out.splitlines() if l.startswith("thm-6-1-ksections"))
    assert "n=4" in line and "k=2" in line
    assert len(list_scenarios()) >= 12


def test_run_json_schema(capsys, tmp_path):
    code, out = _run(capsys, "run", "--scenario", FAST, "--out-dir", str(tmp_path))
    assert code == 0
    d = json.loads(out.out.strip())
    assert set(d) == {"scenario", "params", "metrics", "verdict", "files"}
    assert d["scenario"] == FAST and d["verdict"] == "pass"
    assert all(isinstance(v, (int, float)) for v in d["metrics"].values())
    for f in d["files"]:
        assert os.path.exists(f)
    curves = list(tmp_path.glob(f"{FAST}.*.txt"))
    assert curves
    t, s = curves[0].read_text().split("\n")[0].split()
    float(t), float(s)


def test_run_csv(capsys):
    code, out = _run(capsys, "run", "--scenario", FAST, "--format", "csv")
    assert code == 0
    rows = [r.split(",") for r in out.out.strip().splitlines()]
    assert all(r[0] == FAST for r in rows)
    assert rows[-1][1:] == ["verdict", "pass"]


def test_flags_and_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# planar pair\neps = 0.05\ngrid=2048\n")
    assert read_config(str(cfg)) == {"eps": "0.05", "grid": "2048"}
    code, out = _run(capsys, "run", "--scenario", FAST, "--config", str(cfg), "--grid", "1024")
    d = json.loads(out.out)
    assert d["params"]["eps"] == 0.05
    assert d["params"]["grid"] == 1024


def test_invalid_parameters_exit_2(capsys):
    code, out = _run(capsys, "run", "--scenario", FAST, "--k", "3")
    assert code == 2
    assert "unknown parameter" in out.err or "valid" in out.err
    code, out = _run(capsys, "run", "--scenario", FAST, "--eps", "-1")
    assert code == 2
    with pytest.raises(SystemExit):
        main(["run", "--scenario", "no-such-scenario"])


def test_make_scenario_validation():
    with pytest.raises(ValueError, match="valid"):
        make_scenario(FAST, bogus=1)
    with pytest.raises(ValueError):
        make_scenario("nope")


def test_failing_scenario_exit_code(capsys):
    # the planar pair with a coarse grid cannot reach its KS tolerance
    code, out = _run(capsys, "run", "--scenario", FAST, "--grid", "256")
    assert code == 1
    assert json.loads(out.out)["verdict"] == "fail"


def test_same_seed_identical_metrics():
    a = run_scenario(make_scenario("prop-3-1", samples=20, seed=5))
    b = run_scenario(make_scenario("prop-3-1", samples=20, seed=5))
    assert json.dumps(a.metrics, sort_keys=True) == json.dumps(b.metrics, sort_keys=True)


def test_registry_descriptions_and_budgets():
    for name, entry in REGISTRY.items():
        assert entry.description
        assert 0 < entry.budget <= 60


def test_console_script_module_entry():
    out = subprocess.run([sys.executable, "-m", "geomtomo", "list"],
                         capture_output=True, text=True, check=True)
    assert "harmonic-engine" in out.stdout
