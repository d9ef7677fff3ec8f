"""Tests for the lattice-kinetics command line"""

import json
import sys
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import EXIT_FAIL, EXIT_PASS, EXIT_REFUSED, EXIT_USAGE, main
from src.core import write_table
from src.estimators.covariance import matrix_frame

DATA = Path(__file__).parent.parent / "data"


def write_config(tmp_path, **fields):
    config = {
        "experiment": "homogeneous-convergence",
        "model": {"d": 1, "N": 64, "gammas": [1.0], "masses": [1.0]},
        "spectrum": {"kind": "gibbs"},
        "samples": 200,
        "times": [0.0, 5.0],
        "seed": 17,
    }
    config.update(fields)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    return path


def test_run_writes_manifest_and_tables(tmp_path):
    config = write_config(tmp_path)
    out = tmp_path / "out"
    code = main(["run", "--config", str(config), "--out", str(out)])
    assert code in (EXIT_PASS, EXIT_FAIL)
    run_dir = out / "homogeneous-convergence"
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["verdicts"]["limit_stationary"]["passed"]
    assert manifest["verdicts"]["exact_contraction"]["passed"]
    assert (run_dir / "covariance_empirical.csv").exists()
    assert (run_dir / "covariance_theory.csv").exists()


def test_same_seed_same_digest(tmp_path):
    config = write_config(tmp_path, samples=40)
    digests = []
    for name in ("first", "second"):
        main(["run", "--config", str(config), "--out", str(tmp_path / name), "--threads", "2"])
        manifest = json.loads((tmp_path / name / "homogeneous-convergence" / "manifest.json").read_text())
        digests.append(manifest["run_digest"])
    assert digests[0] == digests[1]


def test_invalid_configs_exit_with_usage(tmp_path):
    config = write_config(tmp_path)
    assert main(["run", "--config", str(config), "--set", "model.N=63"]) == EXIT_USAGE
    wigner = DATA / "experiments" / "kinetic_wigner.json"
    assert main(["run", "--config", str(wigner), "--set", "epsilons=[0.01, 0.02]"]) == EXIT_USAGE
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_resource_cap_refuses(tmp_path):
    config = write_config(tmp_path)
    settings = tmp_path / "settings.yaml"
    settings.write_text("performance:\n  memory_cap_mb: 0.001\n")
    code = main(["--settings", str(settings), "run", "--config", str(config), "--out", str(tmp_path / "out")])
    assert code == EXIT_REFUSED
    assert not (tmp_path / "out").exists()


def _report(path, shift=0.0):
    values = np.linspace(0.0, 1.0, 12).reshape(3, 2, 2)
    frame = matrix_frame("covariance", ["-1", "0", "1"], values)
    frame["stderr"] = 0.01
    frame.loc[4, "real"] += shift
    return write_table(frame, path)


def test_diff_exit_codes(tmp_path, capsys):
    theory = _report(tmp_path / "theory.csv")
    same = _report(tmp_path / "same.csv")
    shifted = _report(tmp_path / "shifted.csv", shift=1.0)
    assert main(["diff", str(same), str(theory)]) == EXIT_PASS
    summary = json.loads(capsys.readouterr().out)
    assert summary["passed"] is True
    assert main(["diff", str(shifted), str(theory), "--out", str(tmp_path / "z.csv")]) == EXIT_FAIL
    assert (tmp_path / "z.csv").exists()
    assert main(["diff", str(tmp_path / "missing.csv"), str(theory)]) == EXIT_USAGE


def test_validate_model_prints_conditions(capsys):
    code = main(["validate-model", str(DATA / "models" / "nn_d1_massive.json")])
    assert code in (EXIT_PASS, EXIT_FAIL)
    report = json.loads(capsys.readouterr().out)
    assert "conditions" in report
    assert report["passed"] == (code == EXIT_PASS)


def test_validate_model_reports_unstable_field(tmp_path, capsys):
    path = tmp_path / "unstable.json"
    path.write_text(json.dumps({"d": 1, "n": 1, "N": 16, "entries": [{"offset": [0], "matrix": [[-1.0]]}]}))
    assert main(["validate-model", str(path)]) == EXIT_FAIL
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False
    assert report["witness"] is not None


def test_validate_profile(capsys):
    code = main([
        "validate-profile", str(DATA / "profiles" / "thermal_gradient.json"),
        "--model", str(DATA / "models" / "nn_d1_massive.json"), "--r", "32",
    ])
    assert code == EXIT_PASS
    assert json.loads(capsys.readouterr().out)["passed"] is True
