"""Tests for report tables, diffs, manifests, settings and experiment configs"""

import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import (
    ExperimentConfig,
    apply_overrides,
    diff_frames,
    diff_reports,
    load_experiment_config,
    load_settings,
    read_table,
    write_table,
)
from src.core.reports import file_digest, write_manifest
from src.errors import SchemaMismatchError
from src.estimators.covariance import REPORT_COLUMNS, matrix_frame


def theory_frame(count=50):
    values = np.linspace(-1.0, 1.0, count * 4).reshape(count, 2, 2)
    return matrix_frame("q", [str(k) for k in range(count)], values)


def empirical_from(theory, stderr=0.1, seed=0):
    rng = np.random.default_rng(seed)
    emp = theory.copy()
    emp["stderr"] = stderr
    emp["real"] = emp["real"] + rng.uniform(-1.0, 1.0, len(emp)) * stderr
    return emp


def test_identical_frames_pass():
    th = theory_frame()
    result = diff_frames(th, th.copy())
    assert result.passed
    assert result.max_z == 0.0
    assert result.summary()["entries"] == 200


def test_noise_within_one_sigma_passes():
    th = theory_frame()
    result = diff_frames(empirical_from(th), th, sigma=4.0)
    assert result.passed
    assert result.max_z <= 1.0


def test_ten_sigma_entry_fails():
    th = theory_frame()
    emp = empirical_from(th)
    emp.loc[7, "real"] = th.loc[7, "real"] + 10 * 0.1
    result = diff_frames(emp, th)
    assert not result.passed
    failures = result.failures()
    assert len(failures) == 1
    assert failures.iloc[0]["index"] == "1"


def test_inexact_entry_without_error_is_infinite():
    th = theory_frame(2)
    emp = th.copy()
    emp.loc[0, "real"] += 1.0
    result = diff_frames(emp, th)
    assert np.isinf(result.max_z)
    assert not result.passed


def test_schema_mismatch():
    th = theory_frame()
    with pytest.raises(SchemaMismatchError):
        diff_frames(th.drop(columns=["stderr"]), th)
    with pytest.raises(SchemaMismatchError):
        diff_frames(th.iloc[:-1], th)
    with pytest.raises(SchemaMismatchError):
        diff_frames(pd.concat([th, th.iloc[:1]]), th)


def test_table_round_trip_is_deterministic(tmp_path):
    th = theory_frame()
    first = write_table(th, tmp_path / "a" / "q.csv")
    second = write_table(th, tmp_path / "b" / "q.csv")
    assert file_digest(first) == file_digest(second)
    back = read_table(first)
    assert list(back.columns) == REPORT_COLUMNS
    assert np.array_equal(back["real"].to_numpy(), th["real"].to_numpy())
    assert diff_reports(first, second).passed


def test_read_table_checks_schema(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"a": [1]}).to_csv(path, index=False)
    with pytest.raises(SchemaMismatchError):
        read_table(path)
    with pytest.raises(FileNotFoundError):
        read_table(tmp_path / "missing.csv")


def test_manifest_lists_outputs(tmp_path):
    write_table(theory_frame(), tmp_path / "q.csv")
    manifest = write_manifest(tmp_path, "demo", {"seed": 1}, {"check": {"passed": True}}, 0.5)
    data = json.loads((tmp_path / "manifest.json").read_text())
    assert data["files"]["q.csv"] == file_digest(tmp_path / "q.csv")
    assert data["run_digest"] == manifest.run_digest
    assert data["passed"] is True
    assert "numpy" in data["versions"]


def test_apply_overrides():
    data = {"model": {"N": 64}, "epsilons": [0.1]}
    result = apply_overrides(data, ["model.N=128", "epsilons=[0.1, 0.05]", "profile.kind=step"])
    assert result["model"]["N"] == 128
    assert result["epsilons"] == [0.1, 0.05]
    assert result["profile"]["kind"] == "step"
    assert data["model"]["N"] == 64
    with pytest.raises(ValueError):
        apply_overrides(data, ["model.N"])


def test_config_rejects_increasing_epsilons():
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="kinetic-wigner", epsilons=[0.01, 0.02])


def test_config_rejects_odd_side_and_short_green_times():
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="homogeneous-convergence", model={"N": 63})
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="green-decay", times=[10.0])
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="local-stationarity", positions=[[1.0, 2.0]])


def test_config_sorts_times():
    cfg = ExperimentConfig(experiment="homogeneous-convergence", times=[50.0, 0.0, 10.0])
    assert cfg.times == [0.0, 10.0, 50.0]


def test_load_experiment_config_with_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("experiment: green-decay\ntimes: [10, 20]\nmodel:\n  N: 1024\n")
    cfg = load_experiment_config(path, ["model.N=2048"], seed=9, output_dir=None)
    assert cfg.model.N == 2048
    assert cfg.seed == 9
    assert cfg.output_dir == "runs"


def test_bundled_experiment_documents_load():
    data_dir = Path(__file__).parent.parent / "data" / "experiments"
    documents = sorted(data_dir.glob("*.json"))
    assert documents
    for path in documents:
        load_experiment_config(path)


def test_stationarity_document_runs_homogeneous_convergence():
    path = Path(__file__).parent.parent / "data" / "experiments" / "stationarity.json"
    cfg = load_experiment_config(path)
    assert cfg.experiment.value == "homogeneous-convergence"
    assert cfg.spectrum.kind == "gibbs"


def test_settings_from_yaml_and_environment(tmp_path, monkeypatch):
    path = tmp_path / "settings.yaml"
    path.write_text("statistics:\n  sigma: 3.5\nperformance:\n  max_workers: 2\n")
    monkeypatch.setenv("LATTICE_KINETICS_PERFORMANCE__MAX_WORKERS", "8")
    settings = load_settings(path)
    assert settings.statistics.sigma == 3.5
    assert settings.performance.max_workers == 8
    assert settings.lattice.singular_tol == 1e-8


def test_settings_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_settings(tmp_path / "nope.yaml")


def test_default_settings_file():
    settings = load_settings()
    assert settings.dynamics.cone_margin == 1.05
    assert settings.condition_tolerances().e3_floor == settings.lattice.e3_floor
