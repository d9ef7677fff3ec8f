"""Tests for the experiment runner on small configurations"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import ExperimentConfig, ExperimentRunner, LabSettings, Verdict, equipartition_gap, run_experiment
from src.core.experiments import _scaled_side
from src.core.settings import PerformanceSection, StatisticsSection
from src.errors import ResourceLimitError
from src.lattice import LatticeSpec, build_dispersion_table, build_nn_force_field, offset_box
from src.sampling import HomogeneousSampler, gibbs_spectrum, sample_many

THERMAL = {
    "kind": "thermal-gradient",
    "params": {"base_temperature": 1.0, "amplitude": 0.5, "center": [32.0], "width": 8.0},
}


def small_config(experiment, **fields):
    base = {"experiment": experiment, "model": {"d": 1, "N": 64}, "seed": 5}
    base.update(fields)
    return ExperimentConfig(**base)


def test_scaled_side():
    assert _scaled_side(64.0, 1 / 16, 8) == 1024
    assert _scaled_side(64.0, 1 / 8, 6) == 516


def test_verdict_to_dict():
    data = Verdict("check", np.bool_(True), 0.1, 0.2).to_dict()
    assert data["passed"] is True
    assert data["name"] == "check"


def test_resource_guard_suggests_smaller_torus():
    settings = LabSettings(performance=PerformanceSection(memory_cap_mb=1e-3))
    runner = ExperimentRunner(small_config("homogeneous-convergence"), settings)
    with pytest.raises(ResourceLimitError) as info:
        runner.check_resources()
    assert info.value.suggested_N is not None
    assert info.value.suggested_N <= 64


def test_run_experiment_refuses_before_writing(tmp_path):
    settings = LabSettings(performance=PerformanceSection(memory_cap_mb=1e-3))
    cfg = small_config("homogeneous-convergence", output_dir=str(tmp_path / "out"))
    with pytest.raises(ResourceLimitError):
        run_experiment(cfg, settings)
    assert not (tmp_path / "out").exists()


def test_equipartition_gap_vanishes_for_gibbs():
    lattice = LatticeSpec(d=1, n=1, N=64)
    table = build_dispersion_table(build_nn_force_field(lattice, [1.0], [1.0]))
    samples = sample_many(HomogeneousSampler(gibbs_spectrum(table)), 3, 1000)
    gap = equipartition_gap(samples, table.field, (10,), offset_box(1, 2))
    assert gap.mean.shape == (5, 1, 1)
    assert np.max(np.abs(gap.mean) / gap.stderr) < 5
    assert len(gap.to_dataframe("gap")) == 5


def test_homogeneous_convergence_writes_outputs(tmp_path):
    cfg = small_config(
        "homogeneous-convergence", spectrum={"kind": "gibbs"}, samples=200, times=[0.0, 5.0],
        output_dir=str(tmp_path),
    )
    outcome = run_experiment(cfg)
    verdicts = {v.name: v for v in outcome.result.verdicts}
    assert verdicts["limit_stationary"].passed
    assert verdicts["exact_contraction"].passed
    assert "aa_vanishes" in verdicts
    # Gibbs input is stationary, so every time is compared
    assert "covariance_t=0" in verdicts and "covariance_t=5" in verdicts
    out = tmp_path / "homogeneous-convergence"
    manifest = json.loads((out / "manifest.json").read_text())
    assert "covariance_empirical.csv" in manifest["files"]
    assert "uniform_bound.csv" in manifest["files"]
    assert manifest["config"]["seed"] == 5
    assert outcome.exit_code in (0, 1)


def test_runs_are_reproducible(tmp_path):
    digests = []
    for name in ("a", "b"):
        cfg = small_config(
            "homogeneous-convergence", samples=50, times=[0.0, 3.0], output_dir=str(tmp_path / name),
            threads=1 if name == "a" else 3,
        )
        digests.append(run_experiment(cfg).manifest.run_digest)
    assert digests[0] == digests[1]


def test_green_decay_runner():
    cfg = small_config("green-decay", model={"d": 1, "N": 1024}, times=[5.0, 10.0, 20.0])
    result = ExperimentRunner(cfg).run()
    names = [v.name for v in result.verdicts]
    assert names == ["decay_slope", "outside_cone"]
    assert list(result.tables["green_decay"]["t"]) == [5.0, 10.0, 20.0]


def test_local_stationarity_theory_identities():
    cfg = small_config(
        "local-stationarity", profile=THERMAL, epsilons=[1 / 16], samples=40, taus=[0.5],
        positions=[[32.0]],
    )
    result = ExperimentRunner(cfg).run()
    verdicts = {v.name: v for v in result.verdicts}
    assert verdicts["equipartition_theory_tau=0.5_r=32"].passed
    assert verdicts["antisymmetry_theory_tau=0.5_r=32"].passed
    assert "local_covariance_tau=0.5_r=32" in verdicts
    assert "aa_vanishes_tau=0.5_r=32" in verdicts


def test_kinetic_wigner_runner():
    cfg = small_config(
        "kinetic-wigner", profile=THERMAL, epsilons=[1 / 8, 1 / 16], samples=20, taus=[0.5],
        positions=[[32.0]], macro_points=8,
    )
    result = ExperimentRunner(cfg).run()
    verdicts = {v.name: v for v in result.verdicts}
    assert verdicts["trace_conserved_M=8"].passed
    assert verdicts["trace_conserved_M=16"].passed
    assert "transport_first_order" in verdicts
    distances = result.tables["wigner_distance"]
    assert list(distances["N"]) == [516, 1024]
    assert "wigner_monotone_tau=0.5_r=32" in verdicts


def test_gaussianization_runner():
    settings = LabSettings(statistics=StatisticsSection(min_kurtosis_samples=50, bootstrap_resamples=100))
    cfg = small_config(
        "gaussianization", profile=THERMAL, epsilons=[1 / 16], samples=60, taus=[0.5],
        positions=[[32.0]],
    )
    result = ExperimentRunner(cfg, settings).run()
    names = [v.name for v in result.verdicts]
    assert names[0] == "initial_non_gaussian"
    assert "gaussianized_tau=0.5" in names
    assert "characteristic_v_point_tau=0.5" in names
    assert set(result.tables["kurtosis"]["probe"]) == {"v_point", "u_point", "gradient"}


def test_empirical_contraction_uses_sampled_covariances():
    """The contraction verdict is computed from Monte Carlo estimates, not the exact flow"""
    cfg = small_config(
        "homogeneous-convergence", spectrum={"kind": "gibbs"}, samples=300, times=[0.0, 4.0, 8.0],
    )
    result = ExperimentRunner(cfg).run()
    verdicts = {v.name: v for v in result.verdicts}
    table = result.tables["empirical_distance"]
    assert list(table.columns) == ["t", "l1_distance", "l1_noise"]
    assert list(table["t"]) == [0.0, 4.0, 8.0]
    assert (table["l1_noise"] > 0).all()
    # Gibbs data sit at the limit, so the sampled distance is pure noise and stays under the floor
    contraction = verdicts["empirical_contraction"]
    assert contraction.value == pytest.approx(table["l1_distance"].iloc[-1])
    assert contraction.passed
    # exact distances vanish for stationary input while sampled ones do not
    assert result.tables["exact_distance"]["l1_distance"].max() < 1e-8
    assert table["l1_distance"].min() > 0
