"""Experiment orchestration, settings and reports"""

from .settings import LabSettings, load_settings
from .experiment_config import ExperimentConfig, ExperimentName, apply_overrides, load_experiment_config
from .reports import DiffResult, RunManifest, diff_frames, diff_reports, read_table, write_table
from .experiments import ExperimentResult, ExperimentRunner, RunOutcome, Verdict, equipartition_gap, run_experiment

__all__ = [
    "LabSettings",
    "load_settings",
    "ExperimentConfig",
    "ExperimentName",
    "apply_overrides",
    "load_experiment_config",
    "DiffResult",
    "RunManifest",
    "diff_frames",
    "diff_reports",
    "read_table",
    "write_table",
    "ExperimentResult",
    "ExperimentRunner",
    "RunOutcome",
    "Verdict",
    "equipartition_gap",
    "run_experiment",
]
