"""Laboratory-wide settings from config.yaml with environment overrides"""

import logging
from pathlib import Path
from typing import Optional, Union

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..lattice.conditions import ConditionTolerances

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config.yaml"


class LatticeSection(BaseModel):
    degeneracy_rel_tol: float = 1e-8
    singular_tol: float = 1e-8
    e3_floor: float = 1e-10
    hessian_tol: float = 1e-6
    det_tol: float = 1e-10
    e4_max_fraction: float = 0.5
    e5_min_variance: float = 1e-10
    e6_growth_ratio: float = 0.75


class DynamicsSection(BaseModel):
    cone_margin: float = 1.05
    split_delta: float = 1.0
    imag_residue_tol: float = 1e-9
    outside_cone_threshold: float = 1e-6
    outside_cone_time: float = 50.0


class StatisticsSection(BaseModel):
    sigma: float = 4.0
    bootstrap_resamples: int = 1000
    min_kurtosis_samples: int = 1000
    taper: str = "triangular"


class TransportSection(BaseModel):
    cfl: float = Field(default=0.9, gt=0, le=0.9)


class PerformanceSection(BaseModel):
    max_workers: int = Field(default=4, ge=1)
    memory_cap_mb: float = Field(default=2048, gt=0)


class OutputSection(BaseModel):
    directory: str = "runs"
    float_format: str = "%.17g"


class LabSettings(BaseSettings):
    """Settings tree; environment variables take precedence over the YAML file"""

    model_config = SettingsConfigDict(
        env_prefix="LATTICE_KINETICS_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    lattice: LatticeSection = Field(default_factory=LatticeSection)
    dynamics: DynamicsSection = Field(default_factory=DynamicsSection)
    statistics: StatisticsSection = Field(default_factory=StatisticsSection)
    transport: TransportSection = Field(default_factory=TransportSection)
    performance: PerformanceSection = Field(default_factory=PerformanceSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @classmethod
    def settings_customise_sources(
        cls, settings_cls, init_settings, env_settings, dotenv_settings, file_secret_settings
    ):
        return env_settings, init_settings, dotenv_settings, file_secret_settings

    def condition_tolerances(self) -> ConditionTolerances:
        section = self.lattice
        return ConditionTolerances(
            e3_floor=section.e3_floor,
            hessian_tol=section.hessian_tol,
            det_tol=section.det_tol,
            e4_max_fraction=section.e4_max_fraction,
            e5_min_variance=section.e5_min_variance,
            e6_growth_ratio=section.e6_growth_ratio,
        )


def load_settings(path: Optional[Union[str, Path]] = None) -> LabSettings:
    """
    Load settings from a YAML file

    Args:
        path: Config file; defaults to config.yaml at the repository root

    Returns:
        LabSettings; an absent default file gives built-in defaults
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        if path is not None:
            raise FileNotFoundError(f"Config file not found: {config_path}")
        logger.debug("No config.yaml found, using defaults")
        return LabSettings()
    with open(config_path, "r") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config file must contain a mapping: {config_path}")
    return LabSettings(**data)
