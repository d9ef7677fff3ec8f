"""Experiment configuration documents and command-line overrides"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from ..lattice.force_field import ForceField
from ..parsers.model_parser import ModelParser, force_field_from_dict, profile_from_dict
from ..sampling.samplers import NoiseKind
from ..sampling.spectra import SlowProfile


class ExperimentName(str, Enum):
    HOMOGENEOUS_CONVERGENCE = "homogeneous-convergence"
    GREEN_DECAY = "green-decay"
    KINETIC_WIGNER = "kinetic-wigner"
    LOCAL_STATIONARITY = "local-stationarity"
    GAUSSIANIZATION = "gaussianization"


class ModelConfig(BaseModel):
    """Nearest-neighbour parameters, or a path to a model document"""
    d: int = Field(default=1, ge=1, le=3)
    N: int = Field(default=256, ge=8)
    gammas: List[float] = [1.0]
    masses: List[float] = [1.0]
    path: Optional[str] = None

    @field_validator("N")
    @classmethod
    def even_side(cls, v: int) -> int:
        if v % 2:
            raise ValueError(f"N must be even, got {v}")
        return v

    @model_validator(mode="after")
    def matching_components(self) -> "ModelConfig":
        if self.path is None and len(self.gammas) != len(self.masses):
            raise ValueError("gammas and masses must have the same length")
        if not self.gammas:
            raise ValueError("gammas must not be empty")
        return self

    def build_field(self) -> ForceField:
        if self.path is not None:
            return ModelParser().parse_force_field(self.path)
        return force_field_from_dict({
            "kind": "nearest-neighbor", "d": self.d, "N": self.N,
            "gammas": self.gammas, "masses": self.masses,
        })


class SpectrumConfig(BaseModel):
    kind: str = "gibbs"
    params: Dict[str, Any] = {}


class ProfileConfig(BaseModel):
    kind: str = "thermal-gradient"
    params: Dict[str, Any] = {}
    path: Optional[str] = None

    def build(self) -> SlowProfile:
        if self.path is not None:
            return ModelParser().parse_profile(self.path)
        return profile_from_dict({"kind": self.kind, "params": dict(self.params)})


class ExperimentConfig(BaseModel):
    """One reproducible run"""
    experiment: ExperimentName
    model: ModelConfig = Field(default_factory=ModelConfig)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    epsilons: List[float] = [0.1]
    beta: float = Field(default=0.75, gt=0.5, lt=1.0)
    samples: int = Field(default=200, ge=2)
    times: List[float] = [0.0, 50.0]
    taus: List[float] = [0.5]
    positions: List[List[float]] = [[32.0]]
    offsets: Optional[List[List[int]]] = None
    noise: NoiseKind = NoiseKind.GAUSSIAN
    y_max: Optional[int] = Field(default=None, ge=0)
    taper: str = "triangular"
    split_delta: Optional[float] = Field(default=None, gt=0)
    expected_slope: Optional[float] = None
    slope_tolerance: float = Field(default=0.1, gt=0)
    torus_scale: float = Field(default=64.0, gt=0)
    macro_points: int = Field(default=256, ge=8)
    sigma: float = Field(default=4.0, gt=0)
    seed: int = Field(default=0, ge=0, le=2 ** 64 - 1)
    threads: int = Field(default=1, ge=1)
    output_dir: str = "runs"

    @field_validator("epsilons")
    @classmethod
    def decreasing_epsilons(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("epsilons must not be empty")
        if any(not 0 < e < 1 for e in v):
            raise ValueError(f"epsilons must lie in (0, 1), got {v}")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError(f"epsilons must be strictly decreasing, got {v}")
        return v

    @field_validator("times", "taus", "positions")
    @classmethod
    def nonempty(cls, v: list) -> list:
        if not v:
            raise ValueError("list parameters must not be empty")
        return v

    @field_validator("times", "taus")
    @classmethod
    def nonnegative(cls, v: List[float]) -> List[float]:
        if any(t < 0 for t in v):
            raise ValueError(f"times must be nonnegative, got {v}")
        return sorted(v)

    @field_validator("taper")
    @classmethod
    def known_taper(cls, v: str) -> str:
        if v not in ("triangular", "boxcar"):
            raise ValueError(f"taper must be 'triangular' or 'boxcar', got {v}")
        return v

    @model_validator(mode="after")
    def consistent_dimensions(self) -> "ExperimentConfig":
        d = self.model.d
        if self.model.path is None:
            if any(len(r) != d for r in self.positions):
                raise ValueError(f"positions must have {d} coordinates each")
            if self.offsets is not None and any(len(a) != d for a in self.offsets):
                raise ValueError(f"offsets must have {d} coordinates each")
        if self.experiment == ExperimentName.GREEN_DECAY and (len(self.times) < 2 or self.times[0] <= 0):
            raise ValueError("green-decay needs at least two positive times")
        return self


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(data: Dict[str, Any], assignments: Sequence[str]) -> Dict[str, Any]:
    """
    Apply ``path.to.field=value`` assignments to a config mapping

    Values are decoded as JSON when possible and kept as strings otherwise.
    """
    result = json.loads(json.dumps(data))
    for assignment in assignments:
        if "=" not in assignment:
            raise ValueError(f"Override must look like path=value, got {assignment!r}")
        path, raw = assignment.split("=", 1)
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ValueError(f"Empty override path in {assignment!r}")
        node = result
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ValueError(f"Cannot set {path}: {key} is not a mapping")
        node[keys[-1]] = _parse_value(raw)
    return result


def load_experiment_config(
    path: Union[str, Path], overrides: Sequence[str] = (), **fields: Any
) -> ExperimentConfig:
    """Read a config document, apply --set overrides, then explicit field overrides"""
    data = ModelParser().parse(path).data
    data = apply_overrides(data, overrides)
    data.update({k: v for k, v in fields.items() if v is not None})
    return ExperimentConfig(**data)
