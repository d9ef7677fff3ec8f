"""Reader for model, profile and experiment documents in JSON or YAML"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import yaml

from ..lattice.force_field import ForceField, build_nn_force_field
from ..lattice.grid import LatticeSpec
from ..sampling.spectra import SlowProfile, TabulatedProfile, build_profile


@dataclass
class ParsedDocument:
    """Container for a parsed input document"""
    data: Dict[str, Any]
    filename: str
    file_type: str


class ModelParser:
    """Parse JSON/YAML documents describing force fields, profiles and experiments"""

    def __init__(self):
        self.supported_formats = {".json", ".yaml", ".yml"}

    def parse(self, file_path: Union[str, Path]) -> ParsedDocument:
        """
        Parse a document file into a mapping

        Args:
            file_path: Path to a .json, .yaml or .yml file

        Returns:
            ParsedDocument with the decoded mapping
        """
        path = Path(file_path)

        if not path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        suffix = path.suffix.lower()
        if suffix not in self.supported_formats:
            raise ValueError(f"Unsupported file format: {suffix}. Supported: {sorted(self.supported_formats)}")

        text = path.read_text(encoding="utf-8")
        return self.parse_text(text, path.name, "json" if suffix == ".json" else "yaml")

    def parse_text(self, text: str, filename: str = "document", file_type: str = "json") -> ParsedDocument:
        try:
            data = json.loads(text) if file_type == "json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ValueError(f"Could not decode {filename}: {e}")
        if not isinstance(data, dict):
            raise ValueError(f"{filename} must contain a mapping at the top level")
        return ParsedDocument(data=data, filename=filename, file_type=file_type)

    def parse_force_field(self, file_path: Union[str, Path]) -> ForceField:
        return force_field_from_dict(self.parse(file_path).data)

    def parse_profile(self, file_path: Union[str, Path]) -> SlowProfile:
        return profile_from_dict(self.parse(file_path).data)


def force_field_from_dict(data: Dict[str, Any]) -> ForceField:
    """
    Force field from either an explicit offset list or a nearest-neighbour description

    Nearest-neighbour documents carry ``kind: nearest-neighbor`` with d, N, gammas and masses.
    """
    if data.get("kind", "explicit") == "nearest-neighbor":
        try:
            gammas = [float(g) for g in data["gammas"]]
            masses = [float(m) for m in data.get("masses", [0.0] * len(gammas))]
            lattice = LatticeSpec(d=int(data["d"]), n=len(gammas), N=int(data["N"]))
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed nearest-neighbour model: {e}")
        return build_nn_force_field(lattice, gammas, masses)
    return ForceField.from_dict(data)


def profile_from_dict(data: Dict[str, Any]) -> SlowProfile:
    """Stock profile (``kind`` + ``params``) or a tabulated one (``r_axes`` + values)"""
    kind = data.get("kind")
    if kind is None:
        raise ValueError("Profile document needs a 'kind'")
    if kind == "tabulated":
        try:
            real = np.asarray(data["values_real"], dtype=float)
            imag = np.asarray(data.get("values_imag", np.zeros_like(real)), dtype=float)
            return TabulatedProfile(data.get("name", "tabulated"), data["r_axes"], real + 1j * imag)
        except KeyError as e:
            raise ValueError(f"Tabulated profile is missing {e}")
    return build_profile(kind, data.get("params", {}))
