"""Report tables, empirical-versus-theory diffs and run manifests"""

import hashlib
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd
import pydantic
import scipy
from scipy import stats

from .. import __version__
from ..estimators.covariance import REPORT_COLUMNS, matrix_frame
from ..errors import SchemaMismatchError

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["quantity", "index", "row", "col"]


def offset_labels(offsets) -> List[str]:
    return [",".join(str(int(c)) for c in a) for a in offsets]


def write_table(df: pd.DataFrame, path: Union[str, Path], float_format: str = "%.17g") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
    return path


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """Read a report table, checking it carries the report schema"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    df = pd.read_csv(path, dtype={"quantity": str, "index": str})
    if list(df.columns) != REPORT_COLUMNS:
        raise SchemaMismatchError(f"{path.name} has columns {list(df.columns)}, expected {REPORT_COLUMNS}")
    return df


@dataclass
class DiffResult:
    """Per-entry z-scores of an empirical table against a theory table"""
    table: pd.DataFrame
    sigma: float
    fraction_beyond: float
    allowed_fraction: float

    @property
    def passed(self) -> bool:
        return self.fraction_beyond < self.allowed_fraction

    @property
    def max_z(self) -> float:
        return float(self.table["z"].max()) if len(self.table) else 0.0

    def failures(self) -> pd.DataFrame:
        return self.table[self.table["z"] > self.sigma]

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "entries": int(len(self.table)),
            "beyond_sigma": int((self.table["z"] > self.sigma).sum()),
            "fraction_beyond": self.fraction_beyond,
            "allowed_fraction": self.allowed_fraction,
            "max_z": self.max_z,
        }


def diff_frames(empirical: pd.DataFrame, theory: pd.DataFrame, sigma: float = 4.0) -> DiffResult:
    """
    z = |emp - th| / stderr per entry, stderr combining both tables in quadrature

    Passes when the fraction of entries with z > sigma stays below twice the two-sided
    normal tail rate at sigma.
    """
    for name, df in (("empirical", empirical), ("theory", theory)):
        if list(df.columns) != REPORT_COLUMNS:
            raise SchemaMismatchError(f"{name} table has columns {list(df.columns)}")
    emp = empirical.astype({"index": str})
    th = theory.astype({"index": str})
    if emp.duplicated(KEY_COLUMNS).any() or th.duplicated(KEY_COLUMNS).any():
        raise SchemaMismatchError("Report keys (quantity, index, row, col) are not unique")
    merged = emp.merge(th, on=KEY_COLUMNS, how="outer", suffixes=("_emp", "_th"), indicator=True)
    unmatched = merged[merged["_merge"] != "both"]
    if len(unmatched):
        keys = unmatched[KEY_COLUMNS].head(5).to_dict("records")
        raise SchemaMismatchError(f"{len(unmatched)} entries present in only one table, e.g. {keys}")

    diff = np.hypot(merged["real_emp"] - merged["real_th"], merged["imag_emp"] - merged["imag_th"])
    err = np.hypot(merged["stderr_emp"], merged["stderr_th"])
    scale = np.maximum(1.0, np.hypot(merged["real_th"], merged["imag_th"]))
    exact = diff <= 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(err > 0, diff / err, np.where(exact, 0.0, np.inf))

    table = merged[KEY_COLUMNS].copy()
    table["empirical_real"] = merged["real_emp"]
    table["empirical_imag"] = merged["imag_emp"]
    table["theory_real"] = merged["real_th"]
    table["theory_imag"] = merged["imag_th"]
    table["stderr"] = err
    table["z"] = z
    fraction = float((table["z"] > sigma).mean()) if len(table) else 0.0
    allowed = 2.0 * (2.0 * float(stats.norm.sf(sigma)))
    result = DiffResult(table=table, sigma=sigma, fraction_beyond=fraction, allowed_fraction=allowed)
    logger.info("Diff: %d entries, max z %.2f, %s", len(table), result.max_z,
                "pass" if result.passed else "fail")
    return result


def diff_reports(empirical: Union[str, Path], theory: Union[str, Path], sigma: float = 4.0) -> DiffResult:
    return diff_frames(read_table(empirical), read_table(theory), sigma)


def file_digest(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def library_versions() -> Dict[str, str]:
    return {
        "lattice-kinetics": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


@dataclass
class RunManifest:
    """Everything needed to audit one run"""
    experiment: str
    config: dict
    verdicts: Dict[str, dict]
    files: Dict[str, str]
    run_digest: str
    wall_time_s: float
    versions: Dict[str, str] = field(default_factory=library_versions)
    created: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S"))

    @property
    def passed(self) -> bool:
        return all(v.get("passed", False) for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "passed": self.passed,
            "verdicts": self.verdicts,
            "files": self.files,
            "run_digest": self.run_digest,
            "wall_time_s": self.wall_time_s,
            "versions": self.versions,
            "created": self.created,
            "config": self.config,
        }


def run_digest(files: Dict[str, str]) -> str:
    """sha256 over the sorted (name, digest) pairs of the CSV outputs"""
    h = hashlib.sha256()
    for name in sorted(files):
        if name.endswith(".csv"):
            h.update(f"{name}:{files[name]}\n".encode("utf-8"))
    return h.hexdigest()


def write_manifest(out_dir: Union[str, Path], experiment: str, config: dict,
                   verdicts: Dict[str, dict], wall_time_s: float) -> RunManifest:
    """Digest every file in ``out_dir`` and write manifest.json next to them"""
    out_dir = Path(out_dir)
    files = {
        p.name: file_digest(p)
        for p in sorted(out_dir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    manifest = RunManifest(
        experiment=experiment, config=config, verdicts=verdicts, files=files,
        run_digest=run_digest(files), wall_time_s=wall_time_s,
    )
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest.to_dict(), f, indent=2, sort_keys=True, default=str)
    return manifest
