"""Grid checks of conditions E1-E6 and detection of the critical set"""

import json
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .dispersion import DispersionTable
from .force_field import ForceField

logger = logging.getLogger(__name__)


class ConditionStatus(Enum):
    """Outcome of a single condition check"""
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class ConditionTolerances:
    """Numeric thresholds used by the condition checks"""
    e3_floor: float = 1e-10
    hessian_tol: float = 1e-6
    det_tol: float = 1e-10
    e4_max_fraction: float = 0.5
    e5_min_variance: float = 1e-10
    e6_growth_ratio: float = 0.75
    e6_negligible: float = 1e-9


@dataclass
class ConditionRecord:
    """Verdict for one condition"""
    name: str
    status: ConditionStatus
    witness: Optional[Tuple[int, ...]] = None
    margin: Optional[float] = None
    detail: str = ""
    values: Dict[str, float] = field(default_factory=dict)


@dataclass
class ConditionReport:
    """Verdicts for E1-E6 plus grid statistics"""
    records: Dict[str, ConditionRecord]
    singular_fraction: float
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.status != ConditionStatus.FAIL for r in self.records.values())

    @property
    def hard_failure(self) -> bool:
        return any(
            self.records[name].status == ConditionStatus.FAIL
            for name in ("E2", "E3") if name in self.records
        )

    def status(self, name: str) -> ConditionStatus:
        return self.records[name].status

    def to_dict(self) -> dict:
        records = {}
        for name, record in self.records.items():
            item = asdict(record)
            item["status"] = record.status.value
            item["witness"] = list(record.witness) if record.witness is not None else None
            records[name] = item
        return {
            "passed": self.passed,
            "singular_fraction": self.singular_fraction,
            "warnings": list(self.warnings),
            "conditions": records,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _sign_change_points(values: np.ndarray, d: int) -> np.ndarray:
    """Mark the neighbour of each sign change with the smaller magnitude"""
    marks = np.zeros(values.shape, dtype=bool)
    for axis in range(d):
        nxt = np.roll(values, -1, axis=axis)
        change = np.sign(values) * np.sign(nxt) < 0
        here = change & (np.abs(values) <= np.abs(nxt))
        there = change & (np.abs(nxt) <= np.abs(values))
        marks |= here | np.roll(there, 1, axis=axis)
    return marks


def _singular_points(table: DispersionTable, det_tol: float) -> np.ndarray:
    return np.linalg.det(table.vhat).real < det_tol


def critical_points(
    table: DispersionTable, tolerances: Optional[ConditionTolerances] = None
) -> np.ndarray:
    """
    Grid points belonging to the critical set

    Band crossings, vanishing or sign-changing Hessian determinants and pure second
    derivatives, and the zero set of det V̂.
    """
    tol = tolerances or ConditionTolerances()
    d = table.lattice.d
    points = table.band_count < table.band_count.max()

    det = table.hessian_det
    for j in range(table.lattice.n):
        dj = det[..., j]
        points |= (np.abs(dj) < tol.hessian_tol) | _sign_change_points(dj, d)
        for axis in range(d):
            second = table.hessians[..., j, axis, axis]
            points |= (np.abs(second) < tol.hessian_tol) | _sign_change_points(second, d)

    points |= _singular_points(table, tol.det_tol)
    return points


def critical_distance(
    table: DispersionTable,
    reach: float,
    tolerances: Optional[ConditionTolerances] = None,
) -> np.ndarray:
    """
    Distance on the dual torus to the nearest critical grid point

    Exact up to ``reach``; beyond it values are only guaranteed to exceed ``reach``.
    """
    lattice = table.lattice
    points = critical_points(table, tolerances)
    if not points.any():
        return np.full(lattice.shape, np.inf)

    h = lattice.spacing
    pad = min(int(np.ceil(reach / h)) + 1, lattice.N // 2 + 1)
    padded = np.pad(~points, pad, mode="wrap")
    dist = ndimage.distance_transform_edt(padded, sampling=h)
    core = tuple(slice(pad, pad + lattice.N) for _ in range(lattice.d))
    return dist[core]


def critical_set_mask(
    table: DispersionTable,
    delta: float,
    tolerances: Optional[ConditionTolerances] = None,
) -> np.ndarray:
    """Grid points within dual-grid distance δ of the critical set"""
    if delta <= 0:
        raise ValueError(f"δ must be positive, got {delta}")
    return critical_distance(table, delta, tolerances) <= delta * (1 + 1e-12)


def _first_index(mask: np.ndarray) -> Optional[Tuple[int, ...]]:
    hits = np.argwhere(mask)
    return tuple(int(i) for i in hits[0]) if len(hits) else None


def _check_e4(table, nonsingular, tol) -> ConditionRecord:
    det = table.hessian_det
    fractions = []
    for j in range(table.lattice.n):
        small = (np.abs(det[..., j]) < tol.hessian_tol) & nonsingular
        fractions.append(small.sum() / max(int(nonsingular.sum()), 1))
    worst = int(np.argmax(fractions))
    worst_fraction = float(fractions[worst])
    witness = _first_index((np.abs(det[..., worst]) < tol.hessian_tol) & nonsingular)
    status = ConditionStatus.PASS if worst_fraction < tol.e4_max_fraction else ConditionStatus.FAIL
    return ConditionRecord(
        name="E4", status=status, witness=witness, margin=worst_fraction,
        detail=f"largest fraction of grid with |D| < {tol.hessian_tol:g} is {worst_fraction:.4f}",
    )


def _check_e5(table, critical, tol) -> ConditionRecord:
    if table.lattice.n == 1:
        return ConditionRecord(
            name="E5", status=ConditionStatus.PASS, detail="holds trivially for a single component"
        )
    omega, labels = table.omega, table.band_labels
    best: Optional[float] = None
    for j in range(table.lattice.n):
        for k in range(j + 1, table.lattice.n):
            sel = ~critical & (labels[..., j] != labels[..., k])
            if sel.sum() < 2:
                continue
            variance = min(
                float(np.var(omega[..., j][sel] + omega[..., k][sel])),
                float(np.var(omega[..., j][sel] - omega[..., k][sel])),
            )
            best = variance if best is None else min(best, variance)
    if best is None:
        return ConditionRecord(
            name="E5", status=ConditionStatus.NOT_APPLICABLE,
            detail="no pair of distinct bands on the non-critical grid",
        )
    status = ConditionStatus.PASS if best >= tol.e5_min_variance else ConditionStatus.FAIL
    return ConditionRecord(
        name="E5", status=status, margin=best,
        detail=f"smallest variance of ω_σ ± ω_σ' is {best:.3e}",
    )


def _check_e6(table, singular, tol, warnings: List[str]) -> ConditionRecord:
    lattice = table.lattice
    lam_min = table.omega[..., 0] ** 2
    norms = np.where(singular, 0.0, 1.0 / np.where(singular, 1.0, lam_min))
    values = {"max_norm": float(norms.max()), "grid_sum": float(norms.sum())}

    if not singular.any():
        return ConditionRecord(
            name="E6", status=ConditionStatus.PASS, margin=values["max_norm"],
            detail="V̂ invertible on the whole grid", values=values,
        )
    if lattice.N % 4:
        return ConditionRecord(
            name="E6", status=ConditionStatus.NOT_APPLICABLE,
            witness=_first_index(singular), values=values,
            detail="refinement test needs N divisible by 4",
        )

    means, fractions = [], []
    for stride in (1, 2, 4):
        sub = tuple(slice(None, None, stride) for _ in range(lattice.d))
        kept = ~singular[sub]
        means.append(float(norms[sub][kept].mean()))
        fractions.append(float(singular[sub].mean()))
    inc_fine = means[0] - means[1]
    inc_coarse = means[1] - means[2]
    values.update({
        "mean_N": means[0], "mean_N/2": means[1], "mean_N/4": means[2],
        "masked_N": fractions[0], "masked_N/2": fractions[1], "masked_N/4": fractions[2],
    })
    divergent = (
        inc_fine > tol.e6_growth_ratio * abs(inc_coarse)
        and inc_fine > tol.e6_negligible * abs(means[0])
    )
    if divergent:
        warnings.append(
            f"E6: grid mean of ‖V̂⁻¹‖ keeps growing under refinement "
            f"({means[2]:.4g} → {means[1]:.4g} → {means[0]:.4g})"
        )
    return ConditionRecord(
        name="E6",
        status=ConditionStatus.FAIL if divergent else ConditionStatus.PASS,
        witness=_first_index(singular),
        margin=means[0],
        detail=f"refinement increments {inc_coarse:.4g} then {inc_fine:.4g}",
        values=values,
    )


def validate_conditions(
    field: ForceField,
    table: DispersionTable,
    tolerances: Optional[ConditionTolerances] = None,
) -> ConditionReport:
    """
    Check E1-E6 on the dual grid of ``table``

    Args:
        field: Force field the table was built from
        table: Dispersion table
        tolerances: Thresholds; defaults to ConditionTolerances()

    Returns:
        ConditionReport with one record per condition
    """
    tol = tolerances or ConditionTolerances()
    if table.field is not field and table.lattice != field.lattice:
        raise ValueError("Dispersion table was not built from this force field")

    warnings: List[str] = []
    records: Dict[str, ConditionRecord] = {}

    records["E1"] = ConditionRecord(
        name="E1", status=ConditionStatus.PASS, margin=float(field.support_radius),
        detail="finite support",
    )

    # ForceField construction rejects uneven fields, so E2 always holds here
    records["E2"] = ConditionRecord(
        name="E2", status=ConditionStatus.PASS, detail="V(-z) = V(z)^T for every offset",
    )

    records["E3"] = ConditionRecord(
        name="E3",
        status=ConditionStatus.PASS if table.min_eigenvalue >= -tol.e3_floor else ConditionStatus.FAIL,
        witness=table.min_eigenvalue_index,
        margin=table.min_eigenvalue,
        detail="minimum eigenvalue of V̂ over the grid",
    )

    singular = _singular_points(table, tol.det_tol)
    critical = critical_points(table, tol)
    records["E4"] = _check_e4(table, ~singular, tol)
    records["E5"] = _check_e5(table, critical, tol)
    records["E6"] = _check_e6(table, singular, tol, warnings)

    for message in warnings:
        logger.warning(message)
    report = ConditionReport(
        records=records,
        singular_fraction=float(table.singular_mask.mean()),
        warnings=warnings,
    )
    logger.info(
        "Conditions: %s",
        ", ".join(f"{k}={v.status.value}" for k, v in records.items()),
    )
    return report
