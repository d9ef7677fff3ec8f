"""Force fields, dispersion tables and condition checks"""

from .grid import LatticeSpec, dual_grid, to_fourier, from_fourier, reflect, offset_box
from .force_field import ForceField, build_nn_force_field, fourier_symbol
from .dispersion import DispersionTable, build_dispersion_table
from .conditions import (
    ConditionStatus,
    ConditionTolerances,
    ConditionReport,
    validate_conditions,
    critical_points,
    critical_distance,
    critical_set_mask,
)

__all__ = [
    "LatticeSpec",
    "dual_grid",
    "to_fourier",
    "from_fourier",
    "reflect",
    "offset_box",
    "ForceField",
    "build_nn_force_field",
    "fourier_symbol",
    "DispersionTable",
    "build_dispersion_table",
    "ConditionStatus",
    "ConditionTolerances",
    "ConditionReport",
    "validate_conditions",
    "critical_points",
    "critical_distance",
    "critical_set_mask",
]
