"""Monte Carlo estimators over sample lists"""

from .covariance import (
    CovarianceEstimate,
    UniformBoundResult,
    estimate_covariance,
    uniform_bound_check,
)
from .wigner import (
    Taper,
    WignerEstimate,
    a_field,
    aa_covariance,
    phase_field_from_a,
    wigner_estimate,
    smooth_wigner,
)
from .gaussianity import (
    KurtosisResult,
    CharacteristicResult,
    point_probe,
    local_probe,
    probe_values,
    fourth_cumulant_test,
    characteristic_functional,
)

__all__ = [
    "CovarianceEstimate",
    "UniformBoundResult",
    "estimate_covariance",
    "aa_covariance",
    "uniform_bound_check",
    "Taper",
    "WignerEstimate",
    "a_field",
    "phase_field_from_a",
    "wigner_estimate",
    "smooth_wigner",
    "KurtosisResult",
    "CharacteristicResult",
    "point_probe",
    "local_probe",
    "probe_values",
    "fourth_cumulant_test",
    "characteristic_functional",
]
