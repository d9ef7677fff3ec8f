"""Initial measures: spectral densities, slow profiles and samplers"""

from .spectra import (
    HomogeneousSpectrum,
    SlowProfile,
    SeparableProfile,
    FunctionProfile,
    TabulatedProfile,
    gibbs_matrix,
    nonequilibrium_matrix,
    wave_packet_matrix,
    gibbs_spectrum,
    nonequilibrium_spectrum,
    white_spectrum,
    build_spectrum,
    thermal_gradient_profile,
    step_profile,
    wave_packet_profile,
    constant_profile,
    build_profile,
    position_covariance,
)
from .samplers import (
    NoiseKind,
    HomogeneousSampler,
    SlowFamilyConfig,
    SlowFamilySampler,
    derive_seed,
    sample_homogeneous,
    sample_slow_family,
    sample_many,
)
from .profile_validation import ProfileReport, validate_profile, fit_decay_exponent

__all__ = [
    "HomogeneousSpectrum",
    "SlowProfile",
    "SeparableProfile",
    "FunctionProfile",
    "TabulatedProfile",
    "gibbs_matrix",
    "nonequilibrium_matrix",
    "wave_packet_matrix",
    "gibbs_spectrum",
    "nonequilibrium_spectrum",
    "white_spectrum",
    "build_spectrum",
    "thermal_gradient_profile",
    "step_profile",
    "wave_packet_profile",
    "constant_profile",
    "build_profile",
    "position_covariance",
    "NoiseKind",
    "HomogeneousSampler",
    "SlowFamilyConfig",
    "SlowFamilySampler",
    "derive_seed",
    "sample_homogeneous",
    "sample_slow_family",
    "sample_many",
    "ProfileReport",
    "validate_profile",
    "fit_decay_exponent",
]
