"""Exact time evolution, Green functions and the energy functional"""

from .phase_field import PhaseField
from .propagator import PropagatorTable, build_propagator, evolve, evolve_many, energy
from .green import (
    GreenFunction,
    DecayDiagnostic,
    green_function,
    decay_diagnostic,
    partition_of_unity,
    smooth_step,
)

__all__ = [
    "PhaseField",
    "PropagatorTable",
    "build_propagator",
    "evolve",
    "evolve_many",
    "energy",
    "GreenFunction",
    "DecayDiagnostic",
    "green_function",
    "decay_diagnostic",
    "partition_of_unity",
    "smooth_step",
]
