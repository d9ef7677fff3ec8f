"""Kinetic-limit predictions: limit covariances, Wigner transport and local stationarity"""

from .limit import (
    LimitCovariance,
    limit_covariance,
    limit_matrix,
    stationarity_check,
    quadratic_form,
    homogeneous_wigner,
    wigner_from_density,
)
from .transport import (
    MacroGrid,
    TransportState,
    initial_wigner,
    initial_wigner_on_grid,
    project_wigner,
    transport_evolve,
    transport_pde_oracle,
    projected_wigner,
    l1_distance,
)
from .local import LocalCovariance, local_covariance
from ..sampling.spectra import position_covariance

__all__ = [
    "LimitCovariance",
    "limit_covariance",
    "limit_matrix",
    "stationarity_check",
    "quadratic_form",
    "homogeneous_wigner",
    "wigner_from_density",
    "MacroGrid",
    "TransportState",
    "initial_wigner",
    "initial_wigner_on_grid",
    "project_wigner",
    "transport_evolve",
    "transport_pde_oracle",
    "projected_wigner",
    "l1_distance",
    "LocalCovariance",
    "local_covariance",
    "position_covariance",
]
