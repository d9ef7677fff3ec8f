"""Long-time limit of homogeneous covariances and related closed forms"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..dynamics.phase_field import PhaseField
from ..dynamics.propagator import build_propagator
from ..errors import LatticeMismatchError, SingularModeError
from ..lattice.dispersion import DispersionTable
from ..lattice.grid import LatticeSpec, to_fourier
from ..sampling.spectra import HomogeneousSpectrum

logger = logging.getLogger(__name__)


def adjoint(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


def wigner_from_density(R: np.ndarray, table: DispersionTable) -> np.ndarray:
    """
    ½(Ω^{½}R⁰⁰Ω^{½} + Ω^{-½}R¹¹Ω^{-½} + iΩ^{½}R⁰¹Ω^{-½} - iΩ^{-½}R¹⁰Ω^{½})

    Singular grid points are set to zero.
    """
    n = table.lattice.n
    half = table.omega_power(0.5)
    inv_half = table.omega_power(-0.5)
    r00, r01 = R[..., :n, :n], R[..., :n, n:]
    r10, r11 = R[..., n:, :n], R[..., n:, n:]
    W = 0.5 * (
        half @ r00 @ half
        + inv_half @ r11 @ inv_half
        + 1j * (half @ r01 @ inv_half)
        - 1j * (inv_half @ r10 @ half)
    )
    return np.where(table.singular_mask[..., None, None], 0.0, W)


def homogeneous_wigner(spectrum: Union[HomogeneousSpectrum, np.ndarray], table: DispersionTable) -> np.ndarray:
    """Wigner matrix of a homogeneous density; TΩ⁻¹ for Gibbs input at temperature T"""
    matrix = spectrum.matrix if isinstance(spectrum, HomogeneousSpectrum) else np.asarray(spectrum)
    return wigner_from_density(matrix, table)


def limit_matrix(matrix: np.ndarray, table: DispersionTable) -> np.ndarray:
    """Σ_σ Π_σ M₀ Π_σ with M₀ = ½(q̂ + C q̂ C*), singular points zeroed"""
    C = table.c_matrix()
    M0 = 0.5 * (matrix + C @ matrix @ adjoint(C))
    result = table.project(M0)
    return np.where(table.singular_mask[..., None, None], 0.0, result)


@dataclass(frozen=True, eq=False)
class LimitCovariance:
    """q̂_∞(θ) on the dual grid, shape grid + (2n, 2n)"""
    lattice: LatticeSpec
    matrix: np.ndarray
    masked_fraction: float
    source: str = "custom"

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.lattice.n
        return self.matrix[..., i * n:(i + 1) * n, j * n:(j + 1) * n]

    def to_spectrum(self) -> HomogeneousSpectrum:
        return HomogeneousSpectrum(self.lattice, self.matrix, name=f"limit-{self.source}")


def limit_covariance(
    spectrum: HomogeneousSpectrum, table: DispersionTable, mask_singular: bool = True
) -> LimitCovariance:
    """
    Limit covariance of the flow started from a homogeneous measure

    Args:
        spectrum: Initial density q̂₀
        table: Dispersion table on the same lattice
        mask_singular: Exclude points where Ω is singular instead of raising

    Returns:
        LimitCovariance with the fraction of masked grid points
    """
    if spectrum.lattice != table.lattice:
        raise LatticeMismatchError("Spectrum and dispersion table live on different lattices")
    singular = table.singular_mask
    if singular.any() and not mask_singular:
        points = [tuple(int(c) for c in p) for p in np.argwhere(singular)]
        raise SingularModeError("C(θ) needs Ω⁻¹", points)
    fraction = float(singular.mean())
    if fraction:
        logger.warning("Limit covariance: %.3g%% of grid masked as singular", 100 * fraction)
    return LimitCovariance(
        lattice=table.lattice,
        matrix=limit_matrix(spectrum.matrix, table),
        masked_fraction=fraction,
        source=spectrum.name,
    )


def stationarity_check(
    covariance: Union[LimitCovariance, HomogeneousSpectrum, np.ndarray], table: DispersionTable, t: float
) -> float:
    """max_θ ‖Ĝ_t q̂ Ĝ_t* - q̂‖_F"""
    matrix = getattr(covariance, "matrix", covariance)
    G = build_propagator(table, t).matrix
    deviation = G @ matrix @ adjoint(G) - matrix
    return float(np.linalg.norm(deviation, axis=(-2, -1)).max())


def quadratic_form(matrix: np.ndarray, lattice: LatticeSpec, probe: PhaseField) -> float:
    """Q(Ψ, Ψ) = N^{-d} Σ_θ Ψ̂(θ)* q̂(θ) Ψ̂(θ), the variance of ⟨Y, Ψ⟩"""
    if probe.lattice != lattice:
        raise LatticeMismatchError("Probe and density live on different lattices")
    psi_hat = to_fourier(probe.stacked(), lattice.d)
    value = np.einsum("...i,...ij,...j->...", np.conj(psi_hat), matrix, psi_hat).sum()
    return float(value.real) / lattice.size
