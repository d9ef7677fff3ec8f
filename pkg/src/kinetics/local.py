"""Local-stationarity covariance q̂_{τ,r} of the kinetic limit"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .limit import adjoint, quadratic_form
from .transport import projected_wigner
from ..dynamics.phase_field import PhaseField
from ..errors import CrossCheckError
from ..lattice.dispersion import DispersionTable
from ..lattice.grid import LatticeSpec, reflect
from ..sampling.spectra import SlowProfile, position_covariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LocalCovariance:
    """q̂_{τ,r}(θ), shape grid + (2n, 2n), with the discrepancy between its two constructions"""
    tau: float
    r: tuple
    lattice: LatticeSpec
    matrix: np.ndarray
    cross_check: np.ndarray
    max_discrepancy: float
    masked_fraction: float

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.lattice.n
        return self.matrix[..., i * n:(i + 1) * n, j * n:(j + 1) * n]

    def position_covariance(self, offsets: Sequence[Sequence[int]]) -> np.ndarray:
        return position_covariance(self.matrix, self.lattice, offsets)

    def quadratic_form(self, probe: PhaseField) -> float:
        return quadratic_form(self.matrix, self.lattice, probe)


def covariance_from_wigner(Wp: np.ndarray, table: DispersionTable) -> np.ndarray:
    """
    Blocks q̂⁰⁰ = Ω⁻¹X, q̂¹¹ = ΩX, q̂⁰¹ = -q̂¹⁰ = Y

    X and Y are the parts of W^p even and odd under θ ↦ -θ with complex conjugation.
    """
    d, n = table.lattice.d, table.lattice.n
    mirrored = np.conj(reflect(Wp, d))
    X = 0.5 * (Wp + mirrored)
    Y = -0.5j * (Wp - mirrored)
    out = np.empty(Wp.shape[:-2] + (2 * n, 2 * n), dtype=complex)
    out[..., :n, :n] = table.omega_power(-1) @ X
    out[..., n:, n:] = table.omega_power(1) @ X
    out[..., :n, n:] = Y
    out[..., n:, :n] = -Y
    return out


def covariance_from_characteristics(
    profile: SlowProfile, table: DispersionTable, tau: float, r: np.ndarray
) -> np.ndarray:
    """Σ_σ Π_σ(M₊ + M₋)Π_σ with R_± built from R̂(r ± τ∇ω_σ(θ), θ)"""
    n = table.lattice.n
    C = table.c_matrix()
    C_star = adjoint(C)
    eigen = np.zeros(table.lattice.shape + (2 * n, 2 * n), dtype=complex)
    for j in range(n):
        step = tau * table.velocities[..., j, :]
        ahead = profile(r + step, table)
        behind = profile(r - step, table)
        R_plus = 0.5 * (ahead + behind)
        R_minus = 0.5 * (ahead - behind)
        M = 0.5 * (R_plus + C @ R_plus @ C_star) + 0.5j * (C @ R_minus - R_minus @ C_star)
        for a in range(2):
            for b in range(2):
                block = M[..., a * n:(a + 1) * n, b * n:(b + 1) * n]
                eigen[..., a * n + j, b * n:(b + 1) * n] = table.to_eigenbasis(block)[..., j, :]

    out = np.empty_like(eigen)
    for a in range(2):
        for b in range(2):
            rows, cols = slice(a * n, (a + 1) * n), slice(b * n, (b + 1) * n)
            out[..., rows, cols] = table.from_eigenbasis(table.same_band * eigen[..., rows, cols])
    return out


def local_covariance(
    profile: SlowProfile,
    table: DispersionTable,
    tau: float,
    r: Sequence[float],
    atol: float = 1e-8,
) -> LocalCovariance:
    """
    Covariance of the local equilibrium reached at macroscopic time τ near position r

    The Wigner-matrix construction is returned; the construction from the characteristic
    blocks M_± must agree with it blockwise.

    Args:
        profile: Slow profile of the initial family
        table: Dispersion table
        tau: Macroscopic time
        r: Macroscopic position
        atol: Agreement tolerance relative to max(1, scale)

    Returns:
        LocalCovariance with singular grid points zeroed

    Raises:
        CrossCheckError: The two constructions disagree
    """
    r = np.asarray(r, dtype=float)
    singular = table.singular_mask[..., None, None]
    reference = np.where(singular, 0.0, covariance_from_wigner(projected_wigner(profile, table, tau, r), table))
    check = np.where(singular, 0.0, covariance_from_characteristics(profile, table, tau, r))

    discrepancy = float(np.abs(reference - check).max())
    scale = max(1.0, float(np.abs(reference).max()))
    if discrepancy > atol * scale:
        raise CrossCheckError(
            f"Local covariance constructions disagree by {discrepancy:.3e} at τ={tau}, r={r.tolist()}"
        )
    logger.debug("Local covariance at τ=%g, r=%s: discrepancy %.2e", tau, r.tolist(), discrepancy)
    return LocalCovariance(
        tau=float(tau),
        r=tuple(float(c) for c in r),
        lattice=table.lattice,
        matrix=reference,
        cross_check=check,
        max_discrepancy=discrepancy,
        masked_fraction=float(table.singular_mask.mean()),
    )
