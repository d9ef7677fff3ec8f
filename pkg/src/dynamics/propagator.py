"""Exact spectral time evolution and the Hamiltonian"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .phase_field import PhaseField
from ..errors import LatticeMismatchError
from ..lattice.dispersion import DispersionTable
from ..lattice.force_field import ForceField
from ..lattice.grid import LatticeSpec, from_fourier, to_fourier

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PropagatorTable:
    """Ĝ_t(θ) on the dual grid, shape grid + (2n, 2n)"""
    t: float
    lattice: LatticeSpec
    matrix: np.ndarray

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.lattice.n
        return self.matrix[..., i * n:(i + 1) * n, j * n:(j + 1) * n]


def build_propagator(table: DispersionTable, t: float) -> PropagatorTable:
    """
    Assemble Ĝ_t = [[cos Ωt, sin Ωt·Ω⁻¹], [-sin Ωt·Ω, cos Ωt]] bandwise

    Args:
        table: Dispersion table
        t: Time, any finite real

    Returns:
        PropagatorTable at time t
    """
    if not np.isfinite(t):
        raise ValueError(f"Time must be finite, got {t}")
    t = float(t)
    omega = table.omega
    n = table.lattice.n

    cos_block = table.spectral_function(np.cos(omega * t))
    # sin(ωt)/ω with the ω → 0 limit t
    sin_over = table.spectral_function(t * np.sinc(omega * t / np.pi))
    sin_times = table.spectral_function(np.sin(omega * t) * omega)

    matrix = np.empty(table.lattice.shape + (2 * n, 2 * n), dtype=complex)
    matrix[..., :n, :n] = cos_block
    matrix[..., :n, n:] = sin_over
    matrix[..., n:, :n] = -sin_times
    matrix[..., n:, n:] = cos_block
    return PropagatorTable(t=t, lattice=table.lattice, matrix=matrix)


def evolve(Y0: PhaseField, prop: PropagatorTable, residue_tol: float = 1e-9) -> PhaseField:
    """Ŷ(t) = Ĝ_t Ŷ₀ per grid point, transformed back to a real field"""
    if Y0.lattice != prop.lattice:
        raise LatticeMismatchError(
            f"Field lattice {Y0.lattice} does not match propagator lattice {prop.lattice}"
        )
    d = Y0.lattice.d
    y_hat = to_fourier(Y0.stacked(), d)
    evolved = from_fourier(np.einsum("...ij,...j->...i", prop.matrix, y_hat), d)

    scale = max(float(np.abs(evolved.real).max()), np.finfo(float).tiny)
    residue = float(np.abs(evolved.imag).max()) / scale
    if residue > residue_tol:
        logger.warning("Imaginary residue %.2e after evolution to t=%g", residue, prop.t)
    return PhaseField.from_stacked(Y0.lattice, evolved.real)


def evolve_many(
    fields: Sequence[PhaseField], prop: PropagatorTable, max_workers: int = 1
) -> List[PhaseField]:
    """Evolve independent fields, results in input order"""
    if max_workers <= 1 or len(fields) < 2:
        return [evolve(Y, prop) for Y in fields]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda Y: evolve(Y, prop), fields))


def energy(Y: PhaseField, field: ForceField) -> float:
    """H = ½⟨v, v⟩ + ½⟨V*u, u⟩ with the convolution taken over the torus"""
    if Y.lattice != field.lattice:
        raise LatticeMismatchError("Field and force field live on different lattices")
    kinetic = 0.5 * float(np.sum(Y.v * Y.v))
    potential = 0.5 * float(np.sum(Y.u * field.apply(Y.u)))
    return kinetic + potential
