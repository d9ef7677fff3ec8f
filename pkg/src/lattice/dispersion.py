"""Dispersion relation, band decomposition and band calculus on the dual grid"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .force_field import ForceField
from .grid import LatticeSpec
from ..errors import ModelInvalidError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DispersionTable:
    """
    Per dual grid point: V̂, sorted band frequencies, eigenvectors and band grouping.

    Eigen-indices j = 0..n-1 are sorted by frequency at each grid point. Indices whose
    frequencies differ by less than ``degeneracy_tol`` share a band label; ``omega``
    holds the band-averaged frequency so all indices of a band carry the same value.
    Derivatives are central differences of ``omega`` along each grid axis.
    """
    field: ForceField
    vhat: np.ndarray
    omega: np.ndarray
    eigenvectors: np.ndarray
    band_labels: np.ndarray
    band_count: np.ndarray
    velocities: np.ndarray
    hessians: np.ndarray
    min_eigenvalue: float
    min_eigenvalue_index: Tuple[int, ...]
    degeneracy_tol: float
    singular_tol: float

    @property
    def lattice(self) -> LatticeSpec:
        return self.field.lattice

    @property
    def hessian_det(self) -> np.ndarray:
        """D_σ(θ) per eigen-index, shape grid + (n,)"""
        return np.linalg.det(self.hessians)

    @property
    def same_band(self) -> np.ndarray:
        """B_jk = [label_j == label_k], shape grid + (n, n)"""
        return self.band_labels[..., :, None] == self.band_labels[..., None, :]

    @property
    def singular_mask(self) -> np.ndarray:
        """Grid points where some ω_σ < singular_tol"""
        return np.any(self.omega < self.singular_tol, axis=-1)

    @property
    def max_band_speed(self) -> float:
        return float(np.max(np.linalg.norm(self.velocities, axis=-1)))

    def spectral_function(self, values: np.ndarray) -> np.ndarray:
        """Σ_j values_j e_j e_j^*, values of shape grid + (n,)"""
        E = self.eigenvectors
        return np.einsum("...ij,...j,...kj->...ik", E, values, E.conj())

    def apply_function(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """f(Ω) = Σ_σ f(ω_σ) Π_σ"""
        return self.spectral_function(func(self.omega))

    def omega_power(self, power: float) -> np.ndarray:
        """Ω^p bandwise; for p < 0 singular bands contribute zero"""
        omega = self.omega
        if power >= 0:
            return self.spectral_function(omega ** power)
        safe = np.where(omega < self.singular_tol, 1.0, omega)
        values = np.where(omega < self.singular_tol, 0.0, safe ** power)
        return self.spectral_function(values)

    def to_eigenbasis(self, matrix: np.ndarray) -> np.ndarray:
        E = self.eigenvectors
        return np.conj(np.swapaxes(E, -1, -2)) @ matrix @ E

    def from_eigenbasis(self, matrix: np.ndarray) -> np.ndarray:
        E = self.eigenvectors
        return E @ matrix @ np.conj(np.swapaxes(E, -1, -2))

    def project(self, matrix: np.ndarray) -> np.ndarray:
        """
        Σ_σ Π_σ X Π_σ, applied blockwise when X is 2n×2n

        Args:
            matrix: grid + (n, n) or grid + (2n, 2n) array

        Returns:
            Band-diagonal part of the input, same shape
        """
        n = self.lattice.n
        if matrix.shape[-1] == n:
            return self.from_eigenbasis(self.same_band * self.to_eigenbasis(matrix))
        if matrix.shape[-1] != 2 * n:
            raise ValueError(f"Cannot project a matrix of size {matrix.shape[-1]} with n={n}")
        out = np.empty_like(matrix, dtype=complex)
        for i in range(2):
            for j in range(2):
                block = matrix[..., i * n:(i + 1) * n, j * n:(j + 1) * n]
                out[..., i * n:(i + 1) * n, j * n:(j + 1) * n] = self.project(block)
        return out

    def c_matrix(self) -> np.ndarray:
        """C(θ) = [[0, Ω⁻¹], [-Ω, 0]], singular bands zeroed"""
        n = self.lattice.n
        c = np.zeros(self.lattice.shape + (2 * n, 2 * n), dtype=complex)
        c[..., :n, n:] = self.omega_power(-1)
        c[..., n:, :n] = -self.omega_power(1)
        return c

    def projections(self, index: Tuple[int, ...]) -> List[np.ndarray]:
        """Band projections Π_σ at one grid point, in band order"""
        E = self.eigenvectors[index]
        labels = self.band_labels[index]
        result = []
        for label in range(int(labels.max()) + 1):
            cols = E[:, labels == label]
            result.append(cols @ cols.conj().T)
        return result


def _band_labels(omega: np.ndarray, tol: float) -> np.ndarray:
    gaps = np.diff(omega, axis=-1) >= tol
    first = np.zeros(omega.shape[:-1] + (1,), dtype=int)
    return np.concatenate([first, np.cumsum(gaps, axis=-1)], axis=-1)


def _central_derivatives(omega: np.ndarray, d: int, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of per-index frequencies by periodic central differences"""
    grad = np.empty(omega.shape + (d,))
    hess = np.empty(omega.shape + (d, d))
    for a in range(d):
        forward = np.roll(omega, -1, axis=a)
        backward = np.roll(omega, 1, axis=a)
        grad[..., a] = (forward - backward) / (2 * h)
        hess[..., a, a] = (forward - 2 * omega + backward) / h ** 2
        for b in range(a + 1, d):
            pp = np.roll(np.roll(omega, -1, axis=a), -1, axis=b)
            pm = np.roll(np.roll(omega, -1, axis=a), 1, axis=b)
            mp = np.roll(np.roll(omega, 1, axis=a), -1, axis=b)
            mm = np.roll(np.roll(omega, 1, axis=a), 1, axis=b)
            mixed = (pp - pm - mp + mm) / (4 * h ** 2)
            hess[..., a, b] = mixed
            hess[..., b, a] = mixed
    return grad, hess


def build_dispersion_table(
    field: ForceField,
    degeneracy_tol: Optional[float] = None,
    singular_tol: float = 1e-8,
    e3_floor: float = 1e-10,
    degeneracy_rel_tol: float = 1e-8,
) -> DispersionTable:
    """
    Eigendecompose V̂ on the whole dual grid

    Args:
        field: Force field to diagonalize
        degeneracy_tol: Absolute band-merging gap; defaults to degeneracy_rel_tol · max ω
        singular_tol: Frequencies below this are treated as singular modes
        e3_floor: Negative eigenvalues of V̂ down to -e3_floor are clamped to zero

    Returns:
        DispersionTable for the field's lattice
    """
    lattice = field.lattice
    vhat = field.symbol_on_grid()
    eigenvalues, eigenvectors = np.linalg.eigh(vhat)

    flat_min = int(np.argmin(eigenvalues[..., 0]))
    min_index = tuple(int(i) for i in np.unravel_index(flat_min, lattice.shape))
    min_eigenvalue = float(eigenvalues[min_index][0])
    if min_eigenvalue < -e3_floor:
        raise ModelInvalidError(
            f"V̂ has eigenvalue {min_eigenvalue:.3e} below -{e3_floor:g} (E3 violated)",
            witness=min_index,
        )

    raw_omega = np.sqrt(np.clip(eigenvalues, 0.0, None))
    if degeneracy_tol is None:
        degeneracy_tol = degeneracy_rel_tol * max(float(raw_omega.max()), np.finfo(float).tiny)

    labels = _band_labels(raw_omega, degeneracy_tol)
    same = labels[..., :, None] == labels[..., None, :]
    omega = np.sum(same * raw_omega[..., None, :], axis=-1) / np.sum(same, axis=-1)

    velocities, hessians = _central_derivatives(omega, lattice.d, lattice.spacing)

    table = DispersionTable(
        field=field,
        vhat=vhat,
        omega=omega,
        eigenvectors=eigenvectors,
        band_labels=labels,
        band_count=labels[..., -1] + 1,
        velocities=velocities,
        hessians=hessians,
        min_eigenvalue=min_eigenvalue,
        min_eigenvalue_index=min_index,
        degeneracy_tol=float(degeneracy_tol),
        singular_tol=float(singular_tol),
    )
    logger.info(
        "Dispersion table: %d points, n=%d, max band speed %.4f, singular points %d",
        lattice.size, lattice.n, table.max_band_speed, int(table.singular_mask.sum()),
    )
    return table
