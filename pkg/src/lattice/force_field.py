"""Finitely supported force fields V(z) and their Fourier symbols"""

import json
import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .grid import LatticeSpec, dual_grid
from ..errors import ModelInvalidError

logger = logging.getLogger(__name__)

Offset = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ForceField:
    """Real n×n coupling matrices V(z) on a finite set of offsets z"""
    lattice: LatticeSpec
    entries: Dict[Offset, np.ndarray]

    def __post_init__(self):
        cleaned = {}
        for offset, matrix in self.entries.items():
            offset = tuple(int(c) for c in offset)
            matrix = np.asarray(matrix, dtype=float)
            if len(offset) != self.lattice.d:
                raise ValueError(f"Offset {offset} does not have {self.lattice.d} components")
            if matrix.shape != (self.lattice.n, self.lattice.n):
                raise ValueError(
                    f"Matrix at offset {offset} has shape {matrix.shape}, "
                    f"expected {(self.lattice.n, self.lattice.n)}"
                )
            if not np.all(np.isfinite(matrix)):
                raise ValueError(f"Matrix at offset {offset} has non-finite entries")
            if max((abs(c) for c in offset), default=0) >= self.lattice.N // 2:
                raise ValueError(f"Offset {offset} aliases on a torus of side {self.lattice.N}")
            cleaned[offset] = matrix
        object.__setattr__(self, "entries", cleaned)

        # E2: V(-z) = V(z)^T, exact
        for offset, matrix in cleaned.items():
            mirror = tuple(-c for c in offset)
            if mirror not in cleaned or not np.array_equal(cleaned[mirror], matrix.T):
                raise ModelInvalidError(f"Force field is not even at offset {offset}")

    @property
    def support_radius(self) -> int:
        return max((max(abs(c) for c in z) for z in self.entries), default=0)

    def symbol_on_grid(self) -> np.ndarray:
        """V̂(θ_k) for every dual grid point, shape grid + (n, n)"""
        theta = dual_grid(self.lattice)
        n = self.lattice.n
        vhat = np.zeros(self.lattice.shape + (n, n), dtype=complex)
        for offset, matrix in self.entries.items():
            phase = np.exp(1j * (theta @ np.asarray(offset, dtype=float)))
            vhat += phase[..., None, None] * matrix
        return 0.5 * (vhat + np.conj(np.swapaxes(vhat, -1, -2)))

    def apply(self, u: np.ndarray) -> np.ndarray:
        """(V*u)(x) = Σ_z V(z) u(x - z) by direct stencil over the torus"""
        axes = self.lattice.axes
        out = np.zeros_like(u, dtype=float)
        for offset, matrix in self.entries.items():
            out += np.roll(u, shift=offset, axis=axes) @ matrix.T
        return out

    def with_grid(self, N: int) -> "ForceField":
        """Same couplings on a torus of a different side"""
        return ForceField(lattice=self.lattice.with_grid(N), entries=dict(self.entries))

    def to_dict(self) -> dict:
        return {
            "d": self.lattice.d,
            "n": self.lattice.n,
            "N": self.lattice.N,
            "entries": [
                {"offset": list(offset), "matrix": matrix.tolist()}
                for offset, matrix in sorted(self.entries.items())
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, payload: dict) -> "ForceField":
        try:
            lattice = LatticeSpec(d=int(payload["d"]), n=int(payload["n"]), N=int(payload["N"]))
            entries = {
                tuple(item["offset"]): np.asarray(item["matrix"], dtype=float)
                for item in payload["entries"]
            }
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed force field document: {e}")
        return cls(lattice=lattice, entries=entries)


def build_nn_force_field(
    lattice: LatticeSpec,
    gammas: Sequence[float],
    masses: Sequence[float],
) -> ForceField:
    """
    Nearest-neighbour coupling with per-component stiffness and mass

    Args:
        lattice: Torus the field lives on
        gammas: Positive coupling γ_k per component
        masses: Nonnegative mass m_k per component

    Returns:
        ForceField with V(0) = diag(2dγ + m²) and V(±e_i) = diag(-γ)
    """
    gammas = np.asarray(gammas, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if gammas.shape != (lattice.n,) or masses.shape != (lattice.n,):
        raise ValueError(
            f"Expected {lattice.n} gammas and masses, got {gammas.size} and {masses.size}"
        )
    if np.any(gammas <= 0):
        raise ValueError(f"Couplings must be positive, got {gammas.tolist()}")
    if np.any(masses < 0):
        raise ValueError(f"Masses must be nonnegative, got {masses.tolist()}")

    d = lattice.d
    entries: Dict[Offset, np.ndarray] = {(0,) * d: np.diag(2 * d * gammas + masses ** 2)}
    for axis in range(d):
        for sign in (1, -1):
            offset = tuple(sign if a == axis else 0 for a in range(d))
            entries[offset] = np.diag(-gammas)
    logger.debug("Nearest-neighbour field: d=%d, gammas=%s, masses=%s", d, gammas, masses)
    return ForceField(lattice=lattice, entries=entries)


def fourier_symbol(field: ForceField, theta: Sequence[float]) -> np.ndarray:
    """V̂(θ) = Σ_z V(z) e^{iz·θ} at a single point of the torus"""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (field.lattice.d,):
        raise ValueError(f"θ must have {field.lattice.d} components, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)) or np.any(theta < 0) or np.any(theta >= 2 * np.pi):
        raise ValueError(f"θ components must lie in [0, 2π), got {theta.tolist()}")

    n = field.lattice.n
    vhat = np.zeros((n, n), dtype=complex)
    for offset, matrix in field.entries.items():
        vhat += np.exp(1j * np.dot(offset, theta)) * matrix
    return 0.5 * (vhat + vhat.conj().T)


def nn_dispersion(theta: np.ndarray, gamma: float, mass: float) -> np.ndarray:
    """Closed form ω(θ) = sqrt(2γ Σ(1 - cos θ_i) + m²) of the scalar nearest-neighbour model"""
    theta = np.asarray(theta, dtype=float)
    return np.sqrt(2 * gamma * np.sum(1 - np.cos(theta), axis=-1) + mass ** 2)


def nn_group_velocity(theta: np.ndarray, gamma: float, mass: float) -> np.ndarray:
    """Closed form ∇ω = γ sin θ / ω for the scalar nearest-neighbour model"""
    theta = np.asarray(theta, dtype=float)
    omega = nn_dispersion(theta, gamma, mass)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = gamma * np.sin(theta) / omega[..., None]
    return np.nan_to_num(v)

