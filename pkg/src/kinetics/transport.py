"""Wigner matrices of slow profiles and their transport along band characteristics"""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .limit import wigner_from_density
from ..errors import CFLError
from ..lattice.dispersion import DispersionTable
from ..sampling.spectra import SlowProfile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MacroGrid:
    """Periodic grid r_k = origin + k·h over a box of the given side lengths"""
    lengths: tuple
    points: tuple
    origin: Optional[tuple] = None

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        points = tuple(int(m) for m in self.points)
        if len(lengths) != len(points) or any(x <= 0 for x in lengths) or any(m < 2 for m in points):
            raise ValueError(f"Invalid macroscopic grid {lengths} with {points} points")
        origin = tuple(float(x) for x in self.origin) if self.origin is not None else (0.0,) * len(lengths)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def cube(cls, d: int, length: float, points: int, origin: float = 0.0) -> "MacroGrid":
        return cls((length,) * d, (points,) * d, (origin,) * d)

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def spacing(self) -> np.ndarray:
        return np.asarray(self.lengths) / np.asarray(self.points)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def coordinates(self) -> np.ndarray:
        """Grid positions, shape points + (d,)"""
        k = np.moveaxis(np.indices(self.points, dtype=float), 0, -1)
        return np.asarray(self.origin) + k * self.spacing


@dataclass(frozen=True, eq=False)
class TransportState:
    """
    W^p(τ; r, θ) in the band eigenbasis, shape macro grid + θ grid + (n, n)

    Entry (j, k) is nonzero only when eigenvalues j and k share a band.
    """
    grid: MacroGrid
    table: DispersionTable
    tau: float
    eigen: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """W^p in the original component basis"""
        return self.table.from_eigenbasis(self.eigen)

    def at(self, k: Sequence[int]) -> np.ndarray:
        """W^p(τ; r_k, ·) over the θ grid"""
        return self.table.from_eigenbasis(self.eigen[tuple(int(c) for c in k)])

    def total_trace(self) -> float:
        """∫ tr W^p dr dθ with the θ measure normalized to one"""
        trace = np.trace(self.eigen, axis1=-2, axis2=-1).real
        return float(trace.sum() * self.grid.cell_volume / self.table.lattice.size)


def initial_wigner(profile: SlowProfile, table: DispersionTable, r: Sequence[float]) -> np.ndarray:
    """W(0; r, θ) over the θ grid, shape grid + (n, n)"""
    r = np.asarray(r, dtype=float)
    if r.shape != (table.lattice.d,):
        raise ValueError(f"Position must have length {table.lattice.d}, got shape {r.shape}")
    return wigner_from_density(profile(r, table), table)


def initial_wigner_on_grid(profile: SlowProfile, table: DispersionTable, grid: MacroGrid) -> np.ndarray:
    """W(0; r, θ) for every macroscopic grid point, shape macro + θ grid + (n, n)"""
    if grid.d != table.lattice.d:
        raise ValueError("Macroscopic grid dimension does not match the lattice")
    coords = grid.coordinates()
    n = table.lattice.n
    out = np.empty(grid.shape + table.lattice.shape + (n, n), dtype=complex)
    for k in np.ndindex(*grid.shape):
        out[k] = initial_wigner(profile, table, coords[k])
    return out


def project_wigner(W0: np.ndarray, table: DispersionTable, grid: MacroGrid) -> TransportState:
    """Σ_σ Π_σ W(0) Π_σ, stored in the eigenbasis at τ = 0"""
    eigen = table.same_band * table.to_eigenbasis(W0)
    return TransportState(grid=grid, table=table, tau=0.0, eigen=eigen)


def _row_velocities(table: DispersionTable) -> np.ndarray:
    """Velocity of eigen-index j broadcast over entry (j, k), shape θ grid + (n, n, d)"""
    v = table.velocities
    n = table.lattice.n
    return np.broadcast_to(v[..., :, None, :], table.lattice.shape + (n, n, v.shape[-1]))


def _shift_axis(values: np.ndarray, axis: int, cells: np.ndarray) -> np.ndarray:
    """f(k - s) along one periodic axis with linear interpolation, s varying per θ-entry"""
    M = values.shape[axis]
    whole = np.floor(cells)
    frac = cells - whole
    index_shape = [1] * values.ndim
    index_shape[axis] = M
    k = np.arange(M).reshape(index_shape)
    lower = (k - whole.astype(int)) % M
    upper = (lower - 1) % M
    lower = np.broadcast_to(lower, values.shape)
    upper = np.broadcast_to(upper, values.shape)
    return (1.0 - frac) * np.take_along_axis(values, lower, axis) + frac * np.take_along_axis(values, upper, axis)


def transport_evolve(state: TransportState, tau: float) -> TransportState:
    """
    Advance W^p by τ along characteristics r ↦ r + τ∇ω_σ(θ)

    Each entry is sampled at the back-traced point with periodic linear interpolation per
    axis, so the total trace is conserved exactly.
    """
    if tau == 0:
        return replace(state)
    grid = state.grid
    d = grid.d
    velocity = _row_velocities(state.table)
    eigen = state.eigen
    lead = (None,) * d
    for axis in range(d):
        cells = tau * velocity[..., axis] / grid.spacing[axis]
        eigen = _shift_axis(eigen, axis, cells[lead])
    return TransportState(grid=grid, table=state.table, tau=state.tau + float(tau), eigen=eigen)


def transport_pde_oracle(state: TransportState, tau: float, cfl: float = 0.5) -> TransportState:
    """
    First-order upwind solution of ∂_τ f + ∇ω_σ·∇_r f = 0 on the periodic macroscopic grid

    Args:
        state: State at its current time
        tau: Time increment, either sign
        cfl: Courant number in (0, 0.9]

    Returns:
        State advanced by τ
    """
    if not 0 < cfl <= 0.9:
        raise CFLError(f"CFL number must lie in (0, 0.9], got {cfl}")
    grid = state.grid
    d = grid.d
    h = grid.spacing
    velocity = np.sign(tau) * _row_velocities(state.table)
    rate = np.sum(np.abs(velocity) / h, axis=-1).max()
    if tau == 0 or rate == 0:
        return TransportState(grid=grid, table=state.table, tau=state.tau + float(tau), eigen=state.eigen.copy())

    dt = cfl / rate
    steps = int(np.ceil(abs(tau) / dt))
    dt = abs(tau) / steps
    lead = (None,) * d
    f = state.eigen.copy()
    for _ in range(steps):
        update = np.zeros_like(f)
        for axis in range(d):
            v = velocity[..., axis][lead]
            backward = (f - np.roll(f, 1, axis=axis)) / h[axis]
            forward = (np.roll(f, -1, axis=axis) - f) / h[axis]
            update += np.where(v > 0, v * backward, v * forward)
        f = f - dt * update
    logger.debug("Upwind transport: %d steps of %.3g", steps, dt)
    return TransportState(grid=grid, table=state.table, tau=state.tau + float(tau), eigen=f)


def l1_distance(a: TransportState, b: TransportState) -> float:
    """∫ Σ_jk |a_jk - b_jk| dr dθ with the θ measure normalized to one"""
    if a.eigen.shape != b.eigen.shape:
        raise ValueError("Transport states live on different grids")
    diff = np.abs(a.eigen - b.eigen).sum(axis=(-2, -1))
    return float(diff.sum() * a.grid.cell_volume / a.table.lattice.size)


def projected_wigner(profile: SlowProfile, table: DispersionTable, tau: float, r: Sequence[float]) -> np.ndarray:
    """
    W^p(τ; r, θ) = Σ_σ Π_σ W(0; r - τ∇ω_σ(θ), θ) Π_σ over the θ grid

    Returns:
        Array of shape grid + (n, n) in the original component basis
    """
    r = np.asarray(r, dtype=float)
    lattice = table.lattice
    if r.shape != (lattice.d,):
        raise ValueError(f"Position must have length {lattice.d}, got shape {r.shape}")
    n = lattice.n
    eigen = np.zeros(lattice.shape + (n, n), dtype=complex)
    for j in range(n):
        traced = r - tau * table.velocities[..., j, :]
        W0 = wigner_from_density(profile(traced, table), table)
        eigen[..., j, :] = table.to_eigenbasis(W0)[..., j, :]
    return table.from_eigenbasis(table.same_band * eigen)
