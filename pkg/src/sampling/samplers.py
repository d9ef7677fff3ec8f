"""Samplers for homogeneous initial measures and slowly varying families"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .spectra import HomogeneousSpectrum, SlowProfile
from ..dynamics.phase_field import PhaseField
from ..errors import DivisibilityError, ProfileError
from ..lattice.dispersion import DispersionTable, build_dispersion_table
from ..lattice.force_field import ForceField
from ..lattice.grid import LatticeSpec, from_fourier, to_fourier

logger = logging.getLogger(__name__)

SEED_MASK = 2 ** 64 - 1


class NoiseKind(Enum):
    """White noise fed to the coloring filter"""
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform-filtered"


def derive_seed(seed: int, index: int) -> int:
    """Counter-based seed of sample ``index``"""
    if not 0 <= seed <= SEED_MASK:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    return (seed ^ index) & SEED_MASK


def white_noise(rng: np.random.Generator, shape: Tuple[int, ...], kind: NoiseKind) -> np.ndarray:
    """Independent real entries with mean 0 and variance 1"""
    if kind == NoiseKind.GAUSSIAN:
        return rng.standard_normal(shape)
    half_width = np.sqrt(3.0)
    return rng.uniform(-half_width, half_width, size=shape)


def hermitian_sqrt(matrix: np.ndarray) -> np.ndarray:
    """PSD square root per grid point, negative rounding eigenvalues clamped to zero"""
    adjoint = np.conj(np.swapaxes(matrix, -1, -2))
    w, E = np.linalg.eigh(0.5 * (matrix + adjoint))
    root = np.sqrt(np.clip(w, 0.0, None))
    return np.einsum("...ij,...j,...kj->...ik", E, root, E.conj())


def _color(noise: np.ndarray, root: np.ndarray, d: int) -> np.ndarray:
    noise_hat = to_fourier(noise, d)
    return from_fourier(np.einsum("...ij,...j->...i", root, noise_hat), d).real


class HomogeneousSampler:
    """
    Draws translation-invariant fields with prescribed spectral density

    Real white noise η is colored in Fourier space by the Hermitian square root of q̂₀,
    so that E[Y(x) Y(x')^T] = N^{-d} Σ_θ e^{-iθ·(x-x')} q̂₀(θ).
    """

    def __init__(self, spectrum: HomogeneousSpectrum, noise: NoiseKind = NoiseKind.GAUSSIAN):
        spectrum.validate()
        self.spectrum = spectrum
        self.noise = NoiseKind(noise)
        self.root = hermitian_sqrt(spectrum.matrix)

    @property
    def lattice(self) -> LatticeSpec:
        return self.spectrum.lattice

    def sample(self, seed: int) -> PhaseField:
        lattice = self.lattice
        rng = np.random.default_rng(seed)
        eta = white_noise(rng, lattice.shape + (2 * lattice.n,), self.noise)
        return PhaseField.from_stacked(lattice, _color(eta, self.root, lattice.d))


def sample_homogeneous(
    spectrum: HomogeneousSpectrum, rng_seed: int, noise: NoiseKind = NoiseKind.GAUSSIAN
) -> PhaseField:
    return HomogeneousSampler(spectrum, noise).sample(derive_seed(rng_seed, 0))


@dataclass
class SlowFamilyConfig:
    """
    Scale parameters of a slowly varying family

    Attributes:
        epsilon: Scale parameter ε in (0, 1)
        beta: Block exponent β in (1/2, 1)
        noise_kind: Gaussian or filtered uniform white noise
        local_factor: Each block is cut out of a homogeneous torus this many blocks wide
        block_side: Explicit N_ε; by default round(ε^{-β}) forced even
    """
    epsilon: float
    beta: float = 0.75
    noise_kind: NoiseKind = NoiseKind.GAUSSIAN
    local_factor: int = 4
    block_side: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"ε must lie in (0, 1), got {self.epsilon}")
        if not 0.5 < self.beta < 1:
            raise ValueError(f"β must lie in (1/2, 1), got {self.beta}")
        if self.local_factor < 1:
            raise ValueError(f"local_factor must be >= 1, got {self.local_factor}")
        self.noise_kind = NoiseKind(self.noise_kind)
        if self.block_side is not None and (self.block_side < 2 or self.block_side % 2):
            raise ValueError(f"Block side must be even and >= 2, got {self.block_side}")

    @property
    def n_eps(self) -> int:
        if self.block_side is not None:
            return self.block_side
        side = int(round(self.epsilon ** -self.beta))
        return max(side + side % 2, 2)

    @property
    def local_side(self) -> int:
        side = self.local_factor * self.n_eps
        return max(side + side % 2, 8)


def check_profile_matrix(matrix: np.ndarray, n: int, r, tol: float = 1e-10) -> None:
    """Raise ProfileError if R̂(r, ·) breaks adjointness (I2) or positivity (I3)"""
    scale = max(float(np.abs(matrix).max()), 1.0)
    off = np.abs(matrix[..., :n, n:] - np.conj(np.swapaxes(matrix[..., n:, :n], -1, -2)))
    off = off.max(axis=(-2, -1))
    if off.max() > tol * scale:
        raise ProfileError("R̂⁰¹ is not the adjoint of R̂¹⁰", r, _argmax_index(off))
    herm = np.abs(matrix - np.conj(np.swapaxes(matrix, -1, -2))).max(axis=(-2, -1))
    if herm.max() > tol * scale:
        raise ProfileError("R̂ is not Hermitian", r, _argmax_index(herm))
    lowest = np.linalg.eigvalsh(matrix).min(axis=-1)
    if lowest.min() < -tol * scale:
        raise ProfileError(f"R̂ is not PSD (eigenvalue {lowest.min():.3e})", r,
                           _argmax_index(-lowest))


def _argmax_index(values: np.ndarray) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(values)), values.shape))


class SlowFamilySampler:
    """
    Piecewise-homogeneous sampler for a slow profile

    The torus is cut into cubes of side N_ε. The cube with corner k·N_ε is filled by a
    homogeneous field with density R̂(ε·x_c, ·), x_c its center, drawn on a local torus
    of side ``cfg.local_side`` and restricted to one cube. Cubes are independent.
    Macroscopic positions are r = ε·x with x ∈ [0, N)^d.
    """

    def __init__(self, field: ForceField, profile: SlowProfile, cfg: SlowFamilyConfig,
                 local_table: Optional[DispersionTable] = None):
        lattice = field.lattice
        n_eps = cfg.n_eps
        if lattice.N % n_eps:
            raise DivisibilityError(f"Torus side N={lattice.N} is not a multiple of N_ε={n_eps}")
        self.field = field
        self.profile = profile
        self.cfg = cfg
        self.lattice = lattice
        self.local_table = local_table or build_dispersion_table(field.with_grid(cfg.local_side))
        self.blocks_per_axis = lattice.N // n_eps
        self._roots: Dict[Tuple[int, ...], np.ndarray] = {}
        for corner in self.cube_corners():
            r = self.cube_center(corner)
            matrix = profile(r, self.local_table)
            check_profile_matrix(matrix, lattice.n, r)
            self._roots[corner] = hermitian_sqrt(matrix)
        logger.info(
            "Slow family: ε=%g, N_ε=%d, %d cubes, local torus %d",
            cfg.epsilon, n_eps, len(self._roots), cfg.local_side,
        )

    def cube_corners(self) -> List[Tuple[int, ...]]:
        return list(itertools.product(range(self.blocks_per_axis), repeat=self.lattice.d))

    def cube_center(self, corner: Sequence[int]) -> np.ndarray:
        n_eps = self.cfg.n_eps
        x_c = np.asarray(corner, dtype=float) * n_eps + 0.5 * n_eps
        return self.cfg.epsilon * x_c

    def cube_of(self, x: Sequence[int]) -> Tuple[int, ...]:
        return tuple((int(c) % self.lattice.N) // self.cfg.n_eps for c in x)

    def sample(self, seed: int) -> PhaseField:
        lattice = self.lattice
        d, n, n_eps = lattice.d, lattice.n, self.cfg.n_eps
        local_shape = (self.cfg.local_side,) * d
        rng = np.random.default_rng(seed)
        out = np.empty(lattice.shape + (2 * n,))
        window = tuple(slice(0, n_eps) for _ in range(d))
        for corner in self.cube_corners():
            eta = white_noise(rng, local_shape + (2 * n,), self.cfg.noise_kind)
            local = _color(eta, self._roots[corner], d)
            target = tuple(slice(c * n_eps, (c + 1) * n_eps) for c in corner)
            out[target] = local[window]
        return PhaseField.from_stacked(lattice, out)


def sample_slow_family(
    field: ForceField, profile: SlowProfile, cfg: SlowFamilyConfig, rng_seed: int
) -> PhaseField:
    return SlowFamilySampler(field, profile, cfg).sample(derive_seed(rng_seed, 0))


Sampler = Union[HomogeneousSampler, SlowFamilySampler]


def sample_many(sampler: Sampler, seed: int, count: int, max_workers: int = 1,
                start: int = 0) -> List[PhaseField]:
    """
    Draw ``count`` independent samples, sample i seeded by seed ⊕ i

    Results do not depend on ``max_workers``.
    """
    if count < 0:
        raise ValueError(f"Sample count must be nonnegative, got {count}")
    seeds = [derive_seed(seed, i) for i in range(start, start + count)]
    if max_workers <= 1 or count < 2:
        return [sampler.sample(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(sampler.sample, seeds))
