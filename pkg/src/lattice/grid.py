"""Discrete torus, its dual grid and the Fourier conventions used everywhere

Fourier transforms follow f̂(θ) = Σ_x e^{iθ·x} f(x) and f(x) = N^{-d} Σ_θ e^{-iθ·x} f̂(θ).
Arrays are laid out as grid shape + trailing component axes; transforms act on the
leading d axes only.
"""

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np


# Largest number of sites we are willing to index with default integer arrays
MAX_SITES = 2 ** 40


@dataclass(frozen=True)
class LatticeSpec:
    """Simple hypercubic torus {0, ..., N-1}^d carrying n field components"""
    d: int
    n: int
    N: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"Dimension must be >= 1, got {self.d}")
        if self.n < 1:
            raise ValueError(f"Component count must be >= 1, got {self.n}")
        if self.N < 8 or self.N % 2:
            raise ValueError(f"N must be even and >= 8, got {self.N}")
        if self.N ** self.d > MAX_SITES:
            raise ValueError(f"Torus too large: N^d = {self.N ** self.d}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N ** self.d

    @property
    def spacing(self) -> float:
        """Dual grid spacing h = 2π/N"""
        return 2.0 * np.pi / self.N

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(self.d))

    def with_grid(self, N: int) -> "LatticeSpec":
        return LatticeSpec(d=self.d, n=self.n, N=N)


def dual_grid(lattice: LatticeSpec) -> np.ndarray:
    """θ_k = 2πk/N over the whole dual grid, shape grid + (d,)"""
    k = np.indices(lattice.shape, dtype=float)
    return np.moveaxis(k, 0, -1) * lattice.spacing


def to_fourier(values: np.ndarray, d: int) -> np.ndarray:
    """Σ_x e^{iθ·x} f(x) over the first d axes"""
    axes = tuple(range(d))
    size = int(np.prod([values.shape[a] for a in axes]))
    return np.fft.ifftn(values, axes=axes) * size


def from_fourier(values: np.ndarray, d: int) -> np.ndarray:
    """Inverse of to_fourier"""
    axes = tuple(range(d))
    size = int(np.prod([values.shape[a] for a in axes]))
    return np.fft.fftn(values, axes=axes) / size


def reflect(values: np.ndarray, d: int) -> np.ndarray:
    """Evaluate a grid array at -θ (index k ↦ -k mod N on the first d axes)"""
    axes = tuple(range(d))
    return np.roll(np.flip(values, axis=axes), 1, axis=axes)


def signed_offsets(lattice: LatticeSpec) -> np.ndarray:
    """Torus displacement of every site from the origin, components in [-N/2, N/2)"""
    x = np.moveaxis(np.indices(lattice.shape), 0, -1)
    return (x + lattice.N // 2) % lattice.N - lattice.N // 2


def torus_norm(lattice: LatticeSpec) -> np.ndarray:
    """Euclidean length of the signed offsets, shape grid"""
    return np.linalg.norm(signed_offsets(lattice).astype(float), axis=-1)


def offset_box(d: int, radius: int) -> List[Tuple[int, ...]]:
    """All integer offsets with |a|_∞ <= radius, in lexicographic order"""
    return [tuple(a) for a in itertools.product(range(-radius, radius + 1), repeat=d)]


def wrap_index(lattice: LatticeSpec, point: Iterable[int]) -> Tuple[int, ...]:
    return tuple(int(p) % lattice.N for p in point)
