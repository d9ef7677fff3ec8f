"""Spectral densities of initial measures: homogeneous spectra and slow profiles"""

import itertools
import logging
import weakref
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..errors import SpectrumError
from ..lattice.dispersion import DispersionTable
from ..lattice.grid import LatticeSpec, dual_grid, from_fourier, reflect

logger = logging.getLogger(__name__)

SpectralFactor = Callable[[DispersionTable], np.ndarray]
PositionFactor = Callable[[np.ndarray], np.ndarray]


def _blocks(n: int, q00, q01, q10, q11) -> np.ndarray:
    shape = np.broadcast(q00, q11).shape[:-2]
    out = np.zeros(shape + (2 * n, 2 * n), dtype=complex)
    out[..., :n, :n] = q00
    out[..., :n, n:] = q01
    out[..., n:, :n] = q10
    out[..., n:, n:] = q11
    return out


def _warn_singular(table: DispersionTable, what: str):
    count = int(table.singular_mask.sum())
    if count:
        logger.warning("%s: %d singular grid points excluded", what, count)


def gibbs_matrix(table: DispersionTable, temperature: float = 1.0) -> np.ndarray:
    """q̂⁰⁰ = TΩ⁻², q̂¹¹ = T, off-diagonal blocks zero"""
    _warn_singular(table, "Gibbs density")
    n = table.lattice.n
    eye = np.broadcast_to(np.eye(n), table.lattice.shape + (n, n))
    zero = np.zeros_like(eye)
    return _blocks(n, temperature * table.omega_power(-2), zero, zero, temperature * eye)


def nonequilibrium_matrix(
    table: DispersionTable, temperature_u: float = 1.0, temperature_v: float = 2.0
) -> np.ndarray:
    """Separate temperatures for displacements and velocities; Ω q̂⁰⁰ ≠ Ω⁻¹ q̂¹¹ when they differ"""
    _warn_singular(table, "Non-equilibrium density")
    n = table.lattice.n
    eye = np.broadcast_to(np.eye(n), table.lattice.shape + (n, n))
    zero = np.zeros_like(eye)
    return _blocks(n, temperature_u * table.omega_power(-2), zero, zero, temperature_v * eye)


def white_matrix(lattice: LatticeSpec, scale: float = 1.0) -> np.ndarray:
    n = lattice.n
    return np.broadcast_to(scale * np.eye(2 * n, dtype=complex), lattice.shape + (2 * n, 2 * n)).copy()


def wave_packet_matrix(
    table: DispersionTable, theta0: Sequence[float], spectral_width: float
) -> np.ndarray:
    """
    Density whose Wigner matrix is g(θ)·Identity, g a periodic Gaussian around θ₀

    With a = (g(θ) + g(-θ))/2 and b = (g(θ) - g(-θ))/2 the blocks are
    q̂⁰⁰ = aΩ⁻¹, q̂¹¹ = aΩ, q̂⁰¹ = -ib, q̂¹⁰ = ib; each band block has determinant g(θ)g(-θ) ≥ 0.
    """
    lattice = table.lattice
    theta0 = np.broadcast_to(np.asarray(theta0, dtype=float), (lattice.d,))
    diff = (dual_grid(lattice) - theta0 + np.pi) % (2 * np.pi) - np.pi
    g = np.exp(-np.sum(diff ** 2, axis=-1) / (2 * spectral_width ** 2))
    g_mirror = reflect(g, lattice.d)
    a = 0.5 * (g + g_mirror)[..., None, None]
    b = 0.5 * (g - g_mirror)[..., None, None]

    _warn_singular(table, "Wave-packet density")
    n = lattice.n
    eye = np.eye(n)
    keep = (~table.singular_mask)[..., None, None]
    return _blocks(
        n,
        a * table.omega_power(-1),
        keep * (-1j * b * eye),
        keep * (1j * b * eye),
        keep * a * table.omega_power(1),
    )


def position_covariance(
    matrix: np.ndarray, lattice: LatticeSpec, offsets: Sequence[Sequence[int]]
) -> np.ndarray:
    """q(a) = N^{-d} Σ_θ e^{-iθ·a} q̂(θ) at the requested offsets, shape (A, 2n, 2n)"""
    q = from_fourier(matrix, lattice.d)
    index = tuple(np.array([int(a[k]) % lattice.N for a in offsets]) for k in range(lattice.d))
    return q[index]


@dataclass(frozen=True, eq=False)
class HomogeneousSpectrum:
    """Translation-invariant density q̂₀(θ), shape grid + (2n, 2n)"""
    lattice: LatticeSpec
    matrix: np.ndarray
    name: str = "custom"

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.lattice.n
        return self.matrix[..., i * n:(i + 1) * n, j * n:(j + 1) * n]

    def energy_density(self) -> float:
        n = self.lattice.n
        trace = np.trace(self.matrix[..., :n, :n], axis1=-2, axis2=-1)
        trace = trace + np.trace(self.matrix[..., n:, n:], axis1=-2, axis2=-1)
        return float(np.mean(trace.real))

    def position_covariance(self, offsets: Sequence[Sequence[int]]) -> np.ndarray:
        return position_covariance(self.matrix, self.lattice, offsets)

    def validate(self, tol: float = 1e-10) -> None:
        """Hermitian PSD per grid point, real-field symmetry and finite energy"""
        q = self.matrix
        expected = self.lattice.shape + (2 * self.lattice.n,) * 2
        if q.shape != expected:
            raise SpectrumError(f"Spectrum has shape {q.shape}, expected {expected}")
        if not np.all(np.isfinite(q)):
            raise SpectrumError("Spectrum has non-finite entries")
        scale = max(float(np.abs(q).max()), 1.0)
        adjoint = np.conj(np.swapaxes(q, -1, -2))
        if np.abs(q - adjoint).max() > tol * scale:
            raise SpectrumError("Spectrum is not Hermitian")
        min_eig = np.linalg.eigvalsh(0.5 * (q + adjoint)).min()
        if min_eig < -tol * scale:
            raise SpectrumError(f"Spectrum is not PSD: eigenvalue {min_eig:.3e}")
        if np.abs(reflect(q, self.lattice.d) - np.conj(q)).max() > tol * scale:
            raise SpectrumError("Spectrum violates q̂(-θ) = conj q̂(θ); sampled field would not be real")
        if not np.isfinite(self.energy_density()):
            raise SpectrumError("Spectrum has infinite energy density")


def gibbs_spectrum(table: DispersionTable, temperature: float = 1.0) -> HomogeneousSpectrum:
    return HomogeneousSpectrum(table.lattice, gibbs_matrix(table, temperature), name="gibbs")


def nonequilibrium_spectrum(
    table: DispersionTable, temperature_u: float = 1.0, temperature_v: float = 2.0
) -> HomogeneousSpectrum:
    return HomogeneousSpectrum(
        table.lattice, nonequilibrium_matrix(table, temperature_u, temperature_v),
        name="nonequilibrium",
    )


def white_spectrum(lattice: LatticeSpec, scale: float = 1.0) -> HomogeneousSpectrum:
    return HomogeneousSpectrum(lattice, white_matrix(lattice, scale), name="white")


def build_spectrum(kind: str, table: DispersionTable, params: Optional[Dict] = None) -> HomogeneousSpectrum:
    """Stock homogeneous spectrum by name"""
    params = dict(params or {})
    if kind == "gibbs":
        return gibbs_spectrum(table, params.get("temperature", 1.0))
    if kind == "nonequilibrium":
        return nonequilibrium_spectrum(
            table, params.get("temperature", 1.0), params.get("temperature_v", 2.0)
        )
    if kind == "white":
        return white_spectrum(table.lattice, params.get("scale", 1.0))
    raise ValueError(f"Unknown spectrum kind: {kind}. Supported: gibbs, nonequilibrium, white")


class SlowProfile:
    """
    Slowly varying density R̂(r, θ)

    ``spectrum(r, table)`` accepts r of shape (d,), giving R̂(r, ·) on the whole grid, or a
    field of shape grid + (d,), giving R̂(r(θ), θ) pointwise.
    """

    def __init__(self, name: str, lipschitz: Optional[float] = None,
                 decay_exponent: Optional[float] = None):
        self.name = name
        self.lipschitz = lipschitz
        self.decay_exponent = decay_exponent

    def spectrum(self, r, table: DispersionTable) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, r, table: DispersionTable) -> np.ndarray:
        return self.spectrum(r, table)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class SeparableProfile(SlowProfile):
    """R̂(r, θ) = b(r)·S(θ)"""

    def __init__(self, name: str, position_factor: PositionFactor, spectral_factor: SpectralFactor,
                 lipschitz: Optional[float] = None, decay_exponent: Optional[float] = None):
        super().__init__(name, lipschitz, decay_exponent)
        self.position_factor = position_factor
        self.spectral_factor = spectral_factor
        self._cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()

    def spectral_matrix(self, table: DispersionTable) -> np.ndarray:
        if table not in self._cache:
            self._cache[table] = self.spectral_factor(table)
        return self._cache[table]

    def spectrum(self, r, table: DispersionTable) -> np.ndarray:
        b = np.asarray(self.position_factor(np.asarray(r, dtype=float)), dtype=float)
        return b[..., None, None] * self.spectral_matrix(table)


class FunctionProfile(SlowProfile):
    """Profile given by an arbitrary callable (r, table) ↦ R̂"""

    def __init__(self, name: str, func: Callable[[np.ndarray, DispersionTable], np.ndarray],
                 lipschitz: Optional[float] = None, decay_exponent: Optional[float] = None):
        super().__init__(name, lipschitz, decay_exponent)
        self.func = func

    def spectrum(self, r, table: DispersionTable) -> np.ndarray:
        return np.asarray(self.func(np.asarray(r, dtype=float), table))


class TabulatedProfile(SlowProfile):
    """R̂ tabulated on an r-grid times the dual grid, multilinear in r and clamped at the edges"""

    def __init__(self, name: str, r_axes: Sequence[Sequence[float]], values: np.ndarray):
        super().__init__(name)
        self.r_axes: List[np.ndarray] = [np.asarray(ax, dtype=float) for ax in r_axes]
        self.values = np.asarray(values, dtype=complex)
        d = len(self.r_axes)
        if any(len(ax) < 2 or np.any(np.diff(ax) <= 0) for ax in self.r_axes):
            raise ValueError("Each r axis needs at least two strictly increasing points")
        if self.values.shape[:d] != tuple(len(ax) for ax in self.r_axes):
            raise ValueError("Tabulated values do not match the r axes")

    def spectrum(self, r, table: DispersionTable) -> np.ndarray:
        lattice = table.lattice
        d = lattice.d
        if len(self.r_axes) != d or self.values.shape[d:2 * d] != lattice.shape:
            raise ValueError(f"Tabulated profile does not match lattice {lattice}")
        r = np.broadcast_to(np.asarray(r, dtype=float), lattice.shape + (d,))
        theta_index = tuple(np.indices(lattice.shape))

        lower, weight = [], []
        for a, ax in enumerate(self.r_axes):
            x = np.clip(r[..., a], ax[0], ax[-1])
            i = np.clip(np.searchsorted(ax, x, side="right") - 1, 0, len(ax) - 2)
            lower.append(i)
            weight.append((x - ax[i]) / (ax[i + 1] - ax[i]))

        out = np.zeros(lattice.shape + self.values.shape[2 * d:], dtype=complex)
        for corner in itertools.product((0, 1), repeat=d):
            w = np.ones(lattice.shape)
            for a, c in enumerate(corner):
                w = w * (weight[a] if c else 1.0 - weight[a])
            index = tuple(lower[a] + corner[a] for a in range(d)) + theta_index
            out += w[..., None, None] * self.values[index]
        return out


def _gaussian_bump(center, width: float) -> PositionFactor:
    center = np.asarray(center, dtype=float)

    def bump(r: np.ndarray) -> np.ndarray:
        return np.exp(-np.sum((r - center) ** 2, axis=-1) / (2 * width ** 2))

    return bump


def thermal_gradient_profile(
    base_temperature: float = 1.0,
    amplitude: float = 0.5,
    center: Sequence[float] = (0.0,),
    width: float = 1.0,
) -> SeparableProfile:
    """Gibbs density at the local temperature T(r) = T₀ + A·exp(-|r - c|²/2w²)"""
    if base_temperature <= 0 or base_temperature + min(amplitude, 0) <= 0 or width <= 0:
        raise ValueError("Temperatures and width must stay positive")
    bump = _gaussian_bump(center, width)
    return SeparableProfile(
        name="thermal-gradient",
        position_factor=lambda r: base_temperature + amplitude * bump(r),
        spectral_factor=lambda table: gibbs_matrix(table, 1.0),
        lipschitz=abs(amplitude) / (width * np.sqrt(np.e)),
    )


def step_profile(
    left_temperature: float = 1.0, right_temperature: float = 2.0, interface: float = 0.0
) -> SeparableProfile:
    """Gibbs density at T_left for r₁ < interface and T_right for r₁ >= interface"""
    if left_temperature < 0 or right_temperature < 0:
        raise ValueError("Temperatures must be nonnegative")

    def temperature(r: np.ndarray) -> np.ndarray:
        return np.where(r[..., 0] < interface, left_temperature, right_temperature)

    return SeparableProfile(
        name="step",
        position_factor=temperature,
        spectral_factor=lambda table: gibbs_matrix(table, 1.0),
        lipschitz=float("inf") if left_temperature != right_temperature else 0.0,
    )


def wave_packet_profile(
    theta0: Sequence[float] = (np.pi / 2,),
    spectral_width: float = 0.3,
    center: Sequence[float] = (0.0,),
    width: float = 1.0,
    amplitude: float = 1.0,
) -> SeparableProfile:
    """Wave packet localized near r = center in space and θ = θ₀ in wavenumber"""
    if spectral_width <= 0 or width <= 0 or amplitude < 0:
        raise ValueError("Widths must be positive and amplitude nonnegative")
    bump = _gaussian_bump(center, width)
    return SeparableProfile(
        name="wave-packet",
        position_factor=lambda r: amplitude * bump(r),
        spectral_factor=lambda table: wave_packet_matrix(table, theta0, spectral_width),
        lipschitz=amplitude / (width * np.sqrt(np.e)),
    )


def constant_profile(spectral_factor: SpectralFactor, name: str = "constant") -> SeparableProfile:
    return SeparableProfile(
        name=name,
        position_factor=lambda r: np.ones(r.shape[:-1]),
        spectral_factor=spectral_factor,
        lipschitz=0.0,
    )


def build_profile(kind: str, params: Optional[Dict] = None) -> SlowProfile:
    """Stock slow profile by name"""
    params = dict(params or {})
    if kind == "thermal-gradient":
        return thermal_gradient_profile(**params)
    if kind == "step":
        return step_profile(**params)
    if kind == "wave-packet":
        return wave_packet_profile(**params)
    if kind == "constant":
        spectrum_kind = params.pop("spectrum", "gibbs")
        return constant_profile(
            lambda table: build_spectrum(spectrum_kind, table, params).matrix,
            name=f"constant-{spectrum_kind}",
        )
    raise ValueError(
        f"Unknown profile kind: {kind}. Supported: thermal-gradient, step, wave-packet, constant"
    )
