"""The complex a-field and windowed Wigner-matrix estimates"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .covariance import (
    CovarianceEstimate,
    check_samples,
    matrix_frame,
    mean_and_error,
    normalize_points,
    pair_products,
)
from ..dynamics.phase_field import PhaseField
from ..errors import SingularModeError, WindowError
from ..lattice.dispersion import DispersionTable
from ..lattice.grid import LatticeSpec, dual_grid, from_fourier, offset_box, to_fourier

logger = logging.getLogger(__name__)

# Upper bound on complex entries held per θ-chunk while summing over samples
CHUNK_ENTRIES = 2 ** 22


class Taper(Enum):
    """Window applied to the offset sum"""
    BOXCAR = "boxcar"
    TRIANGULAR = "triangular"

    def weights(self, offsets: np.ndarray, y_max: int) -> np.ndarray:
        if self == Taper.BOXCAR:
            return np.ones(len(offsets))
        return np.prod(1.0 - np.abs(offsets) / (y_max + 1.0), axis=-1)


def _singular_points(table: DispersionTable):
    return [tuple(int(c) for c in p) for p in np.argwhere(table.singular_mask)]


def a_field(Y: PhaseField, table: DispersionTable, mask_singular: bool = False) -> np.ndarray:
    """
    a = (Ω^{1/2} u + i Ω^{-1/2} v)/√2 computed in Fourier space, shape grid + (n,)

    Raises:
        SingularModeError: Ω is singular somewhere and ``mask_singular`` is False
    """
    if Y.lattice != table.lattice:
        raise ValueError(f"Field lattice {Y.lattice} does not match table lattice {table.lattice}")
    if table.singular_mask.any() and not mask_singular:
        raise SingularModeError("a-field needs Ω⁻¹ᐟ²", _singular_points(table))
    d = Y.lattice.d
    u_hat = to_fourier(Y.u, d)
    v_hat = to_fourier(Y.v, d)
    a_hat = (
        np.einsum("...ij,...j->...i", table.omega_power(0.5), u_hat)
        + 1j * np.einsum("...ij,...j->...i", table.omega_power(-0.5), v_hat)
    ) / np.sqrt(2.0)
    return from_fourier(a_hat, d)


def phase_field_from_a(a: np.ndarray, table: DispersionTable) -> PhaseField:
    """Inverse of a_field for a model without singular modes"""
    if table.singular_mask.any():
        raise SingularModeError("Reconstruction needs Ω⁻¹ᐟ²", _singular_points(table))
    d = table.lattice.d
    re_hat = to_fourier(a.real, d)
    im_hat = to_fourier(a.imag, d)
    u = np.sqrt(2.0) * from_fourier(np.einsum("...ij,...j->...i", table.omega_power(-0.5), re_hat), d)
    v = np.sqrt(2.0) * from_fourier(np.einsum("...ij,...j->...i", table.omega_power(0.5), im_hat), d)
    return PhaseField(lattice=table.lattice, u=u.real, v=v.real)


def aa_covariance(
    samples: Sequence[PhaseField],
    table: DispersionTable,
    offsets: Sequence[Sequence[int]],
    base_point: Optional[Sequence[int]] = None,
    mask_singular: bool = False,
) -> CovarianceEstimate:
    """Sample means of a(x₀+a) ⊗ a(x₀) without conjugation, arrays of shape (A, n, n)"""
    lattice = check_samples(samples)
    base_points = normalize_points(lattice, [base_point if base_point is not None else (0,) * lattice.d])
    offsets = normalize_points(lattice, offsets)
    fields = np.stack([a_field(Y, table, mask_singular=mask_singular) for Y in samples])
    mean, se_re, se_im = mean_and_error(pair_products(fields, lattice, base_points, offsets))
    return CovarianceEstimate(offsets, base_points, mean, se_re, se_im, len(samples), lattice.n)


def window_offsets(d: int, y_max: int, parity: str = "all") -> np.ndarray:
    """Offsets y with |y|_∞ <= y_max, optionally only those with even components"""
    if parity not in ("all", "even"):
        raise ValueError(f"Parity must be 'all' or 'even', got {parity}")
    box = np.array(offset_box(d, y_max), dtype=int).reshape(-1, d)
    if parity == "even":
        box = box[np.all(box % 2 == 0, axis=-1)]
    return box


def default_window(epsilon: float, beta: float = 0.75) -> int:
    """Y_max = N_ε/2"""
    side = int(round(epsilon ** -beta))
    side = max(side + side % 2, 2)
    return side // 2


@dataclass
class WignerEstimate:
    """Ŵ(θ) on the dual grid, shape grid + (n, n), with standard errors"""
    tau: float
    epsilon: float
    r: Tuple[float, ...]
    center: Tuple[int, ...]
    lattice: LatticeSpec
    matrix: np.ndarray
    stderr_real: np.ndarray
    stderr_imag: np.ndarray
    y_max: int
    taper: Taper
    parity: str
    count: int

    @property
    def stderr(self) -> np.ndarray:
        return np.hypot(self.stderr_real, self.stderr_imag)

    def to_dataframe(self, quantity: str = "wigner") -> pd.DataFrame:
        """Long table indexed by flat θ index"""
        n = self.lattice.n
        size = self.lattice.size
        labels = [str(k) for k in range(size)]
        return matrix_frame(quantity, labels, self.matrix.reshape(size, n, n), self.stderr.reshape(size, n, n))


def wigner_center(lattice: LatticeSpec, epsilon: float, r: Sequence[float], y_max: int) -> Tuple[int, ...]:
    """x₀ = ⌊r/ε⌋, checked so that the whole window stays inside the torus"""
    r = np.broadcast_to(np.asarray(r, dtype=float), (lattice.d,))
    center = tuple(int(c) for c in np.floor(r / epsilon))
    reach = int(np.ceil(y_max / 2))
    for c in center:
        if c - reach < 0 or c + reach >= lattice.N:
            raise WindowError(
                f"Window of radius {y_max} around site {center} leaves the torus of side {lattice.N}"
            )
    return center


def wigner_estimate(
    samples: Sequence[PhaseField],
    table: DispersionTable,
    tau: float,
    epsilon: float,
    r: Sequence[float],
    y_max: Optional[int] = None,
    taper: Taper = Taper.TRIANGULAR,
    parity: str = "all",
    mask_singular: bool = False,
) -> WignerEstimate:
    """
    Windowed Wigner matrix Ŵ(θ) = Σ_y e^{iθ·y} w(y) Ê[a*(p) ⊗ a(q)], p - q = y

    Args:
        samples: Fields at time τ/ε
        table: Dispersion table of the same lattice
        tau: Macroscopic time, recorded in the estimate
        epsilon: Scale parameter
        r: Macroscopic position; the window is centered at ⌊r/ε⌋
        y_max: Window radius; defaults to N_ε/2
        taper: Offset weights w(y)
        parity: "all" integer offsets, or "even" offsets only

    Returns:
        WignerEstimate with per-θ standard errors
    """
    lattice = check_samples(samples)
    d, n, N = lattice.d, lattice.n, lattice.N
    y_max = default_window(epsilon) if y_max is None else int(y_max)
    if y_max < 0:
        raise ValueError(f"Window radius must be nonnegative, got {y_max}")
    taper = Taper(taper)
    center = wigner_center(lattice, epsilon, r, y_max)

    offsets = window_offsets(d, y_max, parity)
    weights = taper.weights(offsets, y_max)
    plus = (np.array(center) + np.floor_divide(offsets, 2)) % N
    minus = (np.array(center) - (-np.floor_divide(-offsets, 2))) % N

    # per-sample weighted pair products, shape (S, Y, n*n)
    pairs = []
    for Y in samples:
        a = a_field(Y, table, mask_singular=mask_singular)
        left = np.conj(a[tuple(plus.T)])
        right = a[tuple(minus.T)]
        pairs.append((weights[:, None, None] * left[:, :, None] * right[:, None, :]).reshape(len(offsets), n * n))
    pairs = np.stack(pairs)

    theta = dual_grid(lattice).reshape(-1, d)
    size = len(theta)
    mean = np.empty((size, n * n), dtype=complex)
    se_re = np.empty((size, n * n))
    se_im = np.empty((size, n * n))
    chunk = max(1, CHUNK_ENTRIES // max(1, len(samples) * n * n))
    for start in range(0, size, chunk):
        stop = min(start + chunk, size)
        phase = np.exp(1j * theta[start:stop] @ offsets.T)
        per_sample = np.einsum("gy,syk->sgk", phase, pairs)
        mean[start:stop], se_re[start:stop], se_im[start:stop] = mean_and_error(per_sample)

    shape = lattice.shape + (n, n)
    logger.debug("Wigner estimate at r=%s: %d samples, %d offsets", tuple(r), len(samples), len(offsets))
    return WignerEstimate(
        tau=float(tau), epsilon=float(epsilon),
        r=tuple(float(c) for c in np.broadcast_to(np.asarray(r, dtype=float), (d,))),
        center=center, lattice=lattice,
        matrix=mean.reshape(shape), stderr_real=se_re.reshape(shape), stderr_imag=se_im.reshape(shape),
        y_max=y_max, taper=taper, parity=parity, count=len(samples),
    )


def smooth_wigner(
    wigner: np.ndarray,
    lattice: LatticeSpec,
    y_max: int,
    taper: Taper = Taper.TRIANGULAR,
    parity: str = "all",
) -> np.ndarray:
    """
    Expected value of wigner_estimate when the exact Wigner matrix is ``wigner``

    The offset kernel w(y) = N^{-d} Σ_θ e^{-iθ·y} W(θ) is resummed over the same window.
    """
    d = lattice.d
    taper = Taper(taper)
    kernel = from_fourier(wigner, d)
    offsets = window_offsets(d, y_max, parity)
    weights = taper.weights(offsets, y_max)
    values = kernel[tuple((offsets % lattice.N).T)] * weights[:, None, None]
    theta = dual_grid(lattice).reshape(-1, d)
    phase = np.exp(1j * theta @ offsets.T)
    return np.einsum("gy,yij->gij", phase, values).reshape(wigner.shape)
