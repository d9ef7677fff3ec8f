"""Green functions of the lattice wave equation and their decay in time"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .propagator import build_propagator
from ..errors import WraparoundError
from ..lattice.conditions import ConditionTolerances, critical_distance
from ..lattice.dispersion import DispersionTable
from ..lattice.grid import LatticeSpec, from_fourier, torus_norm

logger = logging.getLogger(__name__)


def smooth_step(u: np.ndarray) -> np.ndarray:
    """C^∞ step rising from 0 at u <= 0 to 1 at u >= 1"""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)

    def bump(x):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)

    left, right = bump(u), bump(1.0 - u)
    return left / (left + right)


def partition_of_unity(
    table: DispersionTable,
    delta: float,
    tolerances: Optional[ConditionTolerances] = None,
) -> np.ndarray:
    """
    Cutoff f near the critical set: f = 1 within δ/2, f = 0 beyond δ

    Args:
        table: Dispersion table
        delta: Cutoff width δ > 0
        tolerances: Thresholds used to detect the critical set

    Returns:
        f on the dual grid; the complementary cutoff is g = 1 - f
    """
    if delta <= 0:
        raise ValueError(f"Split width must be positive, got {delta}")
    dist = critical_distance(table, delta, tolerances)
    half = 0.5 * delta
    return 1.0 - smooth_step((dist - half) / half)


@dataclass(frozen=True, eq=False)
class GreenFunction:
    """G_t(x) over torus offsets, shape grid + (2n, 2n), optionally split as G^f + G^g"""
    t: float
    lattice: LatticeSpec
    kernel: np.ndarray
    kernel_f: Optional[np.ndarray] = None
    kernel_g: Optional[np.ndarray] = None
    split_delta: Optional[float] = None
    partition: Optional[np.ndarray] = None

    @property
    def is_split(self) -> bool:
        return self.kernel_f is not None

    def at(self, x: Sequence[int]) -> np.ndarray:
        index = tuple(int(c) % self.lattice.N for c in x)
        return self.kernel[index]


def _real_kernel(values: np.ndarray, d: int) -> np.ndarray:
    return from_fourier(values, d).real


def green_function(
    table: DispersionTable,
    t: float,
    split_delta: Optional[float] = None,
    tolerances: Optional[ConditionTolerances] = None,
) -> GreenFunction:
    """Inverse transform of Ĝ_t, with the f/g split when ``split_delta`` is given"""
    lattice = table.lattice
    g_hat = build_propagator(table, t).matrix
    kernel = _real_kernel(g_hat, lattice.d)
    if split_delta is None:
        return GreenFunction(t=float(t), lattice=lattice, kernel=kernel)

    f = partition_of_unity(table, split_delta, tolerances)
    return GreenFunction(
        t=float(t),
        lattice=lattice,
        kernel=kernel,
        kernel_f=_real_kernel(f[..., None, None] * g_hat, lattice.d),
        kernel_g=_real_kernel((1.0 - f)[..., None, None] * g_hat, lattice.d),
        split_delta=float(split_delta),
        partition=f,
    )


@dataclass
class DecayDiagnostic:
    """Sup norms of the split Green function over a range of times"""
    times: List[float]
    sup_norm_g: List[float]
    sup_norm_f: List[float]
    inside_cone_sup: List[float]
    outside_cone_norm: List[float]
    slope: float
    slope_stderr: float
    cone_speed: float
    split_delta: float

    def outside_ratio(self, t: float) -> float:
        """Outside-cone norm relative to the inside-cone sup at the time closest to t"""
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        inside = self.inside_cone_sup[i]
        return self.outside_cone_norm[i] / inside if inside > 0 else float("inf")

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "sup_norm_g": self.sup_norm_g,
            "sup_norm_f": self.sup_norm_f,
            "outside_cone_norm": self.outside_cone_norm,
            "inside_cone_sup": self.inside_cone_sup,
        })


def required_torus_side(cone_speed: float, t_max: float) -> int:
    side = int(np.floor(2 * cone_speed * t_max)) + 1
    return side + side % 2


def decay_diagnostic(
    table: DispersionTable,
    times: Sequence[float],
    split_delta: float,
    cone_margin: float = 1.05,
    tolerances: Optional[ConditionTolerances] = None,
) -> DecayDiagnostic:
    """
    Fit the decay exponent of sup_x ‖G^g_t(x)‖ and measure leakage outside the light cone

    Args:
        table: Dispersion table
        times: Positive increasing times, at least two
        split_delta: Cutoff width around the critical set
        cone_margin: γ_g = cone_margin × max band speed

    Returns:
        DecayDiagnostic with per-time norms and the fitted log-log slope
    """
    times = [float(t) for t in times]
    if len(times) < 2 or times[0] <= 0 or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"Times must be positive, increasing and at least two: {times}")

    lattice = table.lattice
    cone_speed = cone_margin * table.max_band_speed
    if cone_speed * times[-1] >= lattice.N / 2:
        raise WraparoundError(
            f"Light cone γ_g·t = {cone_speed * times[-1]:.1f} reaches half the torus side",
            required_N=required_torus_side(cone_speed, times[-1]),
        )

    f = partition_of_unity(table, split_delta, tolerances)[..., None, None]
    radius = torus_norm(lattice)
    sup_g, sup_f, inside_sup, outside = [], [], [], []
    for t in times:
        g_hat = build_propagator(table, t).matrix
        norm_f = np.linalg.norm(_real_kernel(f * g_hat, lattice.d), axis=(-2, -1))
        norm_g = np.linalg.norm(_real_kernel((1.0 - f) * g_hat, lattice.d), axis=(-2, -1))
        inside = radius < cone_speed * t
        sup_g.append(float(norm_g.max()))
        sup_f.append(float(norm_f.max()))
        inside_sup.append(float(norm_g[inside].max()))
        outside.append(float(norm_g[~inside].max()) if (~inside).any() else 0.0)

    fit = stats.linregress(np.log(times), np.log(sup_g))
    logger.info("Green decay: slope %.3f ± %.3f over t in [%g, %g]",
                fit.slope, fit.stderr, times[0], times[-1])
    return DecayDiagnostic(
        times=times,
        sup_norm_g=sup_g,
        sup_norm_f=sup_f,
        inside_cone_sup=inside_sup,
        outside_cone_norm=outside,
        slope=float(fit.slope),
        slope_stderr=float(fit.stderr),
        cone_speed=float(cone_speed),
        split_delta=float(split_delta),
    )
