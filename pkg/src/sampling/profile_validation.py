"""Numeric checks of the slow-profile conditions I1-I4"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .spectra import SlowProfile
from ..lattice.dispersion import DispersionTable
from ..lattice.grid import from_fourier, torus_norm

logger = logging.getLogger(__name__)


@dataclass
class ProfileReport:
    """Outcome of validate_profile; failures hold one entry per violated (check, r)"""
    i2_passed: bool
    i3_passed: bool
    decay_passed: bool
    i4_passed: bool
    decay_exponent: float
    max_gradient: float
    failures: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.i2_passed and self.i3_passed and self.decay_passed and self.i4_passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "I1": {"passed": self.decay_passed, "decay_exponent": self.decay_exponent},
            "I2": {"passed": self.i2_passed},
            "I3": {"passed": self.i3_passed},
            "I4": {"passed": self.i4_passed, "max_gradient": self.max_gradient},
            "failures": self.failures,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, default=float)


def _first_bad(values: np.ndarray) -> List[int]:
    return [int(i) for i in np.unravel_index(int(np.argmax(values)), values.shape)]


def fit_decay_exponent(matrix: np.ndarray, table: DispersionTable, floor: float = 1e-12) -> float:
    """
    Exponent γ of a power-law envelope |R(x)| ≲ (1 + |x|)^{-γ} of the kernel of R̂

    Shell maxima below ``floor`` times the peak are left out; when fewer than three shells
    remain the kernel decays faster than the grid resolves and inf is returned.
    """
    lattice = table.lattice
    kernel = np.linalg.norm(from_fourier(matrix, lattice.d), axis=(-2, -1))
    peak = float(kernel.max())
    if peak == 0.0:
        return float("inf")
    radius = np.rint(torus_norm(lattice)).astype(int)
    shells = range(1, lattice.N // 2)
    xs, ys = [], []
    for s in shells:
        sel = radius == s
        if not sel.any():
            continue
        value = float(kernel[sel].max())
        if value > floor * peak:
            xs.append(np.log1p(s))
            ys.append(np.log(value))
    if len(xs) < 3:
        return float("inf")
    fit = stats.linregress(xs, ys)
    return float(-fit.slope)


def validate_profile(
    profile: SlowProfile,
    r_samples: Sequence[Sequence[float]],
    table: DispersionTable,
    tol: float = 1e-10,
    gradient_step: float = 1e-3,
    gradient_bound: Optional[float] = None,
) -> ProfileReport:
    """
    Check adjointness, positivity, kernel decay and r-regularity of a profile

    Args:
        profile: Slow profile
        r_samples: Macroscopic positions to probe, each of length d
        table: Dispersion table supplying the dual grid
        tol: Relative tolerance of the adjointness and PSD checks
        gradient_step: Central-difference step in r
        gradient_bound: Optional bound on |∇_r R̂|; finiteness is always required

    Returns:
        ProfileReport; nothing is raised for a failing profile
    """
    lattice = table.lattice
    n, d = lattice.n, lattice.d
    failures: List[Dict] = []
    i2 = i3 = True
    exponents = []
    max_gradient = 0.0

    for r in r_samples:
        r = np.asarray(r, dtype=float)
        if r.shape != (d,):
            raise ValueError(f"Sample point must have length {d}, got {r.shape}")
        R = profile(r, table)
        scale = max(float(np.abs(R).max()), 1.0)

        off = np.abs(R[..., :n, n:] - np.conj(np.swapaxes(R[..., n:, :n], -1, -2))).max(axis=(-2, -1))
        diag_low = np.minimum(
            np.linalg.eigvalsh(R[..., :n, :n]).min(axis=-1),
            np.linalg.eigvalsh(R[..., n:, n:]).min(axis=-1),
        )
        if off.max() > tol * scale or diag_low.min() < -tol * scale:
            i2 = False
            bad = off if off.max() > tol * scale else -diag_low
            failures.append({"check": "I2", "r": r.tolist(), "theta_index": _first_bad(bad),
                             "value": float(bad.max())})

        full_low = np.linalg.eigvalsh(R).min(axis=-1)
        if full_low.min() < -tol * scale:
            i3 = False
            failures.append({"check": "I3", "r": r.tolist(), "theta_index": _first_bad(-full_low),
                             "value": float(full_low.min())})

        exponents.append(fit_decay_exponent(R, table))

        for axis in range(d):
            step = np.zeros(d)
            step[axis] = gradient_step
            diff = (profile(r + step, table) - profile(r - step, table)) / (2 * gradient_step)
            max_gradient = max(max_gradient, float(np.abs(diff).max()))

    decay_exponent = min(exponents) if exponents else float("inf")
    decay_passed = decay_exponent > d
    if not decay_passed:
        failures.append({"check": "I1", "decay_exponent": decay_exponent})
    i4 = bool(np.isfinite(max_gradient)) and (gradient_bound is None or max_gradient <= gradient_bound)
    if not i4:
        failures.append({"check": "I4", "max_gradient": max_gradient})

    report = ProfileReport(
        i2_passed=i2, i3_passed=i3, decay_passed=decay_passed, i4_passed=i4,
        decay_exponent=decay_exponent, max_gradient=max_gradient, failures=failures,
    )
    logger.info("Profile %s: %s", profile.name, "pass" if report.passed else "fail")
    return report
