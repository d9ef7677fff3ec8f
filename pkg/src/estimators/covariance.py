"""Sample-mean estimators of two-point correlations"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..dynamics.phase_field import PhaseField
from ..errors import InsufficientSamplesError, LatticeMismatchError
from ..lattice.grid import LatticeSpec

logger = logging.getLogger(__name__)

Offset = Tuple[int, ...]

REPORT_COLUMNS = ["quantity", "index", "row", "col", "real", "imag", "stderr"]


def matrix_frame(quantity: str, labels: List[str], values: np.ndarray,
                 stderr: Optional[np.ndarray] = None) -> pd.DataFrame:
    """
    Long report table for a stack of matrices

    Args:
        quantity: Name written in the quantity column
        labels: One index label per matrix
        values: Array of shape (len(labels), rows, cols)
        stderr: Standard errors of the same shape; zero for theory tables

    Returns:
        DataFrame with REPORT_COLUMNS
    """
    values = np.asarray(values)
    if values.ndim != 3 or values.shape[0] != len(labels):
        raise ValueError(f"Expected {len(labels)} matrices, got array of shape {values.shape}")
    err = np.zeros(values.shape) if stderr is None else np.asarray(stderr, dtype=float)
    count, rows, cols = values.shape
    k, i, j = np.meshgrid(np.arange(count), np.arange(rows), np.arange(cols), indexing="ij")
    flat = values.reshape(-1).astype(complex)
    return pd.DataFrame({
        "quantity": quantity,
        "index": np.asarray(labels, dtype=object)[k.reshape(-1)],
        "row": i.reshape(-1),
        "col": j.reshape(-1),
        "real": flat.real,
        "imag": flat.imag,
        "stderr": err.reshape(-1),
    }, columns=REPORT_COLUMNS)


def check_samples(samples: Sequence[PhaseField], minimum: int = 2) -> LatticeSpec:
    """Common lattice of a sample list with at least ``minimum`` members"""
    if len(samples) < minimum:
        raise InsufficientSamplesError(f"Need at least {minimum} samples, got {len(samples)}")
    lattice = samples[0].lattice
    if any(Y.lattice != lattice for Y in samples):
        raise LatticeMismatchError("Samples live on different lattices")
    return lattice


def mean_and_error(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean over axis 0 with standard errors of the real and imaginary parts"""
    count = values.shape[0]
    mean = values.mean(axis=0)
    se_re = values.real.std(axis=0, ddof=1) / np.sqrt(count)
    if np.iscomplexobj(values):
        se_im = values.imag.std(axis=0, ddof=1) / np.sqrt(count)
    else:
        se_im = np.zeros_like(se_re)
    return mean, se_re, se_im


@dataclass
class CovarianceEstimate:
    """Estimates of E[Y(x₀+a) ⊗ Y(x₀)] per offset a, arrays of shape (A, 2n, 2n)"""
    offsets: List[Offset]
    base_points: List[Offset]
    mean: np.ndarray
    stderr_real: np.ndarray
    stderr_imag: np.ndarray
    count: int
    n: int

    @property
    def stderr(self) -> np.ndarray:
        return np.hypot(self.stderr_real, self.stderr_imag)

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.n
        return self.mean[:, i * n:(i + 1) * n, j * n:(j + 1) * n]

    def stderr_block(self, i: int, j: int) -> np.ndarray:
        n = self.n
        return self.stderr[:, i * n:(i + 1) * n, j * n:(j + 1) * n]

    def at(self, offset: Sequence[int]) -> np.ndarray:
        return self.mean[self.offsets.index(tuple(int(c) for c in offset))]

    def max_norm(self) -> Tuple[float, float]:
        """Largest Frobenius norm over offsets and the standard error at that offset"""
        norms = np.linalg.norm(self.mean, axis=(-2, -1))
        k = int(np.argmax(norms))
        return float(norms[k]), float(np.linalg.norm(self.stderr[k]))

    def to_dataframe(self, quantity: str) -> pd.DataFrame:
        """Long table with one row per (offset, row, col)"""
        labels = [",".join(str(c) for c in offset) for offset in self.offsets]
        return matrix_frame(quantity, labels, self.mean, self.stderr)


def normalize_points(lattice: LatticeSpec, points: Sequence[Sequence[int]]) -> List[Offset]:
    result = []
    for p in points:
        p = tuple(int(c) for c in p)
        if len(p) != lattice.d:
            raise ValueError(f"Point {p} does not have {lattice.d} coordinates")
        result.append(p)
    return result


def pair_products(fields: np.ndarray, lattice: LatticeSpec, base_points: List[Offset],
                   offsets: List[Offset]) -> np.ndarray:
    """Per-sample products averaged over base points, shape (S, A, m, m)"""
    N = lattice.N
    out = None
    for x0 in base_points:
        right = fields[(slice(None),) + tuple(c % N for c in x0)]
        lefts = np.stack(
            [fields[(slice(None),) + tuple((x + a) % N for x, a in zip(x0, offset))]
             for offset in offsets],
            axis=1,
        )
        prod = lefts[..., :, None] * right[:, None, None, :]
        out = prod if out is None else out + prod
    return out / len(base_points)


def estimate_covariance(
    samples: Sequence[PhaseField],
    base_point: Sequence[int],
    offsets: Sequence[Sequence[int]],
    extra_base_points: Optional[Sequence[Sequence[int]]] = None,
) -> CovarianceEstimate:
    """
    Sample means of Y(x₀+a) ⊗ Y(x₀) with standard errors

    Args:
        samples: At least two independent fields at the same time
        base_point: x₀
        offsets: Offsets a
        extra_base_points: Further base points averaged per sample (homogeneous input only)

    Returns:
        CovarianceEstimate over the offsets
    """
    lattice = check_samples(samples)
    base_points = normalize_points(lattice, [base_point] + list(extra_base_points or []))
    offsets = normalize_points(lattice, offsets)
    fields = np.stack([Y.stacked() for Y in samples])
    products = pair_products(fields, lattice, base_points, offsets)
    mean, se_re, se_im = mean_and_error(products)
    return CovarianceEstimate(offsets, base_points, mean, se_re, se_im, len(samples), lattice.n)


@dataclass
class UniformBoundResult:
    """Max covariance norm per (ε, t) and the fitted trend in t"""
    table: pd.DataFrame
    max_norm: float
    slope: float
    slope_stderr: float
    sigma: float

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.max_norm):
            return False
        return self.slope <= self.sigma * self.slope_stderr + 1e-12 * max(self.max_norm, 1.0)


def uniform_bound_check(
    estimates: Dict[Tuple[float, float], CovarianceEstimate], sigma: float = 3.0
) -> UniformBoundResult:
    """
    Largest estimated ‖Q‖ over an (ε, t) grid and a check for growth in t

    Args:
        estimates: CovarianceEstimate keyed by (ε, t)
        sigma: Allowed slope in units of its standard error

    Returns:
        UniformBoundResult; passes when the slope of max-norm against t is not
        significantly positive
    """
    rows = []
    for (eps, t), estimate in sorted(estimates.items()):
        norm, err = estimate.max_norm()
        rows.append({"epsilon": eps, "t": t, "max_norm": norm, "max_norm_stderr": err})
    table = pd.DataFrame(rows, columns=["epsilon", "t", "max_norm", "max_norm_stderr"])
    if table.empty:
        raise InsufficientSamplesError("No covariance estimates supplied")

    slope, slope_stderr = 0.0, 0.0
    flat = np.ptp(table["max_norm"].to_numpy()) == 0
    if table["t"].nunique() >= 3 and not flat:
        fit = stats.linregress(table["t"], table["max_norm"])
        slope, slope_stderr = float(fit.slope), float(fit.stderr)
    elif table["t"].nunique() == 2 and not flat:
        # two times: compare endpoint means directly
        first = table[table["t"] == table["t"].min()]
        last = table[table["t"] == table["t"].max()]
        dt = float(table["t"].max() - table["t"].min())
        slope = float(last["max_norm"].mean() - first["max_norm"].mean()) / dt
        slope_stderr = float(np.hypot(first["max_norm_stderr"].mean(), last["max_norm_stderr"].mean())) / dt

    result = UniformBoundResult(table, float(table["max_norm"].max()), slope, slope_stderr, sigma)
    logger.info("Uniform bound: max ‖Q‖ = %.4g, slope %.3g ± %.3g", result.max_norm, slope, slope_stderr)
    return result
