"""Gaussianity diagnostics: fourth cumulants and characteristic functionals of linear probes"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
from scipy import stats

from .covariance import check_samples
from ..dynamics.phase_field import PhaseField
from ..errors import DegenerateProbeError
from ..lattice.grid import LatticeSpec

logger = logging.getLogger(__name__)


def point_probe(lattice: LatticeSpec, x: Sequence[int], component: int = 0, kind: str = "u") -> PhaseField:
    """Probe picking one component of u or v at one site"""
    return local_probe(lattice, x, {(0,) * lattice.d: _unit(lattice.n, component, kind)})


def _unit(n: int, component: int, kind: str) -> np.ndarray:
    if kind not in ("u", "v"):
        raise ValueError(f"Probe kind must be 'u' or 'v', got {kind}")
    if not 0 <= component < n:
        raise ValueError(f"Component {component} out of range for n={n}")
    vector = np.zeros(2 * n)
    vector[component + (n if kind == "v" else 0)] = 1.0
    return vector


def local_probe(
    lattice: LatticeSpec, center: Sequence[int], entries: Dict[tuple, Sequence[float]]
) -> PhaseField:
    """
    Finitely supported probe Ψ given by (u, v) weight vectors at offsets from ``center``

    Args:
        lattice: Torus
        center: Site the offsets are measured from
        entries: Offset ↦ vector of length 2n, (ψ_u, ψ_v) stacked

    Returns:
        Probe as a PhaseField
    """
    values = np.zeros(lattice.shape + (2 * lattice.n,))
    for offset, vector in entries.items():
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (2 * lattice.n,):
            raise ValueError(f"Probe entry at {offset} must have length {2 * lattice.n}")
        site = tuple((int(c) + int(o)) % lattice.N for c, o in zip(center, offset))
        values[site] += vector
    return PhaseField.from_stacked(lattice, values)


def probe_values(samples: Sequence[PhaseField], probe: PhaseField) -> np.ndarray:
    """ξ = ⟨Y, Ψ⟩ per sample"""
    weights = probe.stacked()
    support = np.nonzero(np.any(weights != 0, axis=-1))
    w = weights[support]
    return np.array([float(np.sum(Y.stacked()[support] * w)) for Y in samples])


def _normalized_kurtosis(xi: np.ndarray, axis: int = -1) -> np.ndarray:
    second = np.mean(xi ** 2, axis=axis)
    fourth = np.mean(xi ** 4, axis=axis)
    return fourth / (3.0 * second ** 2) - 1.0


@dataclass
class KurtosisResult:
    """E[ξ⁴]/(3E[ξ²]²) - 1 for one probe with a bootstrap interval"""
    probe_index: int
    value: float
    stderr: float
    ci_low: float
    ci_high: float
    count: int

    @property
    def z(self) -> float:
        if self.stderr > 0:
            return self.value / self.stderr
        return 0.0 if self.value == 0 else float(np.copysign(np.inf, self.value))

    def consistent_with_gaussian(self) -> bool:
        return self.ci_low <= 0.0 <= self.ci_high


def fourth_cumulant_test(
    samples: Sequence[PhaseField],
    probes: Sequence[PhaseField],
    n_resamples: int = 1000,
    confidence: float = 0.95,
    seed: int = 0,
    min_samples: int = 1000,
) -> List[KurtosisResult]:
    """
    Normalized excess kurtosis of linear probes, zero for Gaussian input

    Args:
        samples: Independent fields at one time
        probes: Finitely supported probes Ψ
        n_resamples: Bootstrap resamples
        confidence: Confidence level of the percentile interval
        seed: Bootstrap seed
        min_samples: Refuse smaller sample sets

    Returns:
        One KurtosisResult per probe
    """
    check_samples(samples, minimum=max(2, min_samples))
    rng = np.random.default_rng(seed)
    results = []
    for k, probe in enumerate(probes):
        xi = probe_values(samples, probe)
        if np.mean(xi ** 2) == 0.0:
            raise DegenerateProbeError(f"Probe {k} has zero variance under the samples")
        boot = stats.bootstrap(
            (xi,), _normalized_kurtosis, n_resamples=n_resamples, confidence_level=confidence,
            method="percentile", vectorized=True, batch=50, random_state=rng,
        )
        results.append(KurtosisResult(
            probe_index=k,
            value=float(_normalized_kurtosis(xi)),
            stderr=float(boot.standard_error),
            ci_low=float(boot.confidence_interval.low),
            ci_high=float(boot.confidence_interval.high),
            count=len(xi),
        ))
        logger.debug("Probe %d: kurtosis %.4f ± %.4f", k, results[-1].value, results[-1].stderr)
    return results


@dataclass
class CharacteristicResult:
    """Empirical E e^{i⟨Y,Ψ⟩} against the Gaussian prediction e^{-Q/2}"""
    empirical: complex
    theory: float
    difference: float
    stderr: float
    count: int

    @property
    def z(self) -> float:
        if self.stderr > 0:
            return self.difference / self.stderr
        return 0.0 if self.difference == 0 else float("inf")

    def passed(self, sigma: float = 4.0) -> bool:
        return self.z <= sigma


def characteristic_functional(
    samples: Sequence[PhaseField], probe: PhaseField, theory_q: float
) -> CharacteristicResult:
    """|Ê e^{i⟨Y,Ψ⟩} - e^{-Q(Ψ,Ψ)/2}| with the standard error of the empirical mean"""
    if theory_q < 0:
        raise ValueError(f"Quadratic form must be nonnegative, got {theory_q}")
    check_samples(samples)
    xi = probe_values(samples, probe)
    count = len(xi)
    cos, sin = np.cos(xi), np.sin(xi)
    empirical = complex(cos.mean(), sin.mean())
    theory = float(np.exp(-0.5 * theory_q))
    stderr = float(np.sqrt((cos.var(ddof=1) + sin.var(ddof=1)) / count))
    return CharacteristicResult(
        empirical=empirical, theory=theory, difference=abs(empirical - theory),
        stderr=stderr, count=count,
    )

