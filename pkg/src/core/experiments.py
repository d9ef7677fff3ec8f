"""Named experiments binding samplers, evolution, estimators and theory into verdicts"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .experiment_config import ExperimentConfig, ExperimentName
from .reports import DiffResult, RunManifest, diff_frames, offset_labels, write_manifest, write_table
from .settings import LabSettings
from ..dynamics.green import decay_diagnostic
from ..dynamics.phase_field import PhaseField
from ..dynamics.propagator import build_propagator, evolve_many
from ..errors import ModelInvalidError, ResourceLimitError
from ..estimators.covariance import (
    estimate_covariance,
    matrix_frame,
    mean_and_error,
    pair_products,
    uniform_bound_check,
)
from ..estimators.gaussianity import characteristic_functional, fourth_cumulant_test, local_probe, point_probe
from ..estimators.wigner import Taper, aa_covariance, wigner_estimate, smooth_wigner
from ..kinetics.limit import limit_covariance, stationarity_check
from ..kinetics.local import local_covariance
from ..kinetics.transport import (
    MacroGrid,
    initial_wigner_on_grid,
    l1_distance,
    project_wigner,
    projected_wigner,
    transport_evolve,
    transport_pde_oracle,
)
from ..lattice.conditions import validate_conditions
from ..lattice.dispersion import DispersionTable, build_dispersion_table
from ..lattice.force_field import ForceField
from ..lattice.grid import offset_box
from ..sampling.samplers import HomogeneousSampler, NoiseKind, SlowFamilyConfig, SlowFamilySampler, sample_many
from ..sampling.spectra import build_spectrum, position_covariance

logger = logging.getLogger(__name__)

# Relative tolerance of closed-form identities
IDENTITY_TOL = 1e-8

FLOAT_BYTES = 8
COMPLEX_BYTES = 16


@dataclass
class Verdict:
    """One pass/fail assertion of an experiment"""
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        data = asdict(self)
        data["passed"] = bool(self.passed)
        return data


@dataclass
class ExperimentResult:
    """Verdicts plus the tables written to the run directory"""
    experiment: str
    verdicts: List[Verdict] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add_diff(self, name: str, diff: DiffResult) -> None:
        self.tables[f"{name}_diff"] = diff.table
        self.verdicts.append(Verdict(
            name=name, passed=diff.passed, value=diff.fraction_beyond,
            threshold=diff.allowed_fraction, detail=f"max z {diff.max_z:.2f} over {len(diff.table)} entries",
        ))


@dataclass
class RunOutcome:
    """Result of run_experiment with the process exit code"""
    result: ExperimentResult
    manifest: RunManifest
    out_dir: Path

    @property
    def exit_code(self) -> int:
        return 0 if self.result.passed else 1


def _zeros_like_frame(frame: pd.DataFrame) -> pd.DataFrame:
    theory = frame.copy()
    theory[["real", "imag", "stderr"]] = 0.0
    return theory


def _scaled_side(torus_scale: float, epsilon: float, block: int) -> int:
    """Smallest multiple of the block side with N ≥ torus_scale/ε"""
    return int(math.ceil(torus_scale / epsilon / block)) * block


class ExperimentRunner:
    """
    Runs one configured experiment

    Args:
        cfg: Validated experiment configuration
        settings: Laboratory settings (tolerances, resources, output format)
    """

    def __init__(self, cfg: ExperimentConfig, settings: Optional[LabSettings] = None):
        self.cfg = cfg
        self.settings = settings or LabSettings()
        self.field = cfg.model.build_field()
        self.workers = cfg.threads
        self._tables: Dict[int, DispersionTable] = {}

    @property
    def d(self) -> int:
        return self.field.lattice.d

    @property
    def n(self) -> int:
        return self.field.lattice.n

    def table(self, N: Optional[int] = None) -> DispersionTable:
        """Dispersion table on a torus of side N, cached per side"""
        N = N or self.field.lattice.N
        if N not in self._tables:
            section = self.settings.lattice
            self._tables[N] = build_dispersion_table(
                self.field.with_grid(N),
                singular_tol=section.singular_tol,
                e3_floor=section.e3_floor,
                degeneracy_rel_tol=section.degeneracy_rel_tol,
            )
        return self._tables[N]

    def slow_config(self, epsilon: float, noise: Optional[NoiseKind] = None) -> SlowFamilyConfig:
        return SlowFamilyConfig(epsilon=epsilon, beta=self.cfg.beta, noise_kind=noise or self.cfg.noise)

    def side_for(self, epsilon: float) -> int:
        return _scaled_side(self.cfg.torus_scale, epsilon, self.slow_config(epsilon).n_eps)

    def offsets(self, radius: int) -> List[Tuple[int, ...]]:
        if self.cfg.offsets is not None:
            return [tuple(a) for a in self.cfg.offsets]
        return offset_box(self.d, radius)

    # Resource guard

    def _footprint(self, side: int) -> float:
        """Peak bytes held for one torus side: sample sets plus a few spectral tables"""
        sites = float(side) ** self.d
        sample_bytes = 2 * self.cfg.samples * sites * 2 * self.n * FLOAT_BYTES
        table_bytes = 8 * sites * (2 * self.n) ** 2 * COMPLEX_BYTES
        if self.cfg.experiment == ExperimentName.GREEN_DECAY:
            return table_bytes
        return sample_bytes + table_bytes

    def largest_side(self) -> int:
        if self.cfg.experiment in (ExperimentName.HOMOGENEOUS_CONVERGENCE, ExperimentName.GREEN_DECAY):
            return self.field.lattice.N
        return self.side_for(self.cfg.epsilons[-1])

    def estimate_memory(self) -> float:
        """Estimated peak memory in bytes"""
        total = self._footprint(self.largest_side())
        if self.cfg.experiment == ExperimentName.KINETIC_WIGNER:
            theta_sites = float(self.field.lattice.N) ** self.d
            macro_sites = float(2 * self.cfg.macro_points) ** self.d
            total += 4 * macro_sites * theta_sites * self.n ** 2 * COMPLEX_BYTES
        return total

    def check_resources(self) -> None:
        """
        Raises:
            ResourceLimitError: Estimated memory exceeds performance.memory_cap_mb
        """
        cap = self.settings.performance.memory_cap_mb * 2 ** 20
        needed = self.estimate_memory()
        if needed <= cap:
            logger.info("Estimated memory %.0f MB within cap %.0f MB", needed / 2 ** 20, cap / 2 ** 20)
            return
        side = self.largest_side()
        while side > 8 and self._footprint(side) > cap:
            side = max(8, (side // 2) - (side // 2) % 2)
        raise ResourceLimitError(
            f"Estimated memory {needed / 2 ** 20:.0f} MB exceeds the cap of {cap / 2 ** 20:.0f} MB",
            suggested_N=side,
        )

    def check_model(self) -> None:
        report = validate_conditions(self.field, self.table(), self.settings.condition_tolerances())
        for warning in report.warnings:
            logger.warning("Model: %s", warning)
        if report.hard_failure:
            failed = [name for name, r in report.records.items() if r.status.value == "fail"]
            witness = next((report.records[name].witness for name in failed), None)
            raise ModelInvalidError(f"Force field fails {', '.join(failed)}", witness)

    # Experiments

    def run(self) -> ExperimentResult:
        self.check_model()
        handlers: Dict[ExperimentName, Callable[[], ExperimentResult]] = {
            ExperimentName.HOMOGENEOUS_CONVERGENCE: self.homogeneous_convergence,
            ExperimentName.GREEN_DECAY: self.green_decay,
            ExperimentName.KINETIC_WIGNER: self.kinetic_wigner,
            ExperimentName.LOCAL_STATIONARITY: self.local_stationarity,
            ExperimentName.GAUSSIANIZATION: self.gaussianization,
        }
        result = handlers[self.cfg.experiment]()
        for verdict in result.verdicts:
            logger.info("%-28s %s (%.4g vs %.4g) %s", verdict.name, "pass" if verdict.passed else "FAIL",
                        verdict.value, verdict.threshold, verdict.detail)
        return result

    def homogeneous_convergence(self) -> ExperimentResult:
        """Empirical covariances of a homogeneous measure approach the limit covariance"""
        cfg = self.cfg
        result = ExperimentResult(cfg.experiment.value)
        table = self.table()
        lattice = table.lattice
        spectrum = build_spectrum(cfg.spectrum.kind, table, cfg.spectrum.params)
        limit = limit_covariance(spectrum, table)
        scale = max(1.0, float(np.abs(limit.matrix).max()))

        # Step 1: the limit is a fixed point of the flow
        positive = [t for t in cfg.times if t > 0] or [1.0]
        drift = max(stationarity_check(limit, table, t) for t in positive)
        result.verdicts.append(Verdict("limit_stationary", drift <= IDENTITY_TOL * scale, drift,
                                       IDENTITY_TOL * scale, f"times {positive}"))
        input_stationary = max(stationarity_check(spectrum, table, t) for t in positive) <= IDENTITY_TOL * scale

        # Step 2: exact distance of Q_t from Q_∞ over the offsets
        offsets = self.offsets(8 if self.d == 1 else 2)
        labels = offset_labels(offsets)
        limit_q = limit.to_spectrum().position_covariance(offsets)
        distances = []
        for t in cfg.times:
            G = build_propagator(table, t).matrix
            q_t = G @ spectrum.matrix @ np.conj(np.swapaxes(G, -1, -2))
            exact = position_covariance(q_t, lattice, offsets)
            distances.append(float(np.abs(exact - limit_q).sum()))
        result.tables["exact_distance"] = pd.DataFrame({"t": cfg.times, "l1_distance": distances})
        # reference time: the earliest positive time when two or more are given
        k = 1 if len(positive) >= 2 and cfg.times[0] == 0 else 0
        first = distances[k]
        floor = IDENTITY_TOL * scale * len(offsets)
        contracted = distances[-1] <= max(0.25 * first, floor)
        result.verdicts.append(Verdict("exact_contraction", contracted, distances[-1], max(0.25 * first, floor),
                                       f"L1 distance {first:.4g} at t={cfg.times[k]:g}"))

        # Step 3: Monte Carlo estimates at each time against Q_∞
        sampler = HomogeneousSampler(spectrum, cfg.noise)
        samples = sample_many(sampler, cfg.seed, cfg.samples, self.workers)
        spread = [tuple([j * lattice.N // 8] + [0] * (self.d - 1)) for j in range(1, 8)]
        theory_frames, empirical_frames = [], []
        bounds = {}
        empirical_l1, empirical_noise = [], []
        final_samples: List[PhaseField] = samples
        for t in cfg.times:
            evolved = evolve_many(samples, build_propagator(table, t), self.workers)
            estimate = estimate_covariance(evolved, (0,) * self.d, offsets, extra_base_points=spread)
            # homogeneous input carries no ε; the bound table keys it as 1
            bounds[(1.0, t)] = estimate
            empirical_l1.append(float(np.abs(estimate.mean - limit_q).sum()))
            empirical_noise.append(float(estimate.stderr.sum()))
            quantity = f"covariance_t={t:g}"
            emp = estimate.to_dataframe(quantity)
            th = matrix_frame(quantity, labels, limit_q)
            empirical_frames.append(emp)
            theory_frames.append(th)
            if input_stationary or t == cfg.times[-1]:
                result.add_diff(f"covariance_t={t:g}", diff_frames(emp, th, cfg.sigma))
            final_samples = evolved
        result.tables["covariance_empirical"] = pd.concat(empirical_frames, ignore_index=True)
        result.tables["covariance_theory"] = pd.concat(theory_frames, ignore_index=True)
        result.tables["uniform_bound"] = uniform_bound_check(bounds, cfg.sigma).table
        result.tables["empirical_distance"] = pd.DataFrame(
            {"t": cfg.times, "l1_distance": empirical_l1, "l1_noise": empirical_noise})
        # below twice the summed standard error the distance is indistinguishable from zero
        allowed = max(0.25 * empirical_l1[k], 2.0 * empirical_noise[-1])
        result.verdicts.append(Verdict(
            "empirical_contraction", empirical_l1[-1] <= allowed, empirical_l1[-1], allowed,
            f"L1 distance {empirical_l1[k]:.4g} at t={cfg.times[k]:g}, noise {empirical_noise[-1]:.4g}",
        ))

        # Step 4: the a⊗a correlations vanish in the limit
        aa = aa_covariance(final_samples, table, offsets, mask_singular=True).to_dataframe("aa")
        result.tables["aa_empirical"] = aa
        result.add_diff("aa_vanishes", diff_frames(aa, _zeros_like_frame(aa), cfg.sigma))
        return result

    def green_decay(self) -> ExperimentResult:
        """Dispersive decay of the Green function away from the critical set"""
        cfg = self.cfg
        result = ExperimentResult(cfg.experiment.value)
        dynamics = self.settings.dynamics
        split_delta = cfg.split_delta if cfg.split_delta is not None else dynamics.split_delta
        diag = decay_diagnostic(self.table(), cfg.times, split_delta, dynamics.cone_margin,
                                self.settings.condition_tolerances())
        result.tables["green_decay"] = diag.to_dataframe()

        expected = cfg.expected_slope if cfg.expected_slope is not None else -self.d / 2
        gap = abs(diag.slope - expected)
        result.verdicts.append(Verdict(
            "decay_slope", gap <= cfg.slope_tolerance, diag.slope, expected,
            f"|slope - expected| = {gap:.3f}, tolerance {cfg.slope_tolerance}, fit stderr {diag.slope_stderr:.3f}",
        ))
        leak = diag.outside_ratio(dynamics.outside_cone_time)
        result.verdicts.append(Verdict(
            "outside_cone", leak < dynamics.outside_cone_threshold, leak, dynamics.outside_cone_threshold,
            f"cone speed {diag.cone_speed:.4g} near t={dynamics.outside_cone_time:g}",
        ))
        return result

    def _slow_samples(self, epsilon: float, noise: Optional[NoiseKind] = None
                      ) -> Tuple[DispersionTable, SlowFamilyConfig, List[PhaseField]]:
        slow = self.slow_config(epsilon, noise)
        table = self.table(self.side_for(epsilon))
        sampler = SlowFamilySampler(table.field, self.cfg.profile.build(), slow,
                                    local_table=self.table(slow.local_side))
        return table, slow, sample_many(sampler, self.cfg.seed, self.cfg.samples, self.workers)

    def kinetic_wigner(self) -> ExperimentResult:
        """Wigner matrices of slow families against the transported limit"""
        cfg = self.cfg
        result = ExperimentResult(cfg.experiment.value)
        profile = cfg.profile.build()
        taper = Taper(cfg.taper)
        rows = []
        for epsilon in cfg.epsilons:
            table, slow, samples = self._slow_samples(epsilon)
            unmasked = ~table.singular_mask.reshape(-1)
            for tau in cfg.taus:
                evolved = evolve_many(samples, build_propagator(table, tau / epsilon), self.workers)
                for r in cfg.positions:
                    estimate = wigner_estimate(evolved, table, tau, epsilon, r, y_max=cfg.y_max,
                                               taper=taper, mask_singular=True)
                    theory = smooth_wigner(projected_wigner(profile, table, tau, r), table.lattice,
                                           estimate.y_max, taper)
                    size, n = table.lattice.size, self.n
                    gap = np.abs(estimate.matrix - theory).reshape(size, n * n)[unmasked].sum(axis=-1)
                    noise = estimate.stderr.reshape(size, n * n)[unmasked].sum(axis=-1)
                    rows.append({
                        "epsilon": epsilon, "tau": tau, "r": ",".join(f"{c:g}" for c in r),
                        "N": table.lattice.N, "N_eps": slow.n_eps, "y_max": estimate.y_max,
                        "l1_distance": float(gap.mean()), "l1_noise": float(noise.mean()),
                    })
                    if epsilon == cfg.epsilons[-1]:
                        quantity = f"wigner_tau={tau:g}_r={rows[-1]['r']}"
                        labels = [str(k) for k in range(size)]
                        result.tables[f"wigner_empirical_tau={tau:g}_r={rows[-1]['r']}"] = estimate.to_dataframe(quantity)
                        result.tables[f"wigner_theory_tau={tau:g}_r={rows[-1]['r']}"] = matrix_frame(
                            quantity, labels, theory.reshape(size, n, n))
            del samples
        distances = pd.DataFrame(rows)
        result.tables["wigner_distance"] = distances

        for (tau, r), group in distances.groupby(["tau", "r"], sort=True):
            d = group.sort_values("epsilon", ascending=False)
            dist, noise = d["l1_distance"].to_numpy(), d["l1_noise"].to_numpy()
            # decrease up to one noise level of the finer estimate
            monotone = bool(np.all(dist[1:] <= dist[:-1] + noise[1:]))
            result.verdicts.append(Verdict(f"wigner_monotone_tau={tau:g}_r={r}", monotone, float(dist[-1]),
                                           float(dist[0]), f"distances {np.round(dist, 6).tolist()}"))
            result.verdicts.append(Verdict(f"wigner_noise_floor_tau={tau:g}_r={r}", dist[-1] < 2 * noise[-1],
                                           float(dist[-1]), float(2 * noise[-1]), f"ε={d['epsilon'].iloc[-1]:g}"))

        result.verdicts.extend(self._transport_verdicts(profile, result))
        return result

    def _transport_verdicts(self, profile, result: ExperimentResult) -> List[Verdict]:
        """Characteristic transport against the upwind oracle under macroscopic grid doubling"""
        cfg = self.cfg
        table = self.table()
        tau = cfg.taus[-1]
        cfl = self.settings.transport.cfl
        rows, verdicts = [], []
        for points in (cfg.macro_points, 2 * cfg.macro_points):
            grid = MacroGrid.cube(self.d, cfg.torus_scale, points)
            state = project_wigner(initial_wigner_on_grid(profile, table, grid), table, grid)
            exact = transport_evolve(state, tau)
            oracle = transport_pde_oracle(state, tau, cfl=cfl)
            before, after = state.total_trace(), exact.total_trace()
            rows.append({"points": points, "tau": tau, "l1_error": l1_distance(exact, oracle),
                         "trace_before": before, "trace_after": after})
            drift = abs(after - before)
            verdicts.append(Verdict(f"trace_conserved_M={points}", drift <= 1e-10 * max(1.0, abs(before)),
                                    drift, 1e-10 * max(1.0, abs(before))))
        result.tables["transport_convergence"] = pd.DataFrame(rows)
        coarse, fine = rows[0]["l1_error"], rows[1]["l1_error"]
        ratio = fine / coarse if coarse > 0 else 0.0
        verdicts.append(Verdict("transport_first_order", 0.4 <= ratio <= 0.6 or coarse == 0, ratio, 0.5,
                                f"errors {coarse:.4g} and {fine:.4g}"))
        return verdicts

    def local_stationarity(self) -> ExperimentResult:
        """Local covariances near ⌊r/ε⌋ against the local equilibrium q_{τ,r}"""
        cfg = self.cfg
        result = ExperimentResult(cfg.experiment.value)
        profile = cfg.profile.build()
        epsilon = cfg.epsilons[-1]
        table, _, samples = self._slow_samples(epsilon)
        lattice, n = table.lattice, self.n
        offsets = self.offsets(4)
        labels = offset_labels(offsets)
        emp_frames, th_frames = [], []
        for tau in cfg.taus:
            evolved = evolve_many(samples, build_propagator(table, tau / epsilon), self.workers)
            for r in cfg.positions:
                tag = f"tau={tau:g}_r={','.join(f'{c:g}' for c in r)}"
                local = local_covariance(profile, table, tau, r, atol=IDENTITY_TOL)
                x0 = tuple(int(c) for c in np.floor(np.asarray(r) / epsilon))

                # Theory identities: q¹¹ = V̂q⁰⁰ and q⁰¹ = -q¹⁰
                unmasked = ~table.singular_mask
                scale = max(1.0, float(np.abs(local.matrix).max()))
                vhat = table.omega_power(2)
                equi = np.abs(local.block(1, 1) - vhat @ local.block(0, 0))[unmasked].max()
                anti = np.abs(local.block(0, 1) + local.block(1, 0)).max()
                result.verdicts.append(Verdict(f"equipartition_theory_{tag}", equi <= IDENTITY_TOL * scale,
                                               float(equi), IDENTITY_TOL * scale))
                result.verdicts.append(Verdict(f"antisymmetry_theory_{tag}", anti <= IDENTITY_TOL * scale,
                                               float(anti), IDENTITY_TOL * scale))

                estimate = estimate_covariance(evolved, x0, offsets)
                emp = estimate.to_dataframe(f"local_{tag}")
                th = matrix_frame(f"local_{tag}", labels, local.position_covariance(offsets))
                emp_frames.append(emp)
                th_frames.append(th)
                result.add_diff(f"local_covariance_{tag}", diff_frames(emp, th, cfg.sigma))

                gap = equipartition_gap(evolved, table.field, x0, offsets).to_dataframe(f"equipartition_{tag}")
                result.add_diff(f"equipartition_empirical_{tag}", diff_frames(gap, _zeros_like_frame(gap), cfg.sigma))
                aa = aa_covariance(evolved, table, offsets, base_point=x0, mask_singular=True)
                aa_frame = aa.to_dataframe(f"aa_{tag}")
                result.add_diff(f"aa_vanishes_{tag}", diff_frames(aa_frame, _zeros_like_frame(aa_frame), cfg.sigma))
        result.tables["local_empirical"] = pd.concat(emp_frames, ignore_index=True)
        result.tables["local_theory"] = pd.concat(th_frames, ignore_index=True)
        logger.debug("Local stationarity on N=%d with n=%d", lattice.N, n)
        return result

    def gaussianization(self) -> ExperimentResult:
        """Fourth cumulants of non-Gaussian slow input vanish at macroscopic times"""
        cfg = self.cfg
        stats_section = self.settings.statistics
        result = ExperimentResult(cfg.experiment.value)
        if cfg.noise != NoiseKind.UNIFORM:
            logger.info("Gaussianization draws filtered uniform noise regardless of the configured noise")
        profile = cfg.profile.build()
        epsilon = cfg.epsilons[-1]
        table, _, samples = self._slow_samples(epsilon, NoiseKind.UNIFORM)
        lattice, n = table.lattice, self.n
        r = cfg.positions[0]
        x0 = tuple(int(c) for c in np.floor(np.asarray(r) / epsilon))
        spread = np.zeros(2 * n)
        spread[:n] = 1.0
        spread[n:] = 0.5
        probes = [
            point_probe(lattice, x0, 0, "v"),
            point_probe(lattice, x0, 0, "u"),
            local_probe(lattice, x0, {(0,) * self.d: spread, (1,) + (0,) * (self.d - 1): -spread}),
        ]
        probe_names = ["v_point", "u_point", "gradient"]

        def kurtosis_rows(fields: Sequence[PhaseField], t: float):
            results = fourth_cumulant_test(
                fields, probes, n_resamples=stats_section.bootstrap_resamples, seed=cfg.seed,
                min_samples=stats_section.min_kurtosis_samples,
            )
            return results, [
                {"t": t, "probe": probe_names[k.probe_index], "kurtosis": k.value, "stderr": k.stderr,
                 "ci_low": k.ci_low, "ci_high": k.ci_high, "z": k.z}
                for k in results
            ]

        initial, rows = kurtosis_rows(samples, 0.0)
        result.verdicts.append(Verdict("initial_non_gaussian", abs(initial[0].z) > 5.0, abs(initial[0].z), 5.0,
                                       f"probe {probe_names[0]} kurtosis {initial[0].value:.4f}"))
        char_rows = []
        for tau in cfg.taus:
            t = tau / epsilon
            evolved = evolve_many(samples, build_propagator(table, t), self.workers)
            late, more = kurtosis_rows(evolved, t)
            rows.extend(more)
            worst = max(abs(k.z) for k in late)
            result.verdicts.append(Verdict(f"gaussianized_tau={tau:g}", worst < cfg.sigma, worst, cfg.sigma))
            local = local_covariance(profile, table, tau, r, atol=IDENTITY_TOL)
            for name, probe in zip(probe_names, probes):
                char = characteristic_functional(evolved, probe, local.quadratic_form(probe))
                char_rows.append({"tau": tau, "probe": name, "empirical_real": char.empirical.real,
                                  "empirical_imag": char.empirical.imag, "theory": char.theory,
                                  "difference": char.difference, "stderr": char.stderr, "z": char.z})
                result.verdicts.append(Verdict(f"characteristic_{name}_tau={tau:g}", char.passed(cfg.sigma),
                                               char.z, cfg.sigma))
        result.tables["kurtosis"] = pd.DataFrame(rows)
        result.tables["characteristic"] = pd.DataFrame(char_rows)
        return result


@dataclass
class EquipartitionGap:
    """Ê[v(x₀+a)⊗v(x₀)] - Ê[(V*u)(x₀+a)⊗u(x₀)] per offset, arrays of shape (A, n, n)"""
    offsets: List[Tuple[int, ...]]
    mean: np.ndarray
    stderr: np.ndarray

    def to_dataframe(self, quantity: str) -> pd.DataFrame:
        return matrix_frame(quantity, offset_labels(self.offsets), self.mean, self.stderr)


def equipartition_gap(samples: Sequence[PhaseField], field: ForceField, base_point: Sequence[int],
                      offsets: Sequence[Sequence[int]]) -> EquipartitionGap:
    """Empirical check of kinetic/potential balance; zero in expectation at local equilibrium"""
    lattice = field.lattice
    n = lattice.n
    offsets = [tuple(int(c) for c in a) for a in offsets]
    # components stacked as (u, v, V*u)
    fields = np.stack([np.concatenate([Y.u, Y.v, field.apply(Y.u)], axis=-1) for Y in samples])
    products = pair_products(fields, lattice, [tuple(int(c) for c in base_point)], offsets)
    gap = products[..., n:2 * n, n:2 * n] - products[..., 2 * n:, :n]
    mean, se_re, se_im = mean_and_error(gap)
    return EquipartitionGap(offsets=offsets, mean=mean, stderr=np.hypot(se_re, se_im))


def run_experiment(cfg: ExperimentConfig, settings: Optional[LabSettings] = None) -> RunOutcome:
    """
    Run one experiment and write its CSV tables and manifest

    Args:
        cfg: Experiment configuration
        settings: Laboratory settings; defaults to built-in values

    Returns:
        RunOutcome; exit_code is 0 when every verdict passes and 1 otherwise

    Raises:
        ResourceLimitError: Estimated memory exceeds the configured cap; nothing is written
    """
    settings = settings or LabSettings()
    start = time.perf_counter()
    runner = ExperimentRunner(cfg, settings)
    runner.check_resources()
    result = runner.run()

    out_dir = Path(cfg.output_dir) / cfg.experiment.value
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, frame in sorted(result.tables.items()):
        write_table(frame, out_dir / f"{name}.csv", settings.output.float_format)
    manifest = write_manifest(
        out_dir,
        experiment=cfg.experiment.value,
        config=cfg.model_dump(mode="json"),
        verdicts={v.name: v.to_dict() for v in result.verdicts},
        wall_time_s=time.perf_counter() - start,
    )
    logger.info("%s: %s, outputs in %s", cfg.experiment.value, "pass" if result.passed else "fail", out_dir)
    return RunOutcome(result=result, manifest=manifest, out_dir=out_dir)
