"""Tests for spectral densities, slow profiles and samplers"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import DivisibilityError, ProfileError, SpectrumError
from src.lattice import LatticeSpec, build_dispersion_table, build_nn_force_field
from src.sampling import (
    HomogeneousSampler,
    HomogeneousSpectrum,
    NoiseKind,
    SlowFamilyConfig,
    SlowFamilySampler,
    TabulatedProfile,
    build_profile,
    build_spectrum,
    derive_seed,
    gibbs_matrix,
    gibbs_spectrum,
    sample_homogeneous,
    sample_many,
    sample_slow_family,
    step_profile,
    thermal_gradient_profile,
    validate_profile,
    wave_packet_profile,
    white_spectrum,
)
from src.sampling.samplers import check_profile_matrix, white_noise


def make_field(d=1, N=64, gammas=(1.0,), masses=(1.0,)):
    return build_nn_force_field(LatticeSpec(d=d, n=len(gammas), N=N), gammas, masses)


def make_table(**kwargs):
    return build_dispersion_table(make_field(**kwargs))


@pytest.mark.parametrize("kind", ["gibbs", "nonequilibrium", "white"])
def test_stock_spectra_are_valid(kind):
    table = make_table(gammas=(1.0, 2.0), masses=(1.0, 0.5))
    spectrum = build_spectrum(kind, table)
    spectrum.validate()
    assert spectrum.matrix.shape == (64, 4, 4)


def test_wave_packet_spectrum_is_valid():
    table = make_table()
    profile = wave_packet_profile(theta0=(np.pi / 2,), spectral_width=0.3)
    HomogeneousSpectrum(table.lattice, profile((0.0,), table)).validate()


def test_unknown_spectrum_kind():
    with pytest.raises(ValueError):
        build_spectrum("lorentzian", make_table())


def test_non_psd_spectrum_rejected():
    lattice = LatticeSpec(d=1, n=1, N=16)
    with pytest.raises(SpectrumError):
        white_spectrum(lattice, scale=-1.0).validate()


def test_spectrum_trace_density():
    lattice = LatticeSpec(d=1, n=2, N=16)
    assert np.isclose(white_spectrum(lattice, 0.5).energy_density(), 2.0)


def test_derive_seed():
    assert derive_seed(5, 3) == 6
    with pytest.raises(ValueError):
        derive_seed(-1, 0)


@given(seed=st.integers(min_value=0, max_value=2 ** 64 - 1))
def test_derived_seeds_are_distinct(seed):
    assert len({derive_seed(seed, i) for i in range(16)}) == 16


def test_uniform_noise_has_unit_variance():
    noise = white_noise(np.random.default_rng(0), (200000,), NoiseKind.UNIFORM)
    assert abs(noise.var() - 1.0) < 0.02
    assert np.abs(noise).max() <= np.sqrt(3.0)


def test_sampler_is_deterministic():
    sampler = HomogeneousSampler(gibbs_spectrum(make_table()))
    first = sampler.sample(42)
    again = sampler.sample(42)
    other = sampler.sample(43)
    assert np.array_equal(first.stacked(), again.stacked())
    assert not np.array_equal(first.stacked(), other.stacked())


def test_sample_many_independent_of_workers():
    sampler = HomogeneousSampler(gibbs_spectrum(make_table()))
    serial = sample_many(sampler, seed=7, count=6, max_workers=1)
    threaded = sample_many(sampler, seed=7, count=6, max_workers=4)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.stacked(), b.stacked())


def test_white_spectrum_reproduces_noise():
    """Coloring by the identity leaves uniform noise uniform"""
    lattice = LatticeSpec(d=1, n=1, N=16)
    Y = HomogeneousSampler(white_spectrum(lattice), NoiseKind.UNIFORM).sample(0)
    assert np.abs(Y.stacked()).max() <= np.sqrt(3.0) + 1e-9


def test_slow_family_block_sizes():
    cfg = SlowFamilyConfig(epsilon=1 / 64)
    assert cfg.n_eps == 24
    assert cfg.local_side == 96
    with pytest.raises(ValueError):
        SlowFamilyConfig(epsilon=1.5)
    with pytest.raises(ValueError):
        SlowFamilyConfig(epsilon=0.1, beta=0.4)


def test_slow_family_divisibility():
    profile = thermal_gradient_profile(center=(0.5,), width=0.2)
    with pytest.raises(DivisibilityError):
        SlowFamilySampler(make_field(N=64), profile, SlowFamilyConfig(epsilon=1 / 64))


def test_slow_family_sampler_blocks():
    field = make_field(N=96)
    profile = thermal_gradient_profile(center=(0.75,), width=0.3)
    sampler = SlowFamilySampler(field, profile, SlowFamilyConfig(epsilon=1 / 64))
    assert len(sampler.cube_corners()) == 4
    assert sampler.cube_of((50,)) == (2,)
    assert np.allclose(sampler.cube_center((0,)), [12 / 64])
    Y = sampler.sample(1)
    assert Y.u.shape == (96, 1)
    assert np.array_equal(Y.stacked(), sampler.sample(1).stacked())


def test_check_profile_matrix_rejects_negative():
    matrix = np.zeros((16, 2, 2), dtype=complex)
    matrix[..., 0, 0] = -1.0
    with pytest.raises(ProfileError):
        check_profile_matrix(matrix, 1, (0.0,))


def test_tabulated_profile_interpolates():
    table = make_table()
    values = np.stack([gibbs_matrix(table, 1.0), gibbs_matrix(table, 3.0)])
    profile = TabulatedProfile("table", [[0.0, 1.0]], values)
    assert np.allclose(profile((0.5,), table), gibbs_matrix(table, 2.0))
    # clamped outside the table
    assert np.allclose(profile((5.0,), table), gibbs_matrix(table, 3.0))


@pytest.mark.parametrize("kind,params", [
    ("thermal-gradient", {"center": [0.0], "width": 2.0}),
    ("wave-packet", {"center": [0.0], "width": 2.0}),
    ("step", {"interface": 0.3}),
])
def test_stock_profiles_validate(kind, params):
    table = make_table()
    report = validate_profile(build_profile(kind, params), [[-1.0], [0.0], [1.5]], table)
    assert report.passed, report.failures
    assert report.decay_exponent > 1


def test_step_profile_gradient_bound():
    table = make_table()
    report = validate_profile(step_profile(1.0, 2.0, 0.0), [[0.0]], table, gradient_bound=10.0)
    assert report.i2_passed and report.i3_passed
    assert not report.i4_passed
    assert not report.passed
    assert report.failures[-1]["check"] == "I4"


def test_unknown_profile_kind():
    with pytest.raises(ValueError):
        build_profile("spiral")


def test_single_sample_helpers_match_samplers():
    """One-shot helpers draw sample 0 of the seeded stream"""
    table = build_dispersion_table(make_field(N=32))
    spectrum = gibbs_spectrum(table)
    Y = sample_homogeneous(spectrum, 21)
    assert np.array_equal(Y.stacked(), sample_many(HomogeneousSampler(spectrum), 21, 1)[0].stacked())

    field = make_field(N=96)
    profile = thermal_gradient_profile(center=(0.75,), width=0.3)
    cfg = SlowFamilyConfig(epsilon=1 / 64)
    slow = sample_slow_family(field, profile, cfg, 4)
    expected = SlowFamilySampler(field, profile, cfg).sample(derive_seed(4, 0))
    assert np.array_equal(slow.stacked(), expected.stacked())


def _step_sampler():
    # cubes of side 24 centred at r = 12/64, 36/64, 60/64, 84/64; the first two lie left of 0.75
    profile = step_profile(1.0, 2.0, interface=0.75)
    return SlowFamilySampler(make_field(N=96), profile, SlowFamilyConfig(epsilon=1 / 64))


def test_slow_family_cubes_are_independent():
    sampler = _step_sampler()
    samples = np.stack([Y.stacked() for Y in sample_many(sampler, 8, 400)])
    # last site of the first cube against the first site of the second
    products = samples[:, 23, :, None] * samples[:, 24, None, :]
    mean = products.mean(axis=0)
    stderr = products.std(axis=0, ddof=1) / np.sqrt(len(samples))
    assert np.all(np.abs(mean) <= 4 * stderr)
    # neighbours inside one cube stay correlated
    inside = samples[:, 22, 0] * samples[:, 23, 0]
    assert inside.mean() > 4 * inside.std(ddof=1) / np.sqrt(len(samples))


def test_step_profile_variances_on_each_side():
    sampler = _step_sampler()
    samples = np.stack([Y.stacked() for Y in sample_many(sampler, 9, 400)])
    local = np.mean(gibbs_matrix(sampler.local_table, 1.0), axis=0).real
    for sites, temperature in ((slice(0, 48), 1.0), (slice(48, 96), 2.0)):
        per_sample = (samples[:, sites, :] ** 2).mean(axis=1)
        mean = per_sample.mean(axis=0)
        stderr = per_sample.std(axis=0, ddof=1) / np.sqrt(len(samples))
        expected = temperature * np.diag(local)
        assert np.all(np.abs(mean - expected) <= 4 * stderr)


def test_validate_profile_flags_non_adjoint_cross_blocks():
    table = make_table()
    bad = gibbs_matrix(table, 1.0).copy()
    bad[..., 0, 1] = 0.5
    values = np.stack([bad, bad])
    report = validate_profile(TabulatedProfile("skewed", [[0.0, 1.0]], values), [[0.5]], table)
    assert not report.i2_passed
    assert not report.passed
    assert report.failures[0]["check"] == "I2"
