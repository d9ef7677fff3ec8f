"""Tests for limit covariances, Wigner transport and local stationarity"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import CFLError, SingularModeError
from src.estimators import point_probe
from src.kinetics import (
    MacroGrid,
    homogeneous_wigner,
    initial_wigner,
    initial_wigner_on_grid,
    l1_distance,
    limit_covariance,
    local_covariance,
    project_wigner,
    projected_wigner,
    quadratic_form,
    stationarity_check,
    transport_evolve,
    transport_pde_oracle,
)
from src.lattice import LatticeSpec, build_dispersion_table, build_nn_force_field
from src.sampling import (
    HomogeneousSpectrum,
    build_profile,
    gibbs_matrix,
    gibbs_spectrum,
    nonequilibrium_spectrum,
    thermal_gradient_profile,
    wave_packet_profile,
)


def make_table(N=64, gammas=(1.0,), masses=(1.0,)):
    lattice = LatticeSpec(d=1, n=len(gammas), N=N)
    return build_dispersion_table(build_nn_force_field(lattice, gammas, masses))


@pytest.mark.parametrize("gammas,masses", [((1.0,), (1.0,)), ((1.0, 2.0), (1.0, 0.5))])
def test_gibbs_is_a_fixed_point(gammas, masses):
    table = make_table(gammas=gammas, masses=masses)
    spectrum = gibbs_spectrum(table, 1.5)
    limit = limit_covariance(spectrum, table)
    assert np.allclose(limit.matrix, spectrum.matrix, atol=1e-10)
    assert limit.masked_fraction == 0.0
    assert stationarity_check(spectrum, table, 3.3) < 1e-9


def test_limit_is_stationary():
    table = make_table(gammas=(1.0, 2.0), masses=(1.0, 0.5))
    spectrum = nonequilibrium_spectrum(table, 1.0, 2.0)
    assert stationarity_check(spectrum, table, 1.3) > 1e-3
    limit = limit_covariance(spectrum, table)
    for t in (1.0, 7.3, 50.0):
        assert stationarity_check(limit, table, t) < 1e-8
    limit.to_spectrum().validate()


def test_limit_equipartition():
    """Velocity block equals V̂ times the displacement block in the limit"""
    table = make_table()
    limit = limit_covariance(nonequilibrium_spectrum(table, 1.0, 3.0), table)
    assert np.allclose(limit.block(1, 1), table.vhat @ limit.block(0, 0), atol=1e-10)
    assert np.allclose(limit.block(0, 1), -limit.block(1, 0), atol=1e-10)


def test_limit_with_singular_modes():
    table = make_table(masses=(0.0,))
    lattice = table.lattice
    spectrum = nonequilibrium_spectrum(make_table(), 1.0, 2.0)
    with pytest.raises(SingularModeError):
        limit_covariance(spectrum, table, mask_singular=False)
    limit = limit_covariance(spectrum, table)
    assert limit.masked_fraction == pytest.approx(1 / lattice.N)
    assert np.all(limit.matrix[0] == 0)


def test_homogeneous_wigner_of_gibbs():
    table = make_table()
    W = homogeneous_wigner(gibbs_spectrum(table, 2.0), table)
    assert np.allclose(W, 2.0 * table.omega_power(-1), atol=1e-10)


def test_quadratic_form_of_point_probe():
    table = make_table(N=32)
    spectrum = gibbs_spectrum(table)
    probe = point_probe(table.lattice, (5,), kind="u")
    expected = spectrum.position_covariance([(0,)])[0, 0, 0].real
    assert quadratic_form(spectrum.matrix, table.lattice, probe) == pytest.approx(expected)


@pytest.mark.parametrize("kind,params", [
    ("thermal-gradient", {"center": [0.0], "width": 2.0}),
    ("wave-packet", {"center": [0.0], "width": 2.0}),
    ("step", {"interface": 0.3}),
])
@pytest.mark.parametrize("tau", [0.0, 0.5, 2.0])
def test_local_covariance_constructions_agree(kind, params, tau):
    table = make_table(gammas=(1.0, 2.0), masses=(1.0, 0.5))
    profile = build_profile(kind, params)
    for r in ([-1.0], [0.0], [1.5]):
        local = local_covariance(profile, table, tau, r)
        scale = max(1.0, float(np.abs(local.matrix).max()))
        assert local.max_discrepancy <= 1e-8 * scale


def test_local_covariance_at_time_zero_is_local_gibbs():
    table = make_table()
    profile = thermal_gradient_profile(1.0, 0.5, center=(0.0,), width=1.0)
    r = (0.4,)
    local = local_covariance(profile, table, 0.0, r)
    assert np.allclose(local.matrix, profile(r, table), atol=1e-10)


def test_local_covariance_structure():
    table = make_table()
    local = local_covariance(wave_packet_profile(center=(0.0,), width=1.0), table, 1.0, (0.5,))
    assert np.allclose(local.block(1, 1), table.vhat @ local.block(0, 0), atol=1e-10)
    assert np.allclose(local.block(0, 1), -local.block(1, 0), atol=1e-10)
    probe = point_probe(table.lattice, (0,), kind="v")
    assert local.quadratic_form(probe) >= 0


def test_projected_wigner_at_time_zero():
    table = make_table(gammas=(1.0, 2.0), masses=(1.0, 0.5))
    profile = wave_packet_profile(center=(0.0,), width=1.0)
    W0 = initial_wigner(profile, table, (0.2,))
    assert np.allclose(projected_wigner(profile, table, 0.0, (0.2,)), table.project(W0), atol=1e-12)


def test_macro_grid():
    grid = MacroGrid.cube(1, 2.0, 8, origin=-1.0)
    assert grid.shape == (8,)
    assert grid.cell_volume == pytest.approx(0.25)
    assert grid.coordinates()[0, 0] == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        MacroGrid((1.0,), (1,))


def _transport_state(points=32, length=8.0):
    table = make_table(N=32)
    grid = MacroGrid.cube(1, length, points)
    profile = thermal_gradient_profile(1.0, 0.5, center=(length / 2,), width=0.5)
    return profile, table, grid, project_wigner(initial_wigner_on_grid(profile, table, grid), table, grid)


def test_transport_conserves_trace():
    _, _, _, state = _transport_state()
    moved = transport_evolve(state, 0.37)
    assert moved.tau == pytest.approx(0.37)
    assert moved.total_trace() == pytest.approx(state.total_trace(), rel=1e-10)
    assert l1_distance(transport_evolve(state, 0.0), state) == 0.0


def test_pde_oracle_rejects_large_cfl():
    _, _, _, state = _transport_state()
    with pytest.raises(CFLError):
        transport_pde_oracle(state, 1.0, cfl=1.0)


@pytest.mark.slow
def test_pde_oracle_is_first_order():
    """Halving the macroscopic spacing halves the upwind error"""
    errors = []
    for points in (200, 400):
        profile, table, grid, state = _transport_state(points=points)
        tau = 1.0
        numeric = transport_pde_oracle(state, tau, cfl=0.5)
        exact = np.stack([projected_wigner(profile, table, tau, r) for r in grid.coordinates()])
        errors.append(l1_distance(numeric, project_wigner(exact, table, grid)))
        assert numeric.total_trace() == pytest.approx(state.total_trace(), rel=1e-10)
    assert 0.4 <= errors[1] / errors[0] <= 0.6


def test_gibbs_profile_matrix_matches_spectrum():
    table = make_table()
    assert np.allclose(gibbs_spectrum(table, 1.0).matrix, gibbs_matrix(table, 1.0))


def test_limit_of_displacement_only_density():
    """q̂⁰⁰ = g alone relaxes to g/2 in u and ω²g/2 in v"""
    table = make_table()
    theta = 2 * np.pi * np.arange(64) / 64
    g = 1.0 + 0.5 * np.cos(theta)
    matrix = np.zeros((64, 2, 2), dtype=complex)
    matrix[:, 0, 0] = g
    limit = limit_covariance(HomogeneousSpectrum(table.lattice, matrix), table)
    omega = table.omega[:, 0]
    assert np.allclose(limit.block(0, 0)[:, 0, 0], g / 2, atol=1e-12)
    assert np.allclose(limit.block(1, 1)[:, 0, 0], omega ** 2 * g / 2, atol=1e-12)
    assert np.allclose(limit.block(0, 1), 0.0, atol=1e-12)
    assert np.allclose(limit.block(1, 0), 0.0, atol=1e-12)


def test_transport_steps_compose():
    """Two interpolation steps stay within twice the error of one"""
    profile, table, grid, state = _transport_state(points=64)
    tau1, tau2 = 0.3, 0.45
    composed = transport_evolve(transport_evolve(state, tau1), tau2)
    direct = transport_evolve(state, tau1 + tau2)
    assert composed.tau == pytest.approx(direct.tau)
    exact = np.stack([projected_wigner(profile, table, tau1 + tau2, r) for r in grid.coordinates()])
    single_error = l1_distance(direct, project_wigner(exact, table, grid))
    assert 0 < l1_distance(composed, direct) < 2 * single_error
