"""Tests for force fields, dispersion tables and model conditions"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import ModelInvalidError
from src.lattice import (
    ConditionStatus,
    ForceField,
    LatticeSpec,
    build_dispersion_table,
    build_nn_force_field,
    critical_set_mask,
    dual_grid,
    from_fourier,
    offset_box,
    reflect,
    to_fourier,
    validate_conditions,
)
from src.lattice.force_field import fourier_symbol, nn_dispersion, nn_group_velocity


def nn_table(d=1, N=256, gammas=(1.0,), masses=(1.0,)):
    lattice = LatticeSpec(d=d, n=len(gammas), N=N)
    return build_dispersion_table(build_nn_force_field(lattice, gammas, masses))


def test_lattice_spec_rejects_odd_side():
    """Torus side must be even"""
    with pytest.raises(ValueError):
        LatticeSpec(d=1, n=1, N=15)


def test_fourier_round_trip_and_convention():
    """f̂(θ) = Σ_x e^{iθx} f(x) and from_fourier inverts it"""
    lattice = LatticeSpec(d=1, n=1, N=16)
    delta = np.zeros((16, 1))
    delta[1] = 1.0
    theta = dual_grid(lattice)[..., 0]
    assert np.allclose(to_fourier(delta, 1)[:, 0], np.exp(1j * theta))

    values = np.random.default_rng(0).standard_normal((16, 16, 2))
    assert np.allclose(from_fourier(to_fourier(values, 2), 2), values)


def test_reflect_maps_theta_to_minus_theta():
    """reflect evaluates grid arrays at -θ"""
    lattice = LatticeSpec(d=1, n=1, N=8)
    theta = dual_grid(lattice)[..., 0]
    mirrored = reflect(np.sin(theta), 1)
    assert np.allclose(mirrored, -np.sin(theta), atol=1e-12)


def test_offset_box_size():
    assert len(offset_box(2, 1)) == 9
    assert offset_box(1, 2)[0] == (-2,)


def test_uneven_force_field_rejected():
    """E2 is checked exactly at construction"""
    lattice = LatticeSpec(d=1, n=1, N=16)
    with pytest.raises(ModelInvalidError):
        ForceField(lattice, {(0,): [[2.0]], (1,): [[-1.0]]})


def test_aliasing_offset_rejected():
    lattice = LatticeSpec(d=1, n=1, N=8)
    with pytest.raises(ValueError):
        ForceField(lattice, {(0,): [[2.0]], (4,): [[-1.0]], (-4,): [[-1.0]]})


def test_negative_symbol_rejected():
    """E3 violation carries a witness index"""
    lattice = LatticeSpec(d=1, n=1, N=16)
    field = ForceField(lattice, {(0,): [[-1.0]]})
    with pytest.raises(ModelInvalidError) as info:
        build_dispersion_table(field)
    assert info.value.witness is not None


def test_force_field_dict_round_trip():
    lattice = LatticeSpec(d=2, n=1, N=16)
    field = build_nn_force_field(lattice, [1.5], [0.5])
    restored = ForceField.from_dict(json.loads(field.to_json()))
    assert np.allclose(restored.symbol_on_grid(), field.symbol_on_grid())


def test_fourier_symbol_matches_grid():
    lattice = LatticeSpec(d=1, n=1, N=32)
    field = build_nn_force_field(lattice, [1.0], [1.0])
    theta = dual_grid(lattice)
    grid = field.symbol_on_grid()
    assert np.allclose(fourier_symbol(field, theta[5]), grid[5])
    with pytest.raises(ValueError):
        fourier_symbol(field, [7.0])


def test_apply_matches_symbol():
    """Real-space stencil and Fourier multiplication agree"""
    lattice = LatticeSpec(d=2, n=1, N=16)
    field = build_nn_force_field(lattice, [1.0], [0.7])
    u = np.random.default_rng(1).standard_normal(lattice.shape + (1,))
    via_fourier = from_fourier(np.einsum("...ij,...j->...i", field.symbol_on_grid(), to_fourier(u, 2)), 2)
    assert np.allclose(field.apply(u), via_fourier.real, atol=1e-10)


def test_scalar_dispersion_matches_closed_form():
    table = nn_table()
    theta = dual_grid(table.lattice)
    assert np.allclose(table.omega[..., 0], nn_dispersion(theta, 1.0, 1.0), atol=1e-10)
    # central differences are second order in the grid spacing
    assert np.allclose(table.velocities[..., 0, :], nn_group_velocity(theta, 1.0, 1.0), atol=1e-3)


@pytest.mark.parametrize("d,N,gammas,masses", [
    (1, 256, (1.0,), (1.0,)),
    (1, 256, (1.0, 2.0), (1.0, 0.5)),
    (2, 128, (1.0,), (1.0,)),
    (2, 32, (1.0, 3.0), (0.2, 1.0)),
])
def test_spectral_algebra(d, N, gammas, masses):
    """Ω² = V̂, complete orthogonal projections and even bands"""
    table = nn_table(d, N, gammas, masses)
    assert np.allclose(table.omega_power(2), table.vhat, atol=1e-10)

    index = (3,) * d
    projections = table.projections(index)
    n = len(gammas)
    assert np.allclose(sum(projections), np.eye(n), atol=1e-10)
    for P in projections:
        assert np.allclose(P @ P, P, atol=1e-10)
    if len(projections) > 1:
        assert np.allclose(projections[0] @ projections[1], 0.0, atol=1e-10)

    assert np.allclose(reflect(table.omega, d), table.omega, atol=1e-10)


def test_c_matrix_squares_to_minus_identity():
    table = nn_table(N=64)
    C = table.c_matrix()
    assert np.allclose(C @ C, -np.eye(2), atol=1e-10)


def test_massless_model_has_one_singular_point():
    table = nn_table(N=64, masses=(0.0,))
    assert int(table.singular_mask.sum()) == 1
    assert table.singular_mask[0]
    # negative powers vanish on singular bands
    assert table.omega_power(-1)[0, 0, 0] == 0.0


def test_validate_conditions_report():
    lattice = LatticeSpec(d=1, n=1, N=128)
    field = build_nn_force_field(lattice, [1.0], [1.0])
    report = validate_conditions(field, build_dispersion_table(field))
    assert report.status("E1") == ConditionStatus.PASS
    assert report.status("E2") == ConditionStatus.PASS
    assert report.status("E3") == ConditionStatus.PASS
    assert not report.hard_failure
    data = json.loads(report.to_json())
    assert set(data["conditions"]) >= {"E1", "E2", "E3", "E4", "E5", "E6"}


@settings(max_examples=20, deadline=None)
@given(
    gamma=st.floats(min_value=0.1, max_value=5.0),
    mass=st.floats(min_value=0.1, max_value=3.0),
)
def test_square_root_property(gamma, mass):
    """Ω^{1/2} Ω^{1/2} = Ω for any massive nearest-neighbour model"""
    table = nn_table(N=16, gammas=(gamma,), masses=(mass,))
    half = table.omega_power(0.5)
    assert np.allclose(half @ half, table.omega_power(1), atol=1e-10)


def test_critical_set_mask_grows_with_delta():
    table = nn_table(N=64, masses=(0.0,))
    narrow = critical_set_mask(table, 0.05)
    wide = critical_set_mask(table, 0.5)
    # the zero mode at θ = 0 is always critical
    assert narrow[0]
    assert np.all(wide[narrow])
    assert wide.sum() > narrow.sum()
    with pytest.raises(ValueError):
        critical_set_mask(table, 0.0)


@pytest.mark.parametrize("d,N,mass,expected", [
    (1, 256, 0.0, ConditionStatus.FAIL),
    (3, 32, 0.0, ConditionStatus.PASS),
    (1, 256, 1.0, ConditionStatus.PASS),
])
def test_inverse_symbol_integrability(d, N, mass, expected):
    """‖V̂⁻¹‖ is integrable for massless models only from three dimensions on"""
    table = nn_table(d=d, N=N, masses=(mass,))
    report = validate_conditions(table.field, table)
    assert report.status("E6") == expected


def test_group_velocity_is_second_order():
    """Central differences for ∇ω converge at rate two under grid doubling"""
    errors = []
    for N in (64, 128):
        table = nn_table(N=N)
        exact = nn_group_velocity(dual_grid(table.lattice), 1.0, 1.0)
        errors.append(float(np.max(np.abs(table.velocities[..., 0, :] - exact))))
    assert np.log2(errors[0] / errors[1]) >= 1.9


def test_nearest_neighbour_entries_one_dimension():
    field = build_nn_force_field(LatticeSpec(d=1, n=1, N=16), [1.0], [0.0])
    assert np.allclose(field.entries[(0,)], [[2.0]])
    assert np.allclose(field.entries[(1,)], [[-1.0]])
    assert np.allclose(field.entries[(-1,)], [[-1.0]])
    assert len(field.entries) == 3


def test_nearest_neighbour_entries_two_dimensions():
    field = build_nn_force_field(LatticeSpec(d=2, n=1, N=16), [1.0], [1.0])
    assert np.allclose(field.entries[(0, 0)], [[5.0]])
    for offset in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
        assert np.allclose(field.entries[offset], [[-1.0]])
    assert len(field.entries) == 5


def test_nearest_neighbour_entries_two_components():
    field = build_nn_force_field(LatticeSpec(d=1, n=2, N=16), [1.0, 2.0], [0.0, 3.0])
    assert np.allclose(field.entries[(0,)], np.diag([2.0, 13.0]))
    assert np.allclose(field.entries[(1,)], np.diag([-1.0, -2.0]))
    assert np.allclose(field.entries[(-1,)], np.diag([-1.0, -2.0]))
