#!/usr/bin/env python3
"""
Tests for the entropy diagnostics: Hessian and concavity, densities,
heat capacities, zero sets, third-law classification and leaves
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_analyzer import (
    INCONCLUSIVE,
    PLANCK_COMPLIANT,
    PLANCK_VIOLATING,
    POSITIVITY_VIOLATING,
    Ray,
    approach_path,
    concavity_conditions,
    decomposition_residual,
    density_identity_errors,
    eigen_signature,
    entropy_hessian,
    fiber_point,
    heat_capacity_along_curve,
    heat_capacity_along_path,
    heat_capacity_constant_extensives,
    leaf_profile,
    leaf_solution,
    leaf_solve,
    mayer_lie_residuals,
    pressure_positivity_scan,
    radial_leaf_crossings,
    reduce_closed_system,
    reduce_to_densities,
    third_law_classify,
    zero_set_scan,
)
from entropy_reconstructor import EntropyField, PathSpec
from expression_parser import parse
from model_catalog import ideal_gas, nonintegrable_example, photon_gas, planck_violator, shifted_photon_gas
from pfaffian_forms import ThermoModel, sample_grid
from thermo_errors import NoSolutionError, PathCornerError, PathError, UnsupportedModelError


@pytest.fixture(scope="module")
def photon():
    return EntropyField(photon_gas())


@pytest.fixture(scope="module")
def ideal():
    return EntropyField(ideal_gas())


# ---------------------------------------------------------------------------
# Hessian and concavity
# ---------------------------------------------------------------------------

def test_photon_gas_hessian(photon):
    report = entropy_hessian(photon, (1.0, 1.0))
    np.testing.assert_allclose(report.matrix, [[-3 / 16, 3 / 16], [3 / 16, -3 / 16]], atol=1e-12)
    assert report.determinant == pytest.approx(0.0, abs=1e-12)
    assert report.minor_signs == (-1, 0)
    assert report.verdict == "concave"
    assert report.passed
    assert report.cross_check_passed
    assert eigen_signature(report) == (1, 1, 0)


def test_ideal_gas_hessian_is_concave_with_radial_kernel(ideal):
    report = entropy_hessian(ideal, (1.0, 1.0, 1.0))
    np.testing.assert_allclose(report.matrix, [[-1.5, 0.0, 1.5], [0.0, -1.0, 1.0], [1.5, 1.0, -2.5]],
                               atol=1e-10)
    assert report.minor_signs == (-1, 1, 0)
    assert report.radial_form == pytest.approx(0.0, abs=1e-10)
    assert report.passed
    assert report.gradient[0] == pytest.approx(1.5, rel=1e-12)


def test_convex_entropy_is_not_concave():
    model = ThermoModel("convex", ("U", "V"), parse("-U/(3*V)"), reference=(1.0, 1.0))
    report = entropy_hessian(EntropyField(model), (1.0, 1.0))
    assert report.verdict == "not concave"
    assert report.minor_signs[0] == 1
    assert report.matrix[0, 0] == pytest.approx(0.75, rel=1e-9)


def test_ideal_gas_concavity_inequalities(ideal):
    report = concavity_conditions(ideal, (1.0, 1.0, 1.0))
    assert report.method == "inequalities"
    assert report.conditions["one_minus_df_dU"] == pytest.approx(-5.0 / 3.0, rel=1e-12)
    assert report.conditions["two_by_two_minor"] == pytest.approx(50.0 / 27.0, rel=1e-12)
    assert report.passed


def test_two_coordinate_concavity_uses_minors(photon):
    report = concavity_conditions(photon, (2.0, 3.0))
    assert report.method == "minors"
    assert set(report.conditions) == {"minor_1", "minor_2"}
    assert report.passed


STATE = st.floats(min_value=0.2, max_value=20.0, allow_nan=False, allow_infinity=False)
RATIO = st.floats(min_value=1.0, max_value=2.0, allow_nan=False, allow_infinity=False)


@given(STATE, STATE)
@settings(max_examples=10, deadline=None)
def test_photon_gas_hessian_at_random_states(u, v):
    report = entropy_hessian(EntropyField(photon_gas()), (u, v))
    expected = 3.0 / 16.0 * np.array([[-u ** -1.25 * v ** 0.25, u ** -0.25 * v ** -0.75],
                                      [u ** -0.25 * v ** -0.75, -u ** 0.75 * v ** -1.75]])
    np.testing.assert_allclose(report.matrix, expected, rtol=1e-7, atol=1e-12)


@given(RATIO, RATIO, st.floats(min_value=0.8, max_value=1.2))
@settings(max_examples=10, deadline=None)
def test_ideal_gas_hessian_at_random_states(a, b, n):
    u, v = a * n, b * n
    report = entropy_hessian(EntropyField(ideal_gas()), (u, v, n))
    expected = [[-1.5 * n / u ** 2, 0.0, 1.5 / u],
                [0.0, -n / v ** 2, 1.0 / v],
                [1.5 / u, 1.0 / v, -2.5 / n]]
    np.testing.assert_allclose(report.matrix, expected, rtol=1e-7, atol=1e-10)


# ---------------------------------------------------------------------------
# Densities and closed systems
# ---------------------------------------------------------------------------

def test_density_reduction_reproduces_the_entropy(ideal):
    density = reduce_to_densities(ideal.model)
    assert density.names == ("u", "n")
    assert density.reference == (1.0, 1.0)
    points = [(2.0, 1.5, 1.2), (1.0, 2.0, 1.0), (3.0, 2.0, 1.5)]
    assert max(density_identity_errors(density, ideal, points)) <= 1e-8
    np.testing.assert_allclose(density.densities((2.0, 4.0, 1.0)), [0.5, 0.25])


def test_density_decomposition_of_the_heat_form(ideal):
    density = reduce_to_densities(ideal.model)
    for direction in [(1.0, 0.0, 0.0), (0.3, -0.2, 0.5), (0.0, 1.0, 1.0)]:
        assert decomposition_residual(density, (2.0, 1.5, 1.2), direction) <= 1e-10


def test_photon_gas_density_is_one_dimensional(photon):
    density = reduce_to_densities(photon.model)
    assert density.names == ("u",)
    assert density.entropy((16.0, 2.0)) == pytest.approx(photon.model.analytic_entropy_at((16.0, 2.0)),
                                                          rel=1e-9)


def test_closed_system_per_particle_entropy(ideal):
    closed = reduce_closed_system(ideal.model)
    assert closed.particles == "N"
    assert closed.reference == (1.0, 1.0)
    for point in [(2.0, 1.5, 1.2), (3.0, 2.0, 1.5)]:
        assert closed.entropy(point) == pytest.approx(ideal.model.analytic_entropy_at(point), rel=1e-9)


def test_closed_system_needs_three_coordinates_and_a_temperature():
    with pytest.raises(UnsupportedModelError):
        reduce_closed_system(photon_gas())
    with pytest.raises(UnsupportedModelError):
        reduce_closed_system(nonintegrable_example())


# ---------------------------------------------------------------------------
# Heat capacities
# ---------------------------------------------------------------------------

def test_heat_capacity_at_constant_volume(photon):
    report = heat_capacity_constant_extensives(photon, (16.0, 1.0))
    assert report.heat_capacity == pytest.approx(24.0, rel=1e-6)
    assert report.df_dU == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert report.identity_residual == pytest.approx(0.0, abs=1e-6)


def test_heat_capacity_along_a_polyline():
    model = photon_gas()
    path = PathSpec.through(model, (1.0, 1.0), (4.0, 1.0), (4.0, 5.0))
    assert heat_capacity_along_path(model, path, 1.5) == pytest.approx(1.0)
    assert heat_capacity_along_path(model, path, 5.0) == pytest.approx(4.0 / 9.0)
    with pytest.raises(PathCornerError):
        heat_capacity_along_path(model, path, 3.0)
    assert heat_capacity_along_path(model, path, 3.0, side="before") == pytest.approx(1.0)
    assert heat_capacity_along_path(model, path, 3.0, side="after") == pytest.approx(4.0 / 3.0)


def test_heat_capacity_along_a_curve():
    model = photon_gas()
    assert heat_capacity_along_curve(model, lambda s: (s, s), 2.0) == pytest.approx(4.0 / 3.0, rel=1e-10)
    assert heat_capacity_along_curve(model, lambda s: (s * s, 1.0), 3.0) == pytest.approx(6.0, rel=1e-10)


@pytest.mark.parametrize("model", [photon_gas(), shifted_photon_gas(1.0)], ids=lambda m: m.name)
def test_no_heat_along_a_constant_entropy_curve(model):
    field = EntropyField(model)

    def leaf_curve(v):
        return fiber_point(model, {"V": v}, leaf_solve(field, 2.0, {"V": v}))

    assert heat_capacity_along_curve(model, leaf_curve, 2.0) == pytest.approx(0.0, abs=1e-7)
    assert heat_capacity_along_curve(model, lambda v: fiber_point(model, {"V": v}, 2.0), 2.0) > 0.1


# ---------------------------------------------------------------------------
# Zero sets and positivity
# ---------------------------------------------------------------------------

def test_interior_zero_of_the_ideal_gas_factor(ideal):
    report = zero_set_scan(ideal, [Ray((1.0, 1.0, 1.0), (0.0, 1.0, 1.0))])
    (zero,) = report.interior
    assert zero.point[0] == pytest.approx(math.exp(-5.0 / 3.0), rel=1e-10)
    assert zero.temperature > 0
    assert report.relation == "Z(f)>Z(T)"


def test_photon_gas_factor_vanishes_only_at_the_boundary(photon):
    report = zero_set_scan(photon, [Ray((1.0, 1.0), (0.0, 1.0)), Ray((2.0, 3.0), (0.0, 3.0))])
    assert report.interior == []
    assert len(report.boundary) == 2
    assert report.relation == "Z(f)=Z(T)"


@pytest.mark.parametrize("b0", [0.5, 1.0])
def test_shifted_photon_gas_factor_vanishes_on_its_boundary(b0):
    model = shifted_photon_gas(b0)
    report = zero_set_scan(EntropyField(model), [Ray((1.0 + b0, 1.0), (b0, 1.0))])
    assert report.interior == []
    (zero,) = report.boundary
    np.testing.assert_allclose(zero.point, [b0, 1.0])
    assert model.gap(zero.point) == pytest.approx(0.0, abs=1e-12)
    assert report.relation == "Z(f)=Z(T)"


def test_pressure_positivity():
    model = photon_gas()
    assert pressure_positivity_scan(model, sample_grid(model, 3)).passed
    shifted = shifted_photon_gas(1.0)
    report = pressure_positivity_scan(shifted, [(2.0, 1.0), (10.0, 1.0)])
    assert report.failures == ((2.0, 1.0),)
    assert report.values[0] == pytest.approx(-2.0 / 3.0)


def test_boundary_is_an_integral_manifold():
    assert mayer_lie_residuals(shifted_photon_gas(1.0), {"V": 2.0}).worst <= 1e-8
    assert mayer_lie_residuals(photon_gas()).worst <= 1e-8
    np.testing.assert_allclose(fiber_point(shifted_photon_gas(1.0), {"V": 2.0}, 0.5), [2.5, 2.0])


# ---------------------------------------------------------------------------
# Third law
# ---------------------------------------------------------------------------

def test_approach_path_moves_energy_last():
    path = approach_path(ideal_gas(), {"V": 2.0})
    assert [p.values for p in path.waypoints] == [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (5e-9, 2.0, 1.0)]


def test_photon_gas_is_planck_compliant(photon):
    report = third_law_classify(photon)
    assert report.classification == PLANCK_COMPLIANT
    assert report.slope == pytest.approx(0.75, rel=1e-6)
    assert len(report.gaps) == 8


def test_shifted_photon_gas_is_planck_compliant():
    report = third_law_classify(EntropyField(shifted_photon_gas(1.0)))
    assert report.classification == PLANCK_COMPLIANT


def test_planck_violator_has_a_volume_dependent_limit():
    report = third_law_classify(EntropyField(planck_violator()))
    assert report.classification == PLANCK_VIOLATING
    assert report.limit_entropy == pytest.approx(1.0, rel=1e-4)
    assert report.parameter_limits[1][1] == pytest.approx(2.0, rel=1e-4)
    assert "depends" in report.detail


def test_ideal_gas_violates_positivity(ideal):
    report = third_law_classify(ideal)
    assert report.classification == POSITIVITY_VIOLATING
    (zero,) = report.interior_zeros
    assert zero[0] == pytest.approx(math.exp(-5.0 / 3.0), rel=1e-10)


def test_approach_must_reach_the_boundary(photon):
    with pytest.raises(PathError, match="approach ends"):
        third_law_classify(photon, PathSpec.through(photon.model, (1.0, 1.0), (0.5, 1.0)))


def test_classifications_are_distinct():
    assert len({PLANCK_COMPLIANT, PLANCK_VIOLATING, POSITIVITY_VIOLATING, INCONCLUSIVE}) == 4


# ---------------------------------------------------------------------------
# Leaves
# ---------------------------------------------------------------------------

def test_photon_gas_leaf(photon):
    assert leaf_solve(photon, 2.0) == pytest.approx(2.0 ** (4.0 / 3.0), rel=1e-9)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 4.0, 8.0])
def test_leaf_residuals(photon, c):
    solution = leaf_solution(photon, c)
    assert solution.residual <= 1e-10 * c
    assert solution.bracket[0] <= solution.gap <= solution.bracket[1]
    assert solution.gap == pytest.approx(c ** (4.0 / 3.0), rel=1e-9)


def test_leaf_on_a_shifted_fiber():
    field = EntropyField(shifted_photon_gas(1.0))
    solution = leaf_solution(field, 2.0, {"V": 1.0})
    assert solution.gap == pytest.approx(2.0 ** (4.0 / 3.0), rel=1e-9)
    assert solution.energy == pytest.approx(1.0 + 2.0 ** (4.0 / 3.0), rel=1e-9)


def test_leaf_level_must_be_positive(photon):
    with pytest.raises(ValueError):
        leaf_solution(photon, 0.0)
    with pytest.raises(ValueError):
        leaf_solution(photon, -1.0)


def test_unattained_level_has_no_solution():
    model = ThermoModel("boxed_photon_gas", ("U", "V"), parse("U/(3*V)"), reference=(1.0, 1.0),
                        bounds={"U": (0.0, 4.0)})
    with pytest.raises(NoSolutionError) as info:
        leaf_solution(EntropyField(model), 5.0)
    low, high = info.value.attained_range
    assert low == pytest.approx(1.0)
    assert high == pytest.approx(2.0 ** 1.5, rel=1e-9)


def test_leaf_search_respects_a_lower_energy_bound():
    model = ThermoModel("floored_photon_gas", ("U", "V"), parse("U/(3*V)"), reference=(1.0, 1.0),
                        bounds={"U": (0.5, math.inf)})
    with pytest.raises(NoSolutionError) as info:
        leaf_solution(EntropyField(model), 0.5, {"V": 1.0})
    assert info.value.attained_range == pytest.approx((0.5 ** 0.75, 1.0), rel=1e-9)
    assert leaf_solve(EntropyField(model), 0.9, {"V": 1.0}) == pytest.approx(0.9 ** (4.0 / 3.0), rel=1e-9)


def test_leaf_profile_is_monotone(photon):
    profile = leaf_profile(photon, 2.0, [{"V": 1.0}, {"V": 2.0}, {"V": 4.0}])
    assert profile.monotone
    np.testing.assert_allclose(profile.gaps, [2.0 ** (4 / 3) * v ** (-1 / 3) for v in (1.0, 2.0, 4.0)],
                               rtol=1e-8)


def test_radial_ray_crosses_each_leaf_once(photon):
    crossings = radial_leaf_crossings(photon, 2.0)
    assert crossings.count == 1
    assert abs(crossings.parameters[0] - math.log(2.0)) <= 0.05
