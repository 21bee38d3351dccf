#!/usr/bin/env python3
"""
Tests for entropy reconstruction: quadrature, path routing, S and T,
extensivity and the Gibbs-Duhem checks
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from entropy_reconstructor import (
    EntropyField,
    PathSpec,
    candidate_polylines,
    entropy_gradient,
    extensivity_check,
    gibbs_duhem_exactness,
    gibbs_duhem_reconstruct,
    gibbs_duhem_report,
    gibbs_duhem_residual,
    radial_degree,
    reconstruct_entropy,
    reconstruct_hat_s,
    route_path,
    temperature,
    temperature_report,
    validate_path,
)
from gauss_quadrature import EMPTY_RESULT, adaptive_gauss_legendre
from model_catalog import ideal_gas, nonintegrable_example, photon_gas, planck_violator, shifted_photon_gas
from thermo_errors import (
    NonPositiveFactorError,
    NotExactError,
    NotIntegrableError,
    PathError,
    PathRoutingError,
    QuadratureError,
)
from tolerances import DEFAULT_TOLERANCES


@pytest.fixture(scope="module")
def photon():
    return EntropyField(photon_gas())


@pytest.fixture(scope="module")
def ideal():
    return EntropyField(ideal_gas())


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def test_quadrature_of_sine():
    result = adaptive_gauss_legendre(np.sin, 0.0, math.pi)
    assert result.value == pytest.approx(2.0, rel=1e-13)
    assert result.reliable
    assert result.error <= 1e-9


def test_quadrature_backwards_interval():
    result = adaptive_gauss_legendre(lambda x: x ** 2, 1.0, 0.0)
    assert result.value == pytest.approx(-1.0 / 3.0, rel=1e-14)


def test_quadrature_subdivision_cap_marks_result_unreliable():
    result = adaptive_gauss_legendre(np.sqrt, 0.0, 1.0, rtol=1e-15, atol=0.0, max_subdivisions=2)
    assert not result.reliable
    assert result.subdivisions == 2
    assert result.value == pytest.approx(2.0 / 3.0, rel=1e-3)


def test_quadrature_rejects_bad_arguments():
    with pytest.raises(QuadratureError):
        adaptive_gauss_legendre(np.sin, 0.0, 1.0, order=1)
    with pytest.raises(QuadratureError):
        adaptive_gauss_legendre(np.sin, 0.0, math.inf)
    assert adaptive_gauss_legendre(np.sin, 2.0, 2.0) is EMPTY_RESULT


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

def test_path_spec_rejects_coinciding_waypoints():
    model = photon_gas()
    with pytest.raises(PathError, match="coincide"):
        PathSpec.through(model, (1.0, 1.0), (1.0, 1.0))
    with pytest.raises(PathError):
        PathSpec(())


def test_single_waypoint_is_the_empty_path():
    path = PathSpec.through(photon_gas(), (1.0, 1.0))
    assert path.segments == []
    assert path.length() == 0.0
    np.testing.assert_array_equal(path.at(0.5), [1.0, 1.0])


def test_path_geometry():
    path = PathSpec.through(photon_gas(), (1.0, 1.0), (4.0, 1.0), (4.0, 5.0))
    np.testing.assert_allclose(path.segment_lengths(), [3.0, 4.0])
    np.testing.assert_allclose(path.at(1.5), [4.0, 3.0])
    assert path.reversed().start.values == (4.0, 5.0)


def test_path_takes_quadrature_tolerances():
    model = photon_gas()
    tolerances = DEFAULT_TOLERANCES.replace(quadrature=1e-8, quadrature_abs=1e-9)
    path = PathSpec.through(model, (1.0, 1.0), (4.0, 1.0), tolerances=tolerances)
    assert (path.rtol, path.atol) == (1e-8, 1e-9)
    assert path.reversed().atol == 1e-9
    assert PathSpec.through(model, (1.0, 1.0), (4.0, 1.0)).atol == DEFAULT_TOLERANCES.quadrature_abs


def test_default_route_moves_energy_last():
    candidates = candidate_polylines(np.array([1.0, 1.0, 1.0]), np.array([2.0, 3.0, 4.0]))
    first = [tuple(p) for p in candidates[0]]
    assert first == [(1.0, 1.0, 1.0), (1.0, 3.0, 1.0), (1.0, 3.0, 4.0), (2.0, 3.0, 4.0)]
    assert [tuple(p) for p in candidates[-1]] == [(1.0, 1.0, 1.0), (2.0, 3.0, 4.0)]
    assert len(candidates) == 7


def test_route_avoids_the_region_below_the_boundary():
    model = shifted_photon_gas(1.0)
    with pytest.raises(PathError) as info:
        validate_path(model, PathSpec.through(model, (2.0, 1.0), (2.0, 3.0)))
    assert not isinstance(info.value, NonPositiveFactorError)

    path = route_path(model, (2.0, 1.0), (5.0, 3.0))
    assert [p.values for p in path.waypoints] == [(2.0, 1.0), (5.0, 1.0), (5.0, 3.0)]
    field = EntropyField(model)
    assert field.entropy((5.0, 3.0)) == pytest.approx(2.0 ** 0.75 * 3.0 ** 0.25, rel=1e-9)


def test_nonpositive_factor_on_a_path_is_located():
    model = ideal_gas()
    with pytest.raises(NonPositiveFactorError) as info:
        validate_path(model, PathSpec.through(model, (1.0, 1.0, 1.0), (0.05, 1.0, 1.0)))
    assert 0.0 < info.value.parameter <= 1.0
    assert info.value.value <= 0.0
    assert info.value.segment == 0


def test_no_admissible_route_into_negative_entropy(ideal):
    with pytest.raises(PathRoutingError) as info:
        ideal.entropy((0.05, 1.0, 1.0))
    assert info.value.obstructions


# ---------------------------------------------------------------------------
# Photon gas
# ---------------------------------------------------------------------------

def test_photon_gas_entropy_and_temperature(photon):
    assert photon.entropy((16.0, 1.0)) == pytest.approx(8.0, rel=1e-10)
    assert temperature(photon, (16.0, 1.0)) == pytest.approx(8.0 / 3.0, rel=1e-8)
    assert photon.temperature((16.0, 1.0)) == pytest.approx(8.0 / 3.0, rel=1e-10)
    assert reconstruct_entropy(photon, (1.0, 1.0)) == 1.0


def test_photon_gas_matches_closed_form_on_a_grid(photon):
    model = photon.model
    axis = np.linspace(1.0, 16.0, 10)
    for u in axis:
        for v in axis:
            value = photon.evaluate((u, v))
            exact = model.analytic_entropy_at((u, v))
            assert abs(value.entropy - exact) <= 1e-8 * exact
            assert value.reliable


def test_entropy_is_path_independent(photon):
    model = photon.model
    paths = [
        PathSpec.through(model, (1.0, 1.0), (1.0, 2.0), (4.0, 2.0)),
        PathSpec.through(model, (1.0, 1.0), (4.0, 1.0), (4.0, 2.0)),
        PathSpec.through(model, (1.0, 1.0), (4.0, 2.0)),
        PathSpec.through(model, (1.0, 1.0), (0.5, 3.0), (7.0, 3.0), (4.0, 2.0)),
    ]
    values = [reconstruct_hat_s(model, path).value for path in paths]
    assert max(values) - min(values) <= 1e-9


def test_entropy_is_extensive(photon, ideal):
    assert photon.entropy((2.0, 2.0)) == pytest.approx(2.0 * photon.entropy((1.0, 1.0)), rel=1e-9)
    for scale in (0.5, 2.0, 3.0):
        point = np.array([2.0, 1.5, 1.2])
        assert ideal.entropy(scale * point) == pytest.approx(scale * ideal.entropy(point), rel=1e-8)


def test_extensivity_report(photon):
    report = extensivity_check(photon, [(1.0, 1.0), (16.0, 2.0)])
    assert report.lambdas == (0.5, 2.0, 3.0)
    assert len(report.deviations) == 2
    assert report.passed
    assert report.worst <= 1e-9


def test_extensivity_report_flags_a_corrupted_entropy():
    report = extensivity_check(_CorruptedField(photon_gas()), [(1.0, 1.0)], lambdas=[2.0])
    assert not report.passed
    assert report.deviations[0][0] == pytest.approx(2.0 ** 0.1 - 1.0, rel=1e-6)


def test_rescaling_the_reference_entropy(photon):
    doubled = photon.rescaled(2.0)
    assert doubled.entropy((16.0, 1.0)) == pytest.approx(16.0, rel=1e-10)
    assert doubled.temperature((16.0, 1.0)) == pytest.approx(4.0 / 3.0, rel=1e-10)


def test_reference_entropy_must_be_positive():
    with pytest.raises(ValueError):
        EntropyField(photon_gas(), s0=0.0)


def test_temperature_report_checks_du_derivative(photon):
    report = temperature_report(photon, (16.0, 1.0))
    assert report.passed
    assert report.product == pytest.approx(1.0, abs=1e-6)
    assert report.entropy_u_derivative == pytest.approx(0.375, rel=1e-6)


def test_closed_form_gradient_matches_finite_differences(photon, ideal):
    assert entropy_gradient(photon, (2.0, 3.0)).passed
    report = entropy_gradient(ideal, (2.0, 1.5, 1.2))
    assert report.passed
    assert report.closed_form[0] == pytest.approx(1.0 / ideal.temperature((2.0, 1.5, 1.2)), rel=1e-8)


def test_entropy_has_radial_degree_one(photon, ideal):
    assert radial_degree(photon, (2.0, 3.0)) == pytest.approx(1.0, abs=1e-6)
    assert radial_degree(ideal, (1.5, 1.0, 1.0)) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# Ideal gas
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("point", [
    (2.0, 1.0, 1.0),
    (1.0, 2.0, 1.0),
    (3.0, 2.0, 1.5),
    (1.0, 1.0, 2.0),
    (4.0, 0.5, 0.8),
])
def test_ideal_gas_matches_closed_form(ideal, point):
    exact = ideal.model.analytic_entropy_at(point)
    assert exact > 0.1
    assert ideal.entropy(point) == pytest.approx(exact, rel=1e-7)
    assert ideal.temperature(point) == pytest.approx(point[0] / (1.5 * point[2]), rel=1e-7)


def test_counter_example_has_no_entropy():
    field = EntropyField(nonintegrable_example())
    with pytest.raises(NotIntegrableError) as info:
        field.entropy((2.0, 1.0, 1.0))
    assert info.value.residuals[0].names == ("U", "V", "N")


# ---------------------------------------------------------------------------
# Gibbs-Duhem
# ---------------------------------------------------------------------------

def test_gibbs_duhem_change_of_log_inverse_temperature():
    model = photon_gas()
    path = route_path(model, (1.0, 1.0), (16.0, 1.0))
    assert gibbs_duhem_reconstruct(model, path) == pytest.approx(-math.log(2.0), rel=1e-10)


def test_gibbs_duhem_refuses_inexact_forms():
    model = nonintegrable_example()
    report = gibbs_duhem_exactness(model, [(1.0, 1.0, 1.0)])
    assert not report["exact"]
    (entry,) = report["points"]
    uv = next(r for r in entry["residuals"] if r["pair"] == ["U", "V"])
    assert abs(uv["raw"]) == pytest.approx(1.0)
    with pytest.raises(NotExactError) as info:
        gibbs_duhem_reconstruct(model, PathSpec.through(model, (1.0, 1.0, 1.0), (2.0, 1.0, 1.0)))
    assert info.value.report["worst"] > 1e-3


def test_gibbs_duhem_holds_for_reconstructed_entropy(photon, ideal):
    for point in [(1.0, 1.0), (4.0, 2.0), (0.7, 1.9)]:
        assert gibbs_duhem_residual(photon, point) <= 1e-6
    assert gibbs_duhem_residual(ideal, (2.0, 1.5, 1.2)) <= 1e-6


class _CorruptedField(EntropyField):
    """Multiplies the reconstructed entropy by U^0.1"""

    def entropy(self, target):
        return super().entropy(target) * self.point(target)["U"] ** 0.1

    def entropy_near(self, point, displacement, base=None):
        x = self.point(point).array() + np.asarray(displacement, dtype=float)
        return self.entropy(x)


def test_gibbs_duhem_detects_a_corrupted_entropy():
    field = _CorruptedField(photon_gas())
    assert gibbs_duhem_residual(field, (1.0, 1.0)) == pytest.approx(0.1, rel=1e-4)


def test_gibbs_duhem_report(photon):
    report = gibbs_duhem_report(photon, [(1.0, 1.0), (16.0, 1.0)])
    assert report.exactness["exact"]
    assert report.log_inverse_temperature[0] == 0.0
    assert report.log_inverse_temperature[1] == pytest.approx(-math.log(2.0), rel=1e-10)
    assert report.worst <= 1e-6


INTERIOR = st.floats(min_value=0.2, max_value=20.0, allow_nan=False, allow_infinity=False)


@given(INTERIOR, INTERIOR)
@settings(max_examples=25, deadline=None)
def test_photon_gas_entropy_at_random_states(u, v):
    model = photon_gas()
    field = EntropyField(model)
    assert field.entropy((u, v)) == pytest.approx(u ** 0.75 * v ** 0.25, rel=1e-8)
    assert field.temperature((u, v)) == pytest.approx(4.0 / 3.0 * (u / v) ** 0.25, rel=1e-8)


RATIO = st.floats(min_value=1.0, max_value=2.0, allow_nan=False, allow_infinity=False)
PARTICLES = st.floats(min_value=0.8, max_value=1.2, allow_nan=False, allow_infinity=False)


@given(INTERIOR, INTERIOR)
@settings(max_examples=10, deadline=None)
def test_photon_gas_and_planck_violator_are_extensive(u, v):
    for model in (photon_gas(), planck_violator()):
        report = extensivity_check(EntropyField(model), [(u, v)])
        assert report.lambdas == (0.5, 2.0, 3.0)
        assert report.worst <= 1e-8


@given(RATIO, RATIO, PARTICLES)
@settings(max_examples=10, deadline=None)
def test_ideal_gas_is_extensive(a, b, n):
    report = extensivity_check(EntropyField(ideal_gas()), [(a * n, b * n, n)])
    assert report.worst <= 1e-8


@given(INTERIOR, INTERIOR)
@settings(max_examples=10, deadline=None)
def test_entropy_does_not_depend_on_the_route(u, v):
    assume(u != 1.0 and v != 1.0)
    model = photon_gas()
    routed = EntropyField(model).hat_s((u, v))
    energy_first = PathSpec.through(model, (1.0, 1.0), (u, 1.0), (u, v))
    straight = PathSpec.through(model, (1.0, 1.0), (u, v))
    for path in (energy_first, straight):
        assert reconstruct_hat_s(model, path).value == pytest.approx(routed, abs=1e-9)


@given(INTERIOR, INTERIOR)
@settings(max_examples=20, deadline=None)
def test_gibbs_duhem_holds_at_random_states(u, v):
    assert gibbs_duhem_residual(EntropyField(photon_gas()), (u, v)) <= 1e-6
