#!/usr/bin/env python3
"""
Entropy Analysis Module for the Pfaffian Entropy Toolkit

This module runs the diagnostics on a reconstructed entropy: the Hessian
and its principal minors, the concavity inequalities, the reduction to
densities, heat capacities along paths, zero sets of the integrating
factor, third-law classification and the leaf solver.
"""

import logging
import math
import sys
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect, brentq

from expressions import ONE, Expression, div, neg, var
from entropy_reconstructor import (
    EntropyField,
    PathSpec,
    candidate_polylines,
    line_integral,
)
from pfaffian_forms import PfaffianForm, PointLike, StatePoint, ThermoModel, _values, build_heat_form
from thermo_errors import (
    EvaluationError,
    NoSolutionError,
    PathCornerError,
    PathError,
    PathRoutingError,
    QuadratureError,
    ThermoFormError,
    UnsupportedModelError,
)
from tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

PLANCK_COMPLIANT = "planck-compliant"
PLANCK_VIOLATING = "planck-violating"
POSITIVITY_VIOLATING = "positivity-violating"
INCONCLUSIVE = "inconclusive"

ParamsLike = Union[Mapping[str, float], Sequence[float], None]


# ---------------------------------------------------------------------------
# Hessian and concavity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HessianReport:
    point: Tuple[float, ...]
    entropy: float
    gradient: Tuple[float, ...]
    hessian: Tuple[Tuple[float, ...], ...]
    finite_difference: Optional[Tuple[Tuple[float, ...], ...]]
    cross_check_error: Optional[float]
    cross_check_passed: Optional[bool]
    asymmetry: float
    minors: Tuple[float, ...]
    minor_signs: Tuple[int, ...]
    determinant: float
    eigenvalues: Tuple[float, ...]
    radial_form: float
    scale: float
    verdict: str                   # 'concave' or 'not concave'

    @property
    def passed(self) -> bool:
        return self.verdict == "concave"

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.hessian)


def closed_form_hessian(field: EntropyField, point: PointLike, entropy: Optional[float] = None) -> np.ndarray:
    """
    Second derivatives of S from the state equations

    S_ij = (S / f^2) (w_i w_j + f d_j w_i - w_i d_j f), with d_j f = w_j + sum_k x^k d_j w_k
    """
    x = _values(field.model.coordinates, point)
    entropy = field.entropy(x) if entropy is None else entropy
    w = field.heat_form.evaluate(x)
    d = field.heat_form.evaluate_jacobian(x)
    f = float(np.dot(x, w))
    grad_f = w + x @ d
    return entropy / f ** 2 * (np.outer(w, w) + f * d - np.outer(w, grad_f))


def finite_difference_hessian(field: EntropyField, point: PointLike, entropy: Optional[float] = None,
                              relative_step: Optional[float] = None) -> Optional[np.ndarray]:
    """
    Second-order central differences of the reconstructed S

    Returns None when a stencil point leaves the domain.
    """
    model = field.model
    x = _values(model.coordinates, point)
    entropy = field.entropy(x) if entropy is None else entropy
    relative_step = relative_step or field.tolerances.hessian_step
    m = len(x)
    steps = np.array([relative_step * max(1.0, abs(v)) for v in x])

    def near(offset):
        if not model.contains(x + offset):
            raise PathError("stencil leaves the domain")
        return field.entropy_near(x, offset, entropy)

    hessian = np.zeros((m, m))
    try:
        for i in range(m):
            e_i = np.zeros(m)
            e_i[i] = steps[i]
            hessian[i, i] = (near(e_i) - 2.0 * entropy + near(-e_i)) / steps[i] ** 2
            for j in range(i + 1, m):
                e_j = np.zeros(m)
                e_j[j] = steps[j]
                value = (near(e_i + e_j) - near(e_i - e_j) - near(-e_i + e_j) + near(-e_i - e_j))
                hessian[i, j] = hessian[j, i] = value / (4.0 * steps[i] * steps[j])
    except PathError:
        return None
    return hessian


def leading_minors(matrix: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.det(matrix[:k, :k]) for k in range(1, len(matrix) + 1)])


def minor_sign(value: float, order: int, scale: float, band: float) -> int:
    """Sign of a minor, 0 inside the band |m| <= band * scale^order"""
    if abs(value) <= band * scale ** order:
        return 0
    return 1 if value > 0 else -1


def entropy_hessian(field: EntropyField, point: PointLike) -> HessianReport:
    """
    Hessian of S at a point with minors, eigenvalues and a finite-difference cross-check

    Concave means odd leading minors < 0, even ones > 0, the determinant
    zero within the band and the radial direction in the kernel.
    """
    tol = field.tolerances
    x = _values(field.model.coordinates, point)
    entropy = field.entropy(x)
    f = float(field.model.integrating_factor(x))
    w = field.heat_form.evaluate(x)
    raw = closed_form_hessian(field, x, entropy)
    scale = max(float(np.max(np.abs(raw))), 1e-300)
    asymmetry = float(np.max(np.abs(raw - raw.T))) / scale
    if asymmetry > tol.symmetry:
        logger.warning("Hessian at %s is asymmetric (%.3g)", field.point(x), asymmetry)
    hessian = 0.5 * (raw + raw.T)

    numeric = finite_difference_hessian(field, x, entropy)
    cross_error = passed = None
    if numeric is not None:
        cross_error = float(np.max(np.abs(numeric - hessian))) / scale
        passed = cross_error <= tol.hessian_cross_check
        if not passed:
            logger.warning("finite-difference Hessian disagrees at %s (%.3g)", field.point(x), cross_error)

    minors = leading_minors(hessian)
    m = len(x)
    signs = tuple(minor_sign(value, k + 1, scale, tol.minor_band) for k, value in enumerate(minors))
    expected = tuple((-1) ** k for k in range(1, m)) + (0,)
    radial = float(x @ hessian @ x)
    radial_ok = abs(radial) <= tol.symmetry * scale * float(np.dot(x, x))
    verdict = "concave" if signs == expected and radial_ok else "not concave"
    return HessianReport(
        point=tuple(x), entropy=entropy, gradient=tuple((entropy / f * w).tolist()),
        hessian=tuple(tuple(row) for row in hessian.tolist()),
        finite_difference=None if numeric is None else tuple(tuple(row) for row in numeric.tolist()),
        cross_check_error=cross_error, cross_check_passed=passed, asymmetry=asymmetry,
        minors=tuple(minors.tolist()), minor_signs=signs, determinant=float(minors[-1]),
        eigenvalues=tuple(np.linalg.eigvalsh(hessian).tolist()), radial_form=radial,
        scale=scale, verdict=verdict)


def eigen_signature(report: HessianReport) -> Tuple[int, int, int]:
    """(negative, zero, positive) eigenvalue counts with the minor band"""
    band = report.scale * DEFAULT_TOLERANCES.symmetry
    values = np.array(report.eigenvalues)
    return (int(np.sum(values < -band)), int(np.sum(np.abs(values) <= band)), int(np.sum(values > band)))


@dataclass(frozen=True)
class ConcavityReport:
    point: Tuple[float, ...]
    method: str                     # 'inequalities' or 'minors'
    conditions: Dict[str, float]
    passed: bool
    note: str


def concavity_conditions(field: EntropyField, point: PointLike) -> ConcavityReport:
    """
    The two concavity inequalities for (U, V, N) models

        1 - df/dU < 0
        (1 - df/dU)(p^2 + f dp/dV - p df/dV) - (p - df/dV)^2 > 0

    Other arities fall back to the minor test of entropy_hessian.
    """
    model = field.model
    x = _values(model.coordinates, point)
    if len(x) != 3:
        report = entropy_hessian(field, x)
        return ConcavityReport(tuple(x), "minors",
                               {f"minor_{k + 1}": v for k, v in enumerate(report.minors)},
                               report.passed, "leading principal minor test")
    binding = dict(zip(model.coordinates, x))
    factor = model.integrating_factor_expression
    f = factor.evaluate(binding)
    f_u = factor.differentiate(model.energy).evaluate(binding)
    f_v = factor.differentiate(model.volume).evaluate(binding)
    p = model.pressure.evaluate(binding)
    p_v = model.pressure.differentiate(model.volume).evaluate(binding)
    first = 1.0 - f_u
    second = first * (p ** 2 + f * p_v - p * f_v) - (p - f_v) ** 2
    passed = first < 0 and second > 0
    return ConcavityReport(tuple(x), "inequalities",
                           {"one_minus_df_dU": float(first), "two_by_two_minor": float(second)},
                           bool(passed),
                           "1 - df/dU < 0 is the positivity of the heat capacity at constant V, N")


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityModel:
    """
    The model reduced to densities u = U/V, x^i = X^i/V

    omega/f = omega0 + dV/V with omega0 = (du - sum_i xi_i dx^i) / (u + p - sum_i xi_i x^i).
    """

    model: ThermoModel
    names: Tuple[str, ...]
    intensives: Tuple[Expression, ...]
    numerator: PfaffianForm        # du - sum_i xi_i dx^i
    factor0: Expression
    reference: Tuple[float, ...]
    s_ref: float
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def densities(self, point: PointLike) -> np.ndarray:
        """(u, x^1..x^n) of a state"""
        x = _values(self.model.coordinates, point)
        return np.concatenate(([x[0]], x[2:])) / x[1]

    def state(self, densities: Sequence[float], volume: float) -> np.ndarray:
        d = np.asarray(densities, dtype=float)
        return np.concatenate(([d[0], 1.0], d[1:])) * volume

    def contains(self, densities: Sequence[float]) -> bool:
        volume = self.model.reference[1]
        return self.model.contains(self.state(densities, volume))

    def _path(self, target: np.ndarray) -> PathSpec:
        obstructions = []
        for polyline in candidate_polylines(np.array(self.reference), target):
            waypoints = tuple(StatePoint(self.names, tuple(p)) for p in polyline)
            try:
                for a, b in zip(polyline, polyline[1:]):
                    for t in np.linspace(0.0, 1.0, self.tolerances.path_samples):
                        y = a + t * (b - a)
                        if not self.contains(y) or not self.factor0.evaluate(dict(zip(self.names, y))) > 0:
                            raise PathError(f"density path blocked at {tuple(y)}")
            except (PathError, EvaluationError) as exc:
                obstructions.append(str(exc))
                continue
            return PathSpec(waypoints, 15, self.tolerances.max_subdivisions, self.tolerances.quadrature,
                            self.tolerances.quadrature_abs)
        raise PathRoutingError(f"no admissible density path to {tuple(target)}", obstructions)

    def log_increment(self, densities: Sequence[float]) -> float:
        """s_hat(densities) - s_hat(reference densities) by quadrature of omega0"""
        target = np.asarray(densities, dtype=float)
        if np.array_equal(target, np.array(self.reference)):
            return 0.0
        return line_integral(self.numerator, self._path(target), self.factor0).value

    def entropy_density(self, densities: Sequence[float]) -> float:
        return self.s_ref * math.exp(self.log_increment(densities))

    def entropy(self, point: PointLike) -> float:
        """S = V s(u, x)"""
        x = _values(self.model.coordinates, point)
        return x[1] * self.entropy_density(self.densities(x))

    @cached_property
    def omega0(self) -> PfaffianForm:
        return self.numerator.divided_by(self.factor0, "omega0")


def _density_names(model: ThermoModel) -> Tuple[str, ...]:
    taken = set(model.coordinates)
    names = []
    for name in (model.energy,) + model.extensives:
        candidate = name.lower()
        if candidate in taken or candidate in names:
            candidate = f"{name}_per_{model.volume}"
        names.append(candidate)
    return tuple(names)


def reduce_to_densities(model: ThermoModel, tolerances: Tolerances = DEFAULT_TOLERANCES) -> DensityModel:
    """
    Rewrite the intensive state equations over densities and build omega0

    The degree-0 coefficients satisfy p(uV, V, xV) = p(u, 1, x), so the
    substitution is U -> u, V -> 1, X^i -> x^i.

    Raises:
        UnsupportedModelError: If the rewritten equations cannot be evaluated
            at the reference densities
    """
    names = _density_names(model)
    mapping = {model.volume: ONE}
    for coordinate, name in zip((model.energy,) + model.extensives, names):
        mapping[coordinate] = var(name)
    intensives = tuple(e.substitute(mapping) for e in model.intensives)
    forces = intensives[1:]
    coefficients = (ONE,) + tuple(neg(xi) for xi in forces)
    numerator = PfaffianForm(names, coefficients, 0.0, "omega0")
    factor0 = model.integrating_factor_expression.substitute(mapping)
    ref = _values(model.coordinates, model.reference)
    reference = tuple((np.concatenate(([ref[0]], ref[2:])) / ref[1]).tolist())
    try:
        if not factor0.evaluate(dict(zip(names, reference))) > 0:
            raise UnsupportedModelError(f"reduced integrating factor of '{model.name}' is not positive")
    except EvaluationError as exc:
        raise UnsupportedModelError(f"'{model.name}' cannot be reduced to densities: {exc}") from exc
    return DensityModel(model, names, intensives, numerator, factor0, reference,
                        model.s0 / ref[1], tolerances)


def decomposition_residual(density: DensityModel, point: PointLike, direction: Sequence[float]) -> float:
    """
    |(omega/f - dV/V)(v) - omega0(induced density displacement)| at a state
    """
    model = density.model
    x = _values(model.coordinates, point)
    v = np.asarray(direction, dtype=float)
    f = float(model.integrating_factor(x))
    heat = build_heat_form(model).contract(x, v) / f
    left = heat - v[1] / x[1]
    d = density.densities(x)
    extensive_rates = np.concatenate(([v[0]], v[2:]))
    induced = (extensive_rates - d * v[1]) / x[1]
    binding = dict(zip(density.names, d))
    omega0 = density.omega0.evaluate(binding)
    return abs(left - float(np.dot(omega0, induced)))


def density_identity_errors(density: DensityModel, field: EntropyField,
                            points: Sequence[PointLike]) -> List[float]:
    """Relative errors |S - V s(u, x)| / S at sample states"""
    errors = []
    for point in points:
        entropy = field.entropy(point)
        errors.append(abs(entropy - density.entropy(point)) / abs(entropy))
    return errors


@dataclass(frozen=True, eq=False)
class ClosedSystemModel:
    """
    Per-particle entropy s(u, v) of a closed system with a known temperature

    ds = (du + p dv) / T; the chemical potential is never used.
    """

    model: ThermoModel
    particles: str
    names: Tuple[str, ...]
    form: PfaffianForm
    temperature: Expression
    reference: Tuple[float, ...]
    s_ref: float
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def per_particle(self, point: PointLike) -> np.ndarray:
        x = _values(self.model.coordinates, point)
        n = x[self.model.coordinates.index(self.particles)]
        return np.array([x[0], x[1]]) / n

    def entropy_per_particle(self, densities: Sequence[float]) -> float:
        target = np.asarray(densities, dtype=float)
        if np.array_equal(target, np.array(self.reference)):
            return self.s_ref
        obstructions = []
        for polyline in candidate_polylines(np.array(self.reference), target):
            path = PathSpec(tuple(StatePoint(self.names, tuple(p)) for p in polyline), 15,
                            self.tolerances.max_subdivisions, self.tolerances.quadrature,
                            self.tolerances.quadrature_abs)
            try:
                value = line_integral(self.form, path, self.temperature).value
            except (PathError, EvaluationError) as exc:
                obstructions.append(str(exc))
                continue
            # ds integrates to s - s_ref, not to a logarithm
            return self.s_ref + value
        raise PathRoutingError(f"no admissible per-particle path to {tuple(target)}", obstructions)

    def entropy(self, point: PointLike) -> float:
        """S = N s(U/N, V/N)"""
        x = _values(self.model.coordinates, point)
        n = x[self.model.coordinates.index(self.particles)]
        return n * self.entropy_per_particle(self.per_particle(x))


def reduce_closed_system(model: ThermoModel, particles: Optional[str] = None,
                         tolerances: Tolerances = DEFAULT_TOLERANCES) -> ClosedSystemModel:
    """
    Per-particle reduction of a (U, V, N) model using its known T(U, V, N)

    Raises:
        UnsupportedModelError: Without an analytic temperature or a third coordinate
    """
    if len(model.coordinates) != 3:
        raise UnsupportedModelError("the closed-system reduction needs coordinates (U, V, N)")
    particles = particles or model.extensives[0]
    if particles not in model.extensives:
        raise UnsupportedModelError(f"'{particles}' is not a particle-number coordinate")
    if model.analytic_temperature is None:
        raise UnsupportedModelError(f"model '{model.name}' has no known temperature")
    names = (model.energy.lower() + "_per_particle", model.volume.lower() + "_per_particle")
    mapping = {model.energy: var(names[0]), model.volume: var(names[1]), particles: ONE}
    temperature_expr = model.analytic_temperature.substitute(mapping)
    pressure = model.pressure.substitute(mapping)
    form = PfaffianForm(names, (ONE, pressure), 0.0, "du + p dv")
    ref = _values(model.coordinates, model.reference)
    n_ref = ref[model.coordinates.index(particles)]
    reference = (ref[0] / n_ref, ref[1] / n_ref)
    return ClosedSystemModel(model, particles, names, form, temperature_expr, reference,
                             model.s0 / n_ref, tolerances)


# ---------------------------------------------------------------------------
# Heat capacities
# ---------------------------------------------------------------------------

def heat_capacity_along_path(model: ThermoModel, path: PathSpec, t: float,
                             side: Optional[str] = None) -> float:
    """
    C = omega(gamma') at arc length t along a polyline

    The polyline is traversed at unit speed. At an interior waypoint the
    velocity is undefined: pass side='before' or side='after' for a
    one-sided value.

    Raises:
        PathCornerError: At a waypoint corner without a side
    """
    lengths = path.segment_lengths()
    if lengths.size == 0:
        raise PathError("an empty path has no velocity")
    corners = np.concatenate(([0.0], np.cumsum(lengths)))
    total = corners[-1]
    if not -1e-12 * total <= t <= total * (1 + 1e-12):
        raise PathError(f"arc length {t:g} outside [0, {total:g}]")
    interior = corners[1:-1]
    hit = np.flatnonzero(np.isclose(interior, t, rtol=1e-12, atol=1e-12 * total))
    if hit.size:
        if side not in ("before", "after"):
            raise PathCornerError(t)
        index = hit[0] if side == "before" else hit[0] + 1
    else:
        index = int(np.clip(np.searchsorted(corners, t, side="right") - 1, 0, len(lengths) - 1))
    a, b = path.segments[index]
    direction = (b.array() - a.array()) / lengths[index]
    position = a.array() + (t - corners[index]) * direction
    return build_heat_form(model).contract(position, direction)


def heat_capacity_along_curve(model: ThermoModel, curve: Callable[[float], Sequence[float]], t: float,
                              step: float = 1e-2) -> float:
    """omega(gamma'(t)) for a parametric curve, velocity by five-point differences"""
    c = lambda s: np.asarray(curve(s), dtype=float)
    velocity = (-c(t + 2 * step) + 8 * c(t + step) - 8 * c(t - step) + c(t - 2 * step)) / (12 * step)
    return build_heat_form(model).contract(c(t), velocity)


@dataclass(frozen=True)
class HeatCapacityReport:
    point: Tuple[float, ...]
    heat_capacity: float          # 1 / (dT/dU) at fixed V, X
    temperature_slope: float      # dT/dU
    df_dU: float
    identity_residual: float      # df/dU - (1 + S dT/dU)


def heat_capacity_constant_extensives(field: EntropyField, point: PointLike) -> HeatCapacityReport:
    """
    Heat capacity at constant V, X with the check df/dU = 1 + S dT/dU
    """
    model = field.model
    x = _values(model.coordinates, point)
    entropy = field.entropy(x)
    h = field.tolerances.finite_difference_step * max(1.0, abs(x[0]))
    e = np.zeros_like(x)
    e[0] = h

    def temperature_at(offset):
        return float(model.integrating_factor(x + offset)) / field.entropy_near(x, offset, entropy)

    slope = (temperature_at(e) - temperature_at(-e)) / (2.0 * h)
    df_du = model.integrating_factor_expression.differentiate(model.energy).evaluate(
        dict(zip(model.coordinates, x)))
    residual = df_du - (1.0 + entropy * slope)
    return HeatCapacityReport(tuple(x), 1.0 / slope, slope, float(df_du), float(residual))


# ---------------------------------------------------------------------------
# Zero sets and positivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ray:
    start: Tuple[float, ...]
    end: Tuple[float, ...]

    def at(self, s: float) -> np.ndarray:
        a = np.asarray(self.start, dtype=float)
        return a + s * (np.asarray(self.end, dtype=float) - a)


@dataclass(frozen=True)
class ZeroLocation:
    ray: int
    parameter: float
    point: Tuple[float, ...]
    kind: str                        # 'interior' or 'boundary'
    temperature: Optional[float] = None


@dataclass(frozen=True)
class ZeroSetReport:
    zeros: Tuple[ZeroLocation, ...]
    relation: str                     # 'Z(f)=Z(T)', 'Z(f)>Z(T)' or 'unknown'

    @property
    def interior(self) -> List[ZeroLocation]:
        return [z for z in self.zeros if z.kind == "interior"]

    @property
    def boundary(self) -> List[ZeroLocation]:
        return [z for z in self.zeros if z.kind == "boundary"]


def _ray_parameters(count: int = 200) -> np.ndarray:
    near_end = 1.0 - np.logspace(-1, -8, 29)
    return np.unique(np.concatenate((np.linspace(0.0, 1.0, count + 1)[:-1], near_end, [1.0])))


def temperature_expression(model: ThermoModel) -> Optional[Expression]:
    """Known T: the model's own, else 1 / (dS/dU) of the analytic entropy"""
    if model.analytic_temperature is not None:
        return model.analytic_temperature
    if model.analytic_entropy is not None:
        return div(ONE, model.analytic_entropy.differentiate(model.energy))
    return None


def _factor_along(model, ray, s):
    try:
        return float(model.integrating_factor(ray.at(s)))
    except EvaluationError:
        return math.nan


def zero_set_scan(field: EntropyField, rays: Sequence[Ray], boundary_ratio: float = 1e-6) -> ZeroSetReport:
    """
    Zeros of f along rays that end next to the boundary

    A sign change of f strictly inside a ray is an interior zero; f at the
    end of a ray below boundary_ratio times its largest value on the ray is
    a boundary zero. With a known temperature, interior zeros where T > 0
    give Z(f) > Z(T); zeros only at the boundary with T -> 0 give Z(f) = Z(T).
    """
    model = field.model
    tol = field.tolerances
    temperature_expr = temperature_expression(model)
    zeros = []
    temperature_vanishes = []
    grid = _ray_parameters()
    for index, ray in enumerate(rays):
        values = np.array([_factor_along(model, ray, s) for s in grid])
        finite = np.isfinite(values)
        for k in range(len(grid) - 1):
            if not (finite[k] and finite[k + 1]):
                continue
            if values[k] > 0 >= values[k + 1] or values[k] <= 0 < values[k + 1]:
                if abs(values[k + 1]) <= tol.zero_tolerance and k + 1 == len(grid) - 1:
                    continue
                root = brentq(lambda s: _factor_along(model, ray, s), grid[k], grid[k + 1],
                              xtol=tol.zero_tolerance)
                location = ray.at(root)
                temperature_value = None
                if temperature_expr is not None:
                    try:
                        temperature_value = float(temperature_expr.evaluate(dict(zip(model.coordinates, location))))
                    except EvaluationError:
                        temperature_value = None
                zeros.append(ZeroLocation(index, float(root), tuple(location), "interior", temperature_value))
                logger.info("interior zero of f on ray %d at %s", index, tuple(np.round(location, 10)))
        peak = float(np.nanmax(np.abs(values))) if finite.any() else 0.0
        if finite[-1] and peak > 0 and abs(values[-1]) <= boundary_ratio * peak:
            zeros.append(ZeroLocation(index, 1.0, tuple(ray.at(1.0)), "boundary"))
            if temperature_expr is not None:
                temperature_vanishes.append(_tends_to_zero(model, temperature_expr, ray, tol))

    relation = "unknown"
    if temperature_expr is not None:
        interior = [z for z in zeros if z.kind == "interior"]
        if any(z.temperature is not None and z.temperature > 0 for z in interior):
            relation = "Z(f)>Z(T)"
        elif not interior and temperature_vanishes and all(temperature_vanishes):
            relation = "Z(f)=Z(T)"
    return ZeroSetReport(tuple(zeros), relation)


def _tends_to_zero(model, temperature_expr, ray, tol) -> bool:
    """T -> 0 at the end of the ray: log T keeps a positive slope in log(1 - s)"""
    try:
        near = [float(temperature_expr.evaluate(dict(zip(model.coordinates, ray.at(1.0 - d)))))
                for d in (1e-6, 1e-8)]
    except EvaluationError:
        return False
    if not all(v > 0 for v in near):
        return near[-1] == 0.0
    slope = (math.log(near[0]) - math.log(near[1])) / (math.log(1e-6) - math.log(1e-8))
    return slope >= tol.divergence_slope


@dataclass(frozen=True)
class PositivityReport:
    quantity: str
    values: Tuple[float, ...]
    failures: Tuple[Tuple[float, ...], ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def pressure_positivity_scan(model: ThermoModel, samples: Sequence[PointLike]) -> PositivityReport:
    """p > 0 at every sample"""
    values, failures = [], []
    for sample in samples:
        x = _values(model.coordinates, sample)
        try:
            p = float(model.pressure.evaluate(dict(zip(model.coordinates, x))))
        except EvaluationError:
            p = math.nan
        values.append(p)
        if not p > 0:
            failures.append(tuple(x))
    return PositivityReport("p", tuple(values), tuple(failures))


def _params(model: ThermoModel, params: ParamsLike) -> Dict[str, float]:
    """Values of every non-energy coordinate, defaulting to the reference"""
    values = dict(zip(model.coordinates[1:], model.reference[1:]))
    if params is None:
        return values
    if isinstance(params, Mapping):
        unknown = set(params) - set(values)
        if unknown:
            raise ValueError(f"unknown fiber parameters {sorted(unknown)}")
        values.update({k: float(v) for k, v in params.items()})
        return values
    items = list(params)
    if len(items) != len(values):
        raise ValueError(f"expected {len(values)} fiber parameters, got {len(items)}")
    return dict(zip(values, (float(v) for v in items)))


def _boundary_energy(model: ThermoModel, params: Dict[str, float]) -> float:
    if model.boundary is None:
        return 0.0
    return float(model.boundary.evaluate(params))


def fiber_point(model: ThermoModel, params: ParamsLike, gap: float) -> np.ndarray:
    """The state U = b(params) + gap at fixed non-energy coordinates"""
    values = _params(model, params)
    return np.array([_boundary_energy(model, values) + gap] + [values[n] for n in model.coordinates[1:]])


def _gap(model: ThermoModel, x: np.ndarray) -> float:
    gap = model.gap(x)
    return float(x[0] if gap is None else gap)


@dataclass(frozen=True)
class MayerLieReport:
    point: Tuple[float, ...]
    residuals: Dict[str, float]

    @property
    def worst(self) -> float:
        return max((abs(v) for v in self.residuals.values()), default=0.0)


def mayer_lie_residuals(model: ThermoModel, params: ParamsLike = None,
                        gap: Optional[float] = None) -> MayerLieReport:
    """
    db/dV + p and db/dX^i - xi_i at U = b + gap

    Their vanishing as gap -> 0 makes the boundary U = b an integral
    manifold of omega (a model without b uses b = 0).
    """
    gap = DEFAULT_TOLERANCES.boundary_epsilon if gap is None else gap
    x = fiber_point(model, params, gap)
    binding = dict(zip(model.coordinates, x))
    boundary = model.boundary
    residuals = {}
    for name, intensive, sign in zip(model.coordinates[1:], model.intensives,
                                     [1.0] + [-1.0] * len(model.forces)):
        db = 0.0 if boundary is None else float(boundary.differentiate(name).evaluate(binding))
        residuals[name] = db + sign * float(intensive.evaluate(binding))
    return MayerLieReport(tuple(x), residuals)


# ---------------------------------------------------------------------------
# Third law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThirdLawReport:
    model: str
    classification: str
    approach: Tuple[Tuple[float, ...], ...]
    interior_zeros: Tuple[Tuple[float, ...], ...]
    gaps: Tuple[float, ...]
    hat_s: Tuple[float, ...]
    slope: Optional[float]
    limit_entropy: Optional[float]
    parameter_limits: Tuple[Tuple[Tuple[float, ...], float], ...]
    detail: str


def approach_path(model: ThermoModel, params: ParamsLike = None, epsilon: Optional[float] = None,
                  tolerances: Tolerances = DEFAULT_TOLERANCES) -> PathSpec:
    """
    Reference state to B = epsilon / 2 at the given non-energy coordinates

    Non-energy coordinates move first, at the reference B; the energy
    moves last.
    """
    epsilon = tolerances.boundary_epsilon if epsilon is None else epsilon
    ref = _values(model.coordinates, model.reference)
    ref_gap = _gap(model, ref)
    waypoints = [ref]
    shifted = fiber_point(model, params, ref_gap)
    if not np.array_equal(shifted, ref):
        waypoints.append(shifted)
    waypoints.append(fiber_point(model, params, 0.5 * epsilon))
    return PathSpec.through(model, *waypoints, tolerances=tolerances)


def _scan_positivity(model: ThermoModel, path: PathSpec, epsilon: float):
    """First interior point where f <= 0 along a path (B > epsilon), or None"""
    for index, (a, b) in enumerate(path.segments):
        ray = Ray(a.values, b.values)
        grid = _ray_parameters(400)
        values = [_factor_along(model, ray, s) for s in grid]
        for k in range(1, len(grid)):
            if values[k] > 0 or math.isnan(values[k]):
                continue
            if _gap(model, ray.at(grid[k])) <= epsilon:
                break
            root = grid[k]
            if values[k - 1] > 0:
                root = brentq(lambda s: _factor_along(model, ray, s), grid[k - 1], grid[k], xtol=1e-14)
            return tuple(ray.at(root))
    return None


def _entropy_ladder(field: EntropyField, path: PathSpec, levels: Sequence[float]):
    """S_hat at the points of the final segment where B reaches each level"""
    model = field.model
    a, b = path.segments[-1]
    ray = Ray(a.values, b.values)
    start_gap = _gap(model, ray.at(0.0))
    end_gap = _gap(model, ray.at(1.0))
    gaps, points = [], []
    for level in levels:
        if not end_gap <= level < start_gap:
            continue
        s = brentq(lambda u: _gap(model, ray.at(u)) - level, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
        gaps.append(level)
        points.append(ray.at(s))
    if not points:
        return [], []
    values = [field.hat_s(points[0])]
    for previous, current in zip(points, points[1:]):
        values.append(values[-1] + field.log_entropy_increment(previous, current))
    return gaps, values


def third_law_classify(field: EntropyField, approach: Optional[PathSpec] = None,
                       params: ParamsLike = None) -> ThirdLawReport:
    """
    Classify the approach to B = 0

    Interior zeros of f come first (positivity-violating). Otherwise S_hat
    is followed at B = 1e-1 .. 1e-8; its slope in log B over the last two
    decades decides between divergence (planck-compliant) and convergence
    (planck-violating); anything in between is inconclusive.

    Raises:
        PathError: If the approach stops above the boundary epsilon
    """
    model = field.model
    tol = field.tolerances
    approach = approach or approach_path(model, params, tolerances=tol)
    end_gap = _gap(model, approach.end.array())
    waypoints = tuple(p.values for p in approach.waypoints)
    if end_gap > tol.boundary_epsilon:
        raise PathError(f"approach ends at B = {end_gap:.3g}, above the boundary epsilon "
                        f"{tol.boundary_epsilon:.3g}")

    zero = _scan_positivity(model, approach, tol.boundary_epsilon)
    if zero is not None:
        return ThirdLawReport(model.name, POSITIVITY_VIOLATING, waypoints, (zero,), (), (), None, None, (),
                              f"f vanishes in the interior at {tuple(round(v, 10) for v in zero)}")

    levels = [10.0 ** -k for k in range(1, 9)]
    try:
        gaps, values = _entropy_ladder(field, approach, levels)
    except (ThermoFormError, QuadratureError) as exc:
        return ThirdLawReport(model.name, INCONCLUSIVE, waypoints, (), (), (), None, None, (),
                              f"quadrature failed: {exc}")
    if len(gaps) < 3:
        return ThirdLawReport(model.name, INCONCLUSIVE, waypoints, (), tuple(gaps), tuple(values),
                              None, None, (), "too few levels of B along the approach")

    slope = (values[-3] - values[-1]) / (math.log(gaps[-3]) - math.log(gaps[-1]))
    logger.debug("third law for %s: slope %.6g over B in [%g, %g]", model.name, slope, gaps[-1], gaps[-3])
    if slope >= tol.divergence_slope:
        return ThirdLawReport(model.name, PLANCK_COMPLIANT, waypoints, (), tuple(gaps), tuple(values),
                              slope, None, (), "S_hat diverges to -infinity as B -> 0")
    if abs(slope) < tol.convergence_slope:
        limit = field.s0 * math.exp(values[-1])
        evidence = [(tuple(approach.end.values[1:]), limit)]
        try:
            doubled = {name: 2.0 * value for name, value in _params(model, approach.end.values[1:]).items()}
            other = approach_path(model, doubled, tolerances=tol)
            other_gaps, other_values = _entropy_ladder(field, other, levels)
            if other_values:
                evidence.append((tuple(other.end.values[1:]), field.s0 * math.exp(other_values[-1])))
        except ThermoFormError as exc:
            logger.info("no second ray for %s: %s", model.name, exc)
        depends = len(evidence) > 1 and not math.isclose(evidence[0][1], evidence[1][1], rel_tol=1e-6)
        detail = "S converges to a positive limit as B -> 0"
        if depends:
            detail += " that depends on the other coordinates"
        return ThirdLawReport(model.name, PLANCK_VIOLATING, waypoints, (), tuple(gaps), tuple(values),
                              slope, limit, tuple(evidence), detail)
    return ThirdLawReport(model.name, INCONCLUSIVE, waypoints, (), tuple(gaps), tuple(values), slope,
                          None, (), "slope between the convergence and divergence thresholds")


# ---------------------------------------------------------------------------
# Leaves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeafSolution:
    level: float
    params: Dict[str, float]
    gap: float
    energy: float
    residual: float
    bracket: Tuple[float, float]


def leaf_solution(field: EntropyField, c: float, params: ParamsLike = None) -> LeafSolution:
    """
    Solve S(b + B, params) = c for B on one fiber

    The bracket grows by doubling or halving B and bisects toward a domain
    bound once a step leaves the domain.

    Raises:
        ValueError: If c <= 0
        NoSolutionError: If c is not attained along the fiber
    """
    if not c > 0:
        raise ValueError(f"entropy level must be positive, got {c}")
    model = field.model
    tol = field.tolerances
    values = _params(model, params)
    ref = _values(model.coordinates, model.reference)
    start_gap = _gap(model, ref)
    base_point = fiber_point(model, values, start_gap)
    if not model.contains(base_point):
        raise NoSolutionError("fiber parameters are outside the domain", (math.nan, math.nan))
    base_entropy = field.entropy(base_point)

    def entropy_at(gap):
        return field.entropy_near(base_point, np.eye(len(ref))[0] * (gap - start_gap), base_entropy)

    lo = hi = start_gap
    s_lo = s_hi = base_entropy
    attained = [base_entropy, base_entropy]
    floor = ceiling = None          # nearest gaps known to lie outside the domain
    try:
        for _ in range(200):
            if s_lo <= c <= s_hi:
                break
            if s_hi < c:
                candidate = 2.0 * hi if ceiling is None else 0.5 * (hi + ceiling)
                if not model.contains(fiber_point(model, values, candidate)):
                    ceiling = candidate
                    if ceiling - hi <= tol.leaf_rtol * hi:
                        break
                    continue
                lo, s_lo = hi, s_hi
                hi, s_hi = candidate, entropy_at(candidate)
                attained[1] = max(attained[1], s_hi)
            else:
                candidate = 0.5 * lo if floor is None else 0.5 * (floor + lo)
                if not model.contains(fiber_point(model, values, candidate)):
                    floor = candidate
                    if lo - floor <= tol.leaf_rtol * lo:
                        break
                    continue
                hi, s_hi = lo, s_lo
                lo, s_lo = candidate, entropy_at(candidate)
                attained[0] = min(attained[0], s_lo)
    except (PathError, EvaluationError) as exc:
        logger.info("bracket search stopped: %s", exc)
    if not s_lo <= c <= s_hi:
        raise NoSolutionError(f"S = {c:g} is not attained on the fiber {values}", tuple(attained))
    if s_lo == c:
        gap = lo
    elif s_hi == c:
        gap = hi
    else:
        gap = bisect(lambda g: entropy_at(g) - c, lo, hi, xtol=1e-300,
                     rtol=max(tol.leaf_rtol, 4 * np.finfo(float).eps), maxiter=200)
    residual = abs(entropy_at(gap) - c)
    if residual > tol.leaf_residual * c:
        logger.warning("leaf residual %.3g exceeds %.3g", residual, tol.leaf_residual * c)
    energy = float(fiber_point(model, values, gap)[0])
    return LeafSolution(c, values, float(gap), energy, float(residual), (float(lo), float(hi)))


def leaf_solve(field: EntropyField, c: float, params: ParamsLike = None) -> float:
    """B_c with S(b + B_c, params) = c"""
    return leaf_solution(field, c, params).gap


@dataclass(frozen=True)
class LeafProfile:
    level: float
    params: Tuple[Dict[str, float], ...]
    gaps: Tuple[float, ...]
    monotone: bool
    largest_jump: float


def leaf_profile(field: EntropyField, c: float, param_values: Sequence[ParamsLike]) -> LeafProfile:
    """B_c over a sequence of fibers with a monotone-continuity verdict"""
    solutions = [leaf_solution(field, c, params) for params in param_values]
    gaps = np.array([s.gap for s in solutions])
    steps = np.diff(gaps)
    monotone = bool(np.all(steps > 0) or np.all(steps < 0)) if steps.size else True
    jump = float(np.max(np.abs(steps)) / np.max(np.abs(gaps))) if steps.size else 0.0
    return LeafProfile(c, tuple(s.params for s in solutions), tuple(gaps.tolist()), monotone, jump)


@dataclass(frozen=True)
class LeafCrossings:
    level: float
    count: int
    parameters: Tuple[float, ...]


def radial_leaf_crossings(field: EntropyField, c: float, span: float = 10.0,
                          samples: int = 401) -> LeafCrossings:
    """Sign changes of S(e^t x0) - c for t in [-span, span] along the reference ray"""
    x0 = field.reference.array()
    ts = np.linspace(-span, span, samples)
    values = np.array([field.s0 * math.exp(field.log_entropy_increment(x0, math.exp(t) * x0)) - c
                       for t in ts])
    changes = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    return LeafCrossings(c, int(changes.size), tuple(float(ts[k]) for k in changes))


def main():
    """
    Command-line interface: Hessian and third-law verdict of a bundled model
    """
    from model_catalog import ModelCatalog

    catalog = ModelCatalog()
    if len(sys.argv) < 2:
        print("Usage: python3 entropy_analyzer.py <model-name> [value ...]")
        print(f"Models: {', '.join(catalog.names())}")
        sys.exit(1)

    try:
        model = catalog.get(sys.argv[1])
        field = EntropyField(model)
        point = [float(v) for v in sys.argv[2:]] or list(model.reference)
        print(f"Analyzing {model.name} at {model.point(point)}")
        if model.expect_integrable:
            report = entropy_hessian(field, point)
            print(f"  - minors: {', '.join(f'{m:.6g}' for m in report.minors)}")
            print(f"{'✓' if report.passed else '✗'} Hessian verdict: {report.verdict}")
        verdict = third_law_classify(field)
        print(f"  - third law: {verdict.classification} ({verdict.detail})")
    except (ThermoFormError, ValueError) as e:
        print(f"✗ Error: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
