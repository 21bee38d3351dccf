#!/usr/bin/env python3
"""
Pfaffian Form Module for the Pfaffian Entropy Toolkit

This module holds the thermodynamic model description and the heat form
omega = dU + p dV - sum_i xi_i dX^i built from it, together with the
radial-field machinery: homogeneity sampling, Frobenius residuals, mixed
partial (exactness) residuals, the integrating factor f = i_Y(omega) and
Euler potentials of closed homogeneous forms.
"""

import logging
import math
import sys
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from expressions import ONE, Expression, add, div, mul, neg, sub, var
from thermo_errors import (
    EvaluationError,
    FormError,
    ModelValidationError,
    NotClosedError,
    QuadratureRequiredError,
    ThermoFormError,
)
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)

PointLike = Union["StatePoint", Mapping[str, float], Sequence[float]]


@dataclass(frozen=True)
class StatePoint:
    """
    A state (U, V, X^1..X^n) of the system

    `gap` is the derived coordinate B = U - b(V, X) when the model has a
    ground-state boundary, and None otherwise.
    """

    coordinates: Tuple[str, ...]
    values: Tuple[float, ...]
    gap: Optional[float] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != len(self.coordinates):
            raise ValueError(f"{len(self.coordinates)} coordinates but {len(values)} values")
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"state coordinates must be finite: {values}")
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "values", values)

    def __getitem__(self, name: str) -> float:
        return self.values[self.coordinates.index(name)]

    def as_binding(self) -> Dict[str, float]:
        return dict(zip(self.coordinates, self.values))

    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def scaled(self, factor: float) -> "StatePoint":
        """The point lambda * x (B scales with it because b is degree one)"""
        gap = None if self.gap is None else self.gap * factor
        return StatePoint(self.coordinates, tuple(v * factor for v in self.values), gap)

    def __str__(self):
        return "(" + ", ".join(f"{n}={v:.6g}" for n, v in zip(self.coordinates, self.values)) + ")"


def _binding(coordinates: Sequence[str], point: PointLike) -> Dict[str, object]:
    if isinstance(point, StatePoint):
        return point.as_binding()
    if isinstance(point, Mapping):
        return dict(point)
    values = list(point)
    if len(values) != len(coordinates):
        raise ValueError(f"expected {len(coordinates)} coordinate values, got {len(values)}")
    return dict(zip(coordinates, values))


def _values(coordinates: Sequence[str], point: PointLike) -> np.ndarray:
    binding = _binding(coordinates, point)
    return np.array([float(binding[name]) for name in coordinates])


@dataclass(frozen=True, eq=False)
class ThermoModel:
    """
    A homogeneous thermodynamic system given by its intensive state equations

    Coordinates are ordered (U, V, X^1..X^n): index 0 is the energy, index 1
    the volume. `forces` holds xi_1..xi_n, one per extra extensive. Bounds are
    open intervals; a coordinate without bounds lives in (0, inf).
    """

    name: str
    coordinates: Tuple[str, ...]
    pressure: Expression
    forces: Tuple[Expression, ...] = ()
    reference: Tuple[float, ...] = ()
    bounds: Mapping[str, Tuple[float, float]] = field(default_factory=dict)
    boundary: Optional[Expression] = None
    analytic_entropy: Optional[Expression] = None
    analytic_temperature: Optional[Expression] = None
    s0: Optional[float] = None
    expect_integrable: bool = True
    nominal_degree: float = 0.0
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "forces", tuple(self.forces))
        object.__setattr__(self, "reference", tuple(float(v) for v in self.reference))
        bounds = {name: (0.0, math.inf) for name in self.coordinates}
        for name, (lower, upper) in dict(self.bounds).items():
            bounds[name] = (float(lower), float(upper))
        object.__setattr__(self, "bounds", bounds)
        self.validate()

    # -- structure ---------------------------------------------------------

    @property
    def energy(self) -> str:
        return self.coordinates[0]

    @property
    def volume(self) -> str:
        return self.coordinates[1]

    @property
    def extensives(self) -> Tuple[str, ...]:
        """The X^i coordinates (everything after U and V)"""
        return self.coordinates[2:]

    @property
    def intensives(self) -> Tuple[Expression, ...]:
        return (self.pressure,) + self.forces

    @property
    def reference_point(self) -> StatePoint:
        return self.point(self.reference)

    def validate(self):
        """
        Check the structural requirements of the model

        Raises:
            ModelValidationError: Describing the first violated requirement
        """
        coordinates = self.coordinates
        if len(coordinates) < 2:
            raise ModelValidationError(f"model '{self.name}' needs at least U and V coordinates", "model.coordinates")
        if len(set(coordinates)) != len(coordinates):
            raise ModelValidationError(f"model '{self.name}' repeats a coordinate name", "model.coordinates")
        if len(self.forces) != len(coordinates) - 2:
            raise ModelValidationError(
                f"model '{self.name}' has {len(coordinates) - 2} extra extensives "
                f"but {len(self.forces)} generalized forces", "forces")
        unknown_bounds = set(self.bounds) - set(coordinates)
        if unknown_bounds:
            raise ModelValidationError(
                f"bounds given for unknown coordinates: {sorted(unknown_bounds)}", f"bounds.{min(unknown_bounds)}")
        for name, (lower, upper) in self.bounds.items():
            if not lower < upper:
                raise ModelValidationError(f"empty domain for {name}: ({lower}, {upper})", f"bounds.{name}")

        allowed = set(coordinates)
        labelled = [("p", "intensive.p", self.pressure)]
        labelled += [(f"xi[{x}]", f"forces.{x}", e) for x, e in zip(self.extensives, self.forces)]
        labelled += [("b", "boundary.b", self.boundary), ("S", "analytic.S", self.analytic_entropy),
                     ("T", "analytic.T", self.analytic_temperature)]
        for label, key, expr in labelled:
            if expr is None:
                continue
            stray = expr.free_variables() - allowed
            if stray:
                raise ModelValidationError(
                    f"expression {label} = {expr} uses unknown variables {sorted(stray)}", key)
        if self.boundary is not None and self.energy in self.boundary.free_variables():
            raise ModelValidationError("boundary b must not depend on the energy coordinate", "boundary.b")

        if len(self.reference) != len(coordinates):
            raise ModelValidationError(
                f"reference state needs {len(coordinates)} values, got {len(self.reference)}", "reference")
        for name, value in zip(coordinates, self.reference):
            lower, upper = self.bounds[name]
            if not lower < value < upper:
                raise ModelValidationError(
                    f"reference {name} = {value:g} is not strictly inside ({lower:g}, {upper:g})", f"reference.{name}")
        try:
            factor = self.integrating_factor(self.reference)
            gap = self.gap(self.reference)
        except EvaluationError as exc:
            raise ModelValidationError(
                f"state equations cannot be evaluated at the reference: {exc}", "intensive.p") from exc
        if not factor > 0:
            raise ModelValidationError(
                f"integrating factor f = {factor:.6g} is not positive at the reference", "intensive.p")
        if gap is not None and not gap > 0:
            raise ModelValidationError(f"reference lies on or below the boundary (B = {gap:.6g})", "boundary.b")

        if self.s0 is None:
            s0 = 1.0
            if self.analytic_entropy is not None:
                try:
                    s0 = self.analytic_entropy.evaluate(self.point(self.reference).as_binding())
                except EvaluationError as exc:
                    raise ModelValidationError(
                        f"analytic entropy undefined at the reference: {exc}", "analytic.S") from exc
            object.__setattr__(self, "s0", float(s0))
        if not (math.isfinite(self.s0) and self.s0 > 0):
            raise ModelValidationError(f"reference entropy S0 must be positive, got {self.s0}", "model.s0")

    # -- evaluation --------------------------------------------------------

    @cached_property
    def integrating_factor_expression(self) -> Expression:
        """f = U + pV - sum_i xi_i X^i"""
        total = add(var(self.energy), mul(self.pressure, var(self.volume)))
        for name, force in zip(self.extensives, self.forces):
            total = sub(total, mul(force, var(name)))
        return total

    def integrating_factor(self, point: PointLike):
        return self.integrating_factor_expression.evaluate(_binding(self.coordinates, point))

    def gap(self, point: PointLike):
        """B = U - b(V, X), or None when the model has no boundary"""
        if self.boundary is None:
            return None
        binding = _binding(self.coordinates, point)
        return binding[self.energy] - self.boundary.evaluate(binding)

    def point(self, values: PointLike) -> StatePoint:
        """Build a StatePoint (with its B coordinate) from values or a binding"""
        array = _values(self.coordinates, values)
        gap = self.gap(array) if self.boundary is not None else None
        return StatePoint(self.coordinates, tuple(array), None if gap is None else float(gap))

    def in_bounds(self, point: PointLike) -> bool:
        values = _values(self.coordinates, point)
        return all(self.bounds[name][0] < value < self.bounds[name][1]
                   for name, value in zip(self.coordinates, values))

    def contains(self, point: PointLike) -> bool:
        """True when the point is inside the bounds and above the boundary"""
        if not self.in_bounds(point):
            return False
        try:
            gap = self.gap(point)
        except EvaluationError:
            return False
        return gap is None or gap > 0

    def analytic_entropy_at(self, point: PointLike) -> Optional[float]:
        if self.analytic_entropy is None:
            return None
        return self.analytic_entropy.evaluate(_binding(self.coordinates, point))


@dataclass(frozen=True)
class PfaffianForm:
    """
    A one-form sum_i omega_i dx^i with expression coefficients

    `degree` is the nominal homogeneity degree of the coefficients
    (0 for the heat form, -1 for omega/f).
    """

    coordinates: Tuple[str, ...]
    coefficients: Tuple[Expression, ...]
    degree: float = 0.0
    name: str = "omega"

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if len(self.coordinates) != len(self.coefficients):
            raise FormError(f"form '{self.name}' has {len(self.coefficients)} coefficients "
                            f"for {len(self.coordinates)} coordinates")

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    @cached_property
    def jacobian(self) -> Tuple[Tuple[Expression, ...], ...]:
        """jacobian[i][j] is the expression of d omega_i / d x^j"""
        return tuple(tuple(c.differentiate(x) for x in self.coordinates) for c in self.coefficients)

    def evaluate(self, point: PointLike) -> np.ndarray:
        """
        Coefficient values at a point

        Args:
            point: StatePoint, binding or value sequence; bindings may hold
                arrays, in which case the result has shape (m,) + batch shape

        Returns:
            np.ndarray: omega_1..omega_m
        """
        binding = _binding(self.coordinates, point)
        values = [np.asarray(c.evaluate(binding), dtype=float) for c in self.coefficients]
        return np.stack(np.broadcast_arrays(*values))

    def evaluate_jacobian(self, point: PointLike) -> np.ndarray:
        binding = _binding(self.coordinates, point)
        return np.array([[d.evaluate(binding) for d in row] for row in self.jacobian], dtype=float)

    def contract(self, point: PointLike, direction: Sequence[float]) -> float:
        """omega(v) at the point"""
        return float(np.dot(self.evaluate(point), np.asarray(direction, dtype=float)))

    def radial_expression(self) -> Expression:
        """i_Y(omega) = sum_i x^i omega_i as an expression"""
        total = None
        for name, coefficient in zip(self.coordinates, self.coefficients):
            term = mul(var(name), coefficient)
            total = term if total is None else add(total, term)
        return total

    def divided_by(self, divisor: Expression, name: Optional[str] = None,
                   divisor_degree: float = 1.0) -> "PfaffianForm":
        """The form omega / g for a function g of the given degree"""
        return PfaffianForm(self.coordinates,
                            tuple(div(c, divisor) for c in self.coefficients),
                            self.degree - divisor_degree,
                            name or f"{self.name}/f")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeEntry:
    coefficient: int
    point: Tuple[float, ...]
    scale: float
    expected: Optional[float]
    actual: Optional[float]
    observed_degree: Optional[float]
    deviation: Optional[float]
    status: str            # 'pass', 'fail' or 'untestable'


@dataclass(frozen=True)
class DegreeReport:
    lambdas: Tuple[float, ...]
    nominal_degree: float
    tolerance: float
    entries: Tuple[DegreeEntry, ...]

    @property
    def worst_deviation(self) -> float:
        deviations = [e.deviation for e in self.entries if e.deviation is not None]
        return max(deviations, default=0.0)

    @property
    def passed(self) -> bool:
        return all(e.status != "fail" for e in self.entries)

    @property
    def untestable(self) -> int:
        return sum(e.status == "untestable" for e in self.entries)

    def observed_degree(self, coefficient: int) -> Optional[float]:
        """Median observed degree of one coefficient over its testable entries"""
        degrees = [e.observed_degree for e in self.entries
                   if e.coefficient == coefficient and e.observed_degree is not None]
        return float(np.median(degrees)) if degrees else None

    def failures(self) -> List[DegreeEntry]:
        return [e for e in self.entries if e.status == "fail"]


@dataclass(frozen=True)
class IntegrabilityResidual:
    indices: Tuple[int, int, int]
    names: Tuple[str, str, str]
    raw: float
    normalized: float


@dataclass(frozen=True)
class ExactnessResidual:
    indices: Tuple[int, int]
    names: Tuple[str, str]
    raw: float
    normalized: float


@dataclass(frozen=True)
class LieDerivativeReport:
    point: Tuple[float, ...]
    coefficients: Tuple[float, ...]
    expected: Tuple[float, ...]
    residuals: Tuple[float, ...]

    @property
    def worst(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


@dataclass(frozen=True)
class NontrivialityReport:
    samples: Tuple[Tuple[float, ...], ...]
    values: Tuple[float, ...]
    failures: Tuple[Tuple[float, ...], ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def minimum(self) -> float:
        return min(self.values, default=math.nan)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def build_heat_form(model: ThermoModel) -> PfaffianForm:
    """
    Assemble omega = dU + p dV - sum_i xi_i dX^i

    Args:
        model (ThermoModel): A validated model

    Returns:
        PfaffianForm: Coefficients (1, p, -xi_1, ..., -xi_n), nominal degree 0
    """
    coefficients = (ONE, model.pressure) + tuple(neg(xi) for xi in model.forces)
    return PfaffianForm(model.coordinates, coefficients, model.nominal_degree, "omega")


def radial_apply(form: PfaffianForm, point: PointLike) -> float:
    """i_Y(omega) at a point: sum_i x^i omega_i"""
    values = _values(form.coordinates, point)
    return float(np.dot(values, form.evaluate(values)))


def _normalizer(coefficients: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(coefficients))))


def check_homogeneity(form: PfaffianForm, samples: Sequence[PointLike],
                      lambdas: Optional[Sequence[float]] = None, tol: Optional[float] = None,
                      domain: Optional[Callable[[np.ndarray], bool]] = None) -> DegreeReport:
    """
    Sample omega_i(lambda x) against lambda^k omega_i(x)

    Args:
        form (PfaffianForm): Form whose coefficients should have the nominal degree
        samples (list): Interior sample points
        lambdas (list, optional): Scale factors (default 0.5, 2, 3)
        tol (float, optional): Relative tolerance (default 1e-9)
        domain (callable, optional): Membership test for scaled points, e.g.
            ThermoModel.contains; points outside are marked untestable

    Returns:
        DegreeReport: One entry per (coefficient, sample, lambda)
    """
    lambdas = tuple(DEFAULT_TOLERANCES.lambdas if lambdas is None else lambdas)
    tol = DEFAULT_TOLERANCES.homogeneity if tol is None else tol
    if any(lam <= 0 for lam in lambdas):
        raise ValueError("scale factors must be positive")
    k = form.degree
    entries = []
    for sample in samples:
        x = _values(form.coordinates, sample)
        base = form.evaluate(x)
        for lam in lambdas:
            scaled = lam * x
            try:
                if domain is not None and not domain(scaled):
                    raise EvaluationError("scaled point leaves the domain")
                moved = form.evaluate(scaled)
            except EvaluationError:
                entries.extend(DegreeEntry(i, tuple(x), lam, None, None, None, None, "untestable")
                               for i in range(form.dimension))
                continue
            for i in range(form.dimension):
                expected = lam ** k * base[i]
                actual = moved[i]
                scale = max(abs(expected), abs(actual))
                deviation = 0.0 if scale == 0.0 else abs(actual - expected) / scale
                observed = None
                if lam != 1.0 and base[i] != 0.0 and actual / base[i] > 0:
                    observed = math.log(actual / base[i]) / math.log(lam)
                status = "pass" if deviation <= tol else "fail"
                entries.append(DegreeEntry(i, tuple(x), lam, float(expected), float(actual),
                                           observed, deviation, status))
    report = DegreeReport(lambdas, k, tol, tuple(entries))
    logger.debug("homogeneity of %s: worst deviation %.3g over %d entries",
                 form.name, report.worst_deviation, len(entries))
    return report


def integrability_residuals(form: PfaffianForm, point: PointLike) -> List[IntegrabilityResidual]:
    """
    Frobenius residuals l_ijk of omega ^ d omega at a point

    l_ijk = w_i (d_k w_j - d_j w_k) + w_j (d_i w_k - d_k w_i) + w_k (d_j w_i - d_i w_j)

    Two-coordinate forms are integrable without computation; the result is
    then an empty list.
    """
    m = form.dimension
    if m < 3:
        return []
    x = _values(form.coordinates, point)
    w = form.evaluate(x)
    d = form.evaluate_jacobian(x)
    scale = _normalizer(w)
    residuals = []
    for i, j, k in combinations(range(m), 3):
        raw = (w[i] * (d[j, k] - d[k, j])
               + w[j] * (d[k, i] - d[i, k])
               + w[k] * (d[i, j] - d[j, i]))
        names = (form.coordinates[i], form.coordinates[j], form.coordinates[k])
        residuals.append(IntegrabilityResidual((i, j, k), names, float(raw), float(raw) / scale))
    return residuals


def exactness_residuals(form: PfaffianForm, point: PointLike) -> List[ExactnessResidual]:
    """
    Mixed partial residuals d_j w_i - d_i w_j for i < j

    All zero exactly when the form is closed at the point.
    """
    x = _values(form.coordinates, point)
    w = form.evaluate(x)
    d = form.evaluate_jacobian(x)
    scale = _normalizer(w)
    residuals = []
    for i, j in combinations(range(form.dimension), 2):
        raw = d[i, j] - d[j, i]
        names = (form.coordinates[i], form.coordinates[j])
        residuals.append(ExactnessResidual((i, j), names, float(raw), float(raw) / scale))
    return residuals


def worst_residual(residuals) -> float:
    """Largest normalized residual magnitude (0 for an empty list)"""
    return max((abs(r.normalized) for r in residuals), default=0.0)


def euler_potential(form: PfaffianForm, alpha: float, point: PointLike,
                    tol: Optional[float] = None) -> float:
    """
    Potential of a closed form with coefficients homogeneous of degree alpha

    g(x) = i_Y(form)(x) / (alpha + 1)

    Raises:
        QuadratureRequiredError: For alpha = -1 (the potential needs quadrature)
        NotClosedError: If the mixed partials do not vanish at the point
    """
    tol = DEFAULT_TOLERANCES.exactness if tol is None else tol
    if math.isclose(alpha, -1.0, rel_tol=0.0, abs_tol=1e-12):
        raise QuadratureRequiredError(
            f"coefficients of '{form.name}' have degree -1; its potential must be found by quadrature")
    residuals = exactness_residuals(form, point)
    if worst_residual(residuals) > tol:
        raise NotClosedError(residuals, f"form '{form.name}' is not closed "
                                        f"(worst residual {worst_residual(residuals):.3g})")
    return radial_apply(form, point) / (alpha + 1.0)


def radial_lie_derivative(form: PfaffianForm, point: PointLike) -> LieDerivativeReport:
    """
    Coefficients of L_Y omega = d i_Y omega + i_Y d omega

    (L_Y omega)_i = sum_j x^j d_j w_i + w_i, which equals (k + 1) w_i for a
    form whose coefficients are homogeneous of degree k.
    """
    x = _values(form.coordinates, point)
    w = form.evaluate(x)
    d = form.evaluate_jacobian(x)
    lie = d @ x + w
    expected = (form.degree + 1.0) * w
    scale = _normalizer(w)
    return LieDerivativeReport(tuple(x), tuple(lie.tolist()), tuple(expected.tolist()),
                               tuple(((lie - expected) / scale).tolist()))


def nontriviality_scan(model: ThermoModel, samples: Sequence[PointLike]) -> NontrivialityReport:
    """Sample the integrating factor and record every point where f <= 0"""
    points, values, failures = [], [], []
    for sample in samples:
        x = tuple(_values(model.coordinates, sample))
        try:
            f = float(model.integrating_factor(x))
        except EvaluationError:
            f = math.nan
        points.append(x)
        values.append(f)
        if not f > 0:
            failures.append(x)
    if failures:
        logger.warning("f <= 0 at %d of %d samples of model '%s'", len(failures), len(points), model.name)
    return NontrivialityReport(tuple(points), tuple(values), tuple(failures))


def sample_grid(model: ThermoModel, points_per_axis: int = 5,
                span: Tuple[float, float] = (0.5, 2.0)) -> List[StatePoint]:
    """
    Geometric grid around the reference state

    Each axis runs from span[0] * ref to span[1] * ref; points outside the
    model domain are dropped.
    """
    axes = [np.geomspace(span[0] * r, span[1] * r, points_per_axis) for r in model.reference]
    grid = []
    for values in product(*axes):
        if model.contains(values):
            grid.append(model.point(values))
    return grid


def main():
    """
    Command-line interface: integrability and homogeneity of a bundled model
    """
    from model_catalog import ModelCatalog

    catalog = ModelCatalog()
    if len(sys.argv) < 2:
        print("Usage: python3 pfaffian_forms.py <model-name> [value ...]")
        print(f"Models: {', '.join(catalog.names())}")
        sys.exit(1)

    try:
        model = catalog.get(sys.argv[1])
        point = model.point([float(v) for v in sys.argv[2:]] or model.reference)
        form = build_heat_form(model)
        print(f"Heat form of {model.name}: {', '.join(str(c) for c in form.coefficients)}")
        print(f"  - f{point} = {radial_apply(form, point):.10g}")
        for residual in integrability_residuals(form, point):
            print(f"  - l_{''.join(residual.names)} = {residual.raw:.6g}")
        report = check_homogeneity(form, [point], domain=model.contains)
        status = "✓" if report.passed else "✗"
        print(f"{status} Homogeneity: worst deviation {report.worst_deviation:.3g}")
    except (ThermoFormError, ValueError) as e:
        print(f"✗ Error: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
