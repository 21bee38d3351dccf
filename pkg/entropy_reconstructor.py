#!/usr/bin/env python3
"""
Entropy Reconstruction Module for the Pfaffian Entropy Toolkit

This module integrates omega/f along reversible paths to obtain the
empirical entropy S_hat, exponentiates it into the extensive entropy
S = S0 exp(S_hat - S_hat(ref)), derives the absolute temperature T = f/S and
runs the Gibbs-Duhem engine d log(1/T) = -(V dp - sum_i X^i dxi_i) / f.

Paths are polylines through waypoints. The global path parameter runs from
0 at the first waypoint to n at the last, segment j covering [j, j + 1].
"""

import logging
import math
import sys
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from more_itertools import distinct_permutations, pairwise

from expressions import Expression, mul, neg, sub, var
from gauss_quadrature import EMPTY_RESULT, QuadratureResult, adaptive_gauss_legendre
from pfaffian_forms import (
    PfaffianForm,
    PointLike,
    StatePoint,
    ThermoModel,
    _values,
    build_heat_form,
    exactness_residuals,
    integrability_residuals,
    worst_residual,
)
from thermo_errors import (
    EvaluationError,
    NonPositiveFactorError,
    NotExactError,
    NotIntegrableError,
    PathError,
    PathRoutingError,
    ThermoFormError,
)
from tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    """
    A polyline from a reference state (first waypoint) to a target (last)

    A single waypoint is the empty path.
    """

    waypoints: Tuple[StatePoint, ...]
    order: int = 15
    max_subdivisions: int = 2000
    rtol: float = 1e-10
    atol: float = 1e-14

    def __post_init__(self):
        waypoints = tuple(self.waypoints)
        if not waypoints:
            raise PathError("a path needs at least one waypoint")
        coordinates = waypoints[0].coordinates
        for index, (a, b) in enumerate(pairwise(waypoints)):
            if b.coordinates != coordinates:
                raise PathError("waypoints use different coordinates")
            if a.values == b.values:
                raise PathError(f"waypoints {index} and {index + 1} coincide")
        object.__setattr__(self, "waypoints", waypoints)

    @classmethod
    def through(cls, model: ThermoModel, *points: PointLike, tolerances: Tolerances = DEFAULT_TOLERANCES):
        """Path through the given points with quadrature settings taken from the tolerances"""
        return cls(tuple(model.point(p) for p in points), 15,
                   tolerances.max_subdivisions, tolerances.quadrature, tolerances.quadrature_abs)

    @property
    def coordinates(self) -> Tuple[str, ...]:
        return self.waypoints[0].coordinates

    @property
    def start(self) -> StatePoint:
        return self.waypoints[0]

    @property
    def end(self) -> StatePoint:
        return self.waypoints[-1]

    @property
    def segments(self) -> List[Tuple[StatePoint, StatePoint]]:
        return list(pairwise(self.waypoints))

    def segment_lengths(self) -> np.ndarray:
        return np.array([np.linalg.norm(b.array() - a.array()) for a, b in self.segments])

    def length(self) -> float:
        return float(self.segment_lengths().sum())

    def at(self, parameter: float) -> np.ndarray:
        """Point at a global path parameter in [0, n]"""
        segments = self.segments
        if not segments:
            return self.start.array()
        index = min(int(math.floor(parameter)), len(segments) - 1)
        a, b = segments[max(index, 0)]
        t = parameter - max(index, 0)
        return a.array() + t * (b.array() - a.array())

    def reversed(self) -> "PathSpec":
        return PathSpec(tuple(reversed(self.waypoints)), self.order, self.max_subdivisions, self.rtol,
                        self.atol)

    def __str__(self):
        return " -> ".join(str(p) for p in self.waypoints)


def validate_path(model: ThermoModel, path: PathSpec, samples: int = 33):
    """
    Sample every segment for domain membership and f > 0

    Raises:
        NonPositiveFactorError: With the global parameter of the first bad sample
        PathError: If a sample leaves the model domain
    """
    for index, (a, b) in enumerate(path.segments):
        for t in np.linspace(0.0, 1.0, samples):
            x = a.array() + t * (b.array() - a.array())
            if not model.contains(x):
                raise PathError(f"segment {index} leaves the domain at t = {index + t:.6g}, "
                                f"point {tuple(np.round(x, 12))}")
            try:
                f = model.integrating_factor(x)
            except EvaluationError as exc:
                raise PathError(f"segment {index}: {exc}") from exc
            if not f > 0:
                raise NonPositiveFactorError(index + t, tuple(x), f, index)


def _axis_polyline(start: np.ndarray, target: np.ndarray, order: Sequence[int]) -> List[np.ndarray]:
    points = [start.copy()]
    current = start.copy()
    for axis in order:
        if current[axis] == target[axis]:
            continue
        current = current.copy()
        current[axis] = target[axis]
        points.append(current)
    return points


def candidate_polylines(a: np.ndarray, b: np.ndarray) -> List[List[np.ndarray]]:
    """
    Candidate polylines from a to b in routing order

    The default varies every coordinate after the first (in coordinate
    order) and the first one (the energy) last; the other axis orders
    follow, then the straight segment.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = len(a)
    default = tuple(range(1, m)) + (0,)
    orders = [default] + [order for order in distinct_permutations(range(m)) if order != default]
    candidates, seen = [], set()
    for order in orders:
        polyline = _axis_polyline(a, b, order)
        key = tuple(tuple(p) for p in polyline)
        if key not in seen:
            seen.add(key)
            candidates.append(polyline)
    straight = [a, b] if not np.array_equal(a, b) else [a]
    if tuple(tuple(p) for p in straight) not in seen:
        candidates.append(straight)
    return candidates


def candidate_paths(model: ThermoModel, start: PointLike, target: PointLike) -> List[List[np.ndarray]]:
    """Candidate polylines between two states of a model"""
    return candidate_polylines(_values(model.coordinates, start), _values(model.coordinates, target))


def route_path(model: ThermoModel, start: PointLike, target: PointLike,
               tolerances: Tolerances = DEFAULT_TOLERANCES) -> PathSpec:
    """
    Choose a valid polyline from start to target

    Raises:
        PathRoutingError: When every candidate meets f <= 0 or leaves the domain
    """
    obstructions = []
    for number, polyline in enumerate(candidate_paths(model, start, target)):
        path = PathSpec.through(model, *polyline, tolerances=tolerances)
        try:
            validate_path(model, path, tolerances.path_samples)
        except PathError as exc:
            obstructions.append(str(exc))
            continue
        if number:
            logger.debug("rerouted %s after %d rejected candidates", path, number)
        return path
    raise PathRoutingError(
        f"no admissible path from {model.point(start)} to {model.point(target)} "
        f"(first obstruction: {obstructions[0] if obstructions else 'none'})", obstructions)


def line_integral(form: PfaffianForm, path: PathSpec, divisor: Optional[Expression] = None) -> QuadratureResult:
    """
    Integrate form/divisor along a path

    The divisor, when given, must stay positive: it is checked at every
    quadrature node.

    Raises:
        NonPositiveFactorError: If the divisor is <= 0 at a node
    """
    total = EMPTY_RESULT
    for index, (a, b) in enumerate(path.segments):
        origin, step = a.array(), b.array() - a.array()

        def integrand(t, origin=origin, step=step, index=index):
            binding = {name: origin[i] + t * step[i] for i, name in enumerate(form.coordinates)}
            numerator = np.tensordot(step, form.evaluate(binding), axes=1)
            if divisor is None:
                return numerator
            denominator = np.broadcast_to(np.asarray(divisor.evaluate(binding), dtype=float), t.shape)
            bad = np.flatnonzero(~(denominator > 0))
            if bad.size:
                k = bad[0]
                raise NonPositiveFactorError(index + float(t[k]), tuple(origin + t[k] * step),
                                             float(denominator[k]), index)
            return numerator / denominator

        total = total + adaptive_gauss_legendre(integrand, 0.0, 1.0, rtol=path.rtol, atol=path.atol,
                                                order=path.order,
                                                max_subdivisions=path.max_subdivisions)
    return total


# ---------------------------------------------------------------------------
# Empirical and metrical entropy
# ---------------------------------------------------------------------------

def reconstruct_hat_s(model: ThermoModel, path: PathSpec,
                      tolerances: Tolerances = DEFAULT_TOLERANCES) -> QuadratureResult:
    """
    S_hat(target) - S_hat(reference) as the integral of omega/f along a path

    Args:
        model (ThermoModel): The system
        path (PathSpec): Reference first, target last
        tolerances (Tolerances): Integrability and sampling settings

    Returns:
        QuadratureResult: Increment with error estimate; `reliable` is False
        when a segment hit the subdivision cap

    Raises:
        NotIntegrableError: If omega fails Frobenius at a waypoint
        NonPositiveFactorError: If f <= 0 on the path
    """
    form = build_heat_form(model)
    for waypoint in path.waypoints:
        residuals = integrability_residuals(form, waypoint)
        if worst_residual(residuals) > tolerances.integrability:
            raise NotIntegrableError(residuals, f"heat form of '{model.name}' is not integrable at "
                                                f"{waypoint} (worst residual {worst_residual(residuals):.3g})")
    validate_path(model, path, tolerances.path_samples)
    result = line_integral(form, path, model.integrating_factor_expression)
    if not result.reliable:
        logger.warning("S_hat along %s is unreliable (error %.3g)", path, result.error)
    return result


@dataclass(frozen=True)
class EntropyValue:
    target: StatePoint
    entropy: float
    hat_s: float
    error: float
    reliable: bool
    path: Optional[PathSpec] = None


@dataclass(frozen=True, eq=False)
class EntropyField:
    """
    The reconstructed extensive entropy of a model

    S(reference) = s0 exactly. Rescaling s0 by gamma rescales S by gamma and
    divides T by gamma.
    """

    model: ThermoModel
    tolerances: Tolerances = DEFAULT_TOLERANCES
    reference: Optional[StatePoint] = None
    s0: Optional[float] = None

    def __post_init__(self):
        reference = self.model.point(self.reference if self.reference is not None else self.model.reference)
        object.__setattr__(self, "reference", reference)
        if self.s0 is None:
            object.__setattr__(self, "s0", self.model.s0)
        if not (math.isfinite(self.s0) and self.s0 > 0):
            raise ValueError(f"reference entropy must be positive, got {self.s0}")
        if not self.model.contains(reference):
            raise PathError(f"reference {reference} is outside the domain of '{self.model.name}'")

    @cached_property
    def heat_form(self) -> PfaffianForm:
        return build_heat_form(self.model)

    @cached_property
    def factor(self) -> Expression:
        return self.model.integrating_factor_expression

    def rescaled(self, gamma: float) -> "EntropyField":
        return EntropyField(self.model, self.tolerances, self.reference, self.s0 * gamma)

    def point(self, target: PointLike) -> StatePoint:
        return self.model.point(target)

    def path_to(self, target: PointLike) -> PathSpec:
        return route_path(self.model, self.reference, target, self.tolerances)

    def evaluate(self, target: PointLike, path: Optional[PathSpec] = None) -> EntropyValue:
        """Entropy at a target with its quadrature error estimate"""
        target = self.point(target)
        if target.values == self.reference.values:
            return EntropyValue(target, self.s0, 0.0, 0.0, True, None)
        path = path or self.path_to(target)
        result = reconstruct_hat_s(self.model, path, self.tolerances)
        entropy = self.s0 * math.exp(result.value)
        return EntropyValue(target, entropy, result.value, entropy * result.error, result.reliable, path)

    def hat_s(self, target: PointLike, path: Optional[PathSpec] = None) -> float:
        return self.evaluate(target, path).hat_s

    def entropy(self, target: PointLike) -> float:
        return self.evaluate(target).entropy

    def temperature(self, target: PointLike) -> float:
        return float(self.model.integrating_factor(target)) / self.entropy(target)

    def log_entropy_increment(self, start: PointLike, end: PointLike) -> float:
        """S_hat(end) - S_hat(start) along the straight segment"""
        a = self.point(start)
        b = self.point(end)
        if a.values == b.values:
            return 0.0
        path = PathSpec((a, b), 15, self.tolerances.max_subdivisions, self.tolerances.quadrature,
                        self.tolerances.quadrature_abs)
        return line_integral(self.heat_form, path, self.factor).value

    def entropy_near(self, point: PointLike, displacement: Sequence[float],
                     base: Optional[float] = None) -> float:
        """
        S(point + displacement) from S(point) and a short straight increment

        Finite differences built on this keep the quadrature error of the
        long path out of the difference quotient.
        """
        x = _values(self.model.coordinates, point)
        base = self.entropy(x) if base is None else base
        return base * math.exp(self.log_entropy_increment(x, x + np.asarray(displacement, dtype=float)))


def reconstruct_entropy(field: EntropyField, target: PointLike) -> float:
    """S(target) = S0 exp(S_hat(target) - S_hat(reference)) along the routed path"""
    return field.entropy(target)


# ---------------------------------------------------------------------------
# Finite-difference helpers
# ---------------------------------------------------------------------------

def _step(x: np.ndarray, k: int, relative: float) -> float:
    return relative * max(1.0, abs(x[k]))


def entropy_partial(field: EntropyField, point: PointLike, k: int,
                    base: Optional[float] = None, relative_step: Optional[float] = None) -> float:
    """
    dS/dx^k by a second-order difference of the reconstructed entropy

    Central when both neighbours are in the domain, one-sided otherwise.
    """
    x = _values(field.model.coordinates, point)
    base = field.entropy(x) if base is None else base
    h = _step(x, k, relative_step or field.tolerances.finite_difference_step)
    e = np.zeros_like(x)
    e[k] = h
    if field.model.contains(x - e) and field.model.contains(x + e):
        return (field.entropy_near(x, e, base) - field.entropy_near(x, -e, base)) / (2.0 * h)
    sign = 1.0 if field.model.contains(x + 2 * e) else -1.0
    s1 = field.entropy_near(x, sign * e, base)
    s2 = field.entropy_near(x, 2 * sign * e, base)
    return sign * (-3.0 * base + 4.0 * s1 - s2) / (2.0 * h)


@dataclass(frozen=True)
class TemperatureReport:
    point: Tuple[float, ...]
    temperature: float
    entropy: float
    factor: float
    entropy_u_derivative: float
    product: float              # dS/dU * T, should be 1
    passed: bool


def temperature_report(field: EntropyField, target: PointLike) -> TemperatureReport:
    """T = f/S with the check dS/dU * T = 1"""
    x = _values(field.model.coordinates, target)
    entropy = field.entropy(x)
    f = float(field.model.integrating_factor(x))
    temperature_value = f / entropy
    derivative = entropy_partial(field, x, 0, entropy)
    product = derivative * temperature_value
    passed = abs(product - 1.0) <= field.tolerances.derivative_check
    if not passed:
        logger.warning("dS/dU * T = %.12g at %s (expected 1)", product, field.point(x))
    return TemperatureReport(tuple(x), temperature_value, entropy, f, derivative, product, passed)


def temperature(field: EntropyField, target: PointLike) -> float:
    """Absolute temperature T = f/S at a target"""
    return temperature_report(field, target).temperature


@dataclass(frozen=True)
class GradientReport:
    point: Tuple[float, ...]
    closed_form: Tuple[float, ...]     # (S/f)(1, p, -xi...)
    finite_difference: Tuple[float, ...]
    relative_errors: Tuple[float, ...]
    passed: bool


def entropy_gradient(field: EntropyField, point: PointLike) -> GradientReport:
    """
    dS = (S/f) omega: closed-form gradient against finite differences
    """
    x = _values(field.model.coordinates, point)
    entropy = field.entropy(x)
    f = float(field.model.integrating_factor(x))
    closed = entropy / f * field.heat_form.evaluate(x)
    numeric = np.array([entropy_partial(field, x, k, entropy) for k in range(len(x))])
    scale = max(float(np.max(np.abs(closed))), 1e-300)
    errors = np.abs(numeric - closed) / np.maximum(np.abs(closed), 1e-12 * scale)
    passed = bool(np.all(errors <= field.tolerances.derivative_check))
    return GradientReport(tuple(x), tuple(closed.tolist()), tuple(numeric.tolist()),
                          tuple(errors.tolist()), passed)


def radial_degree(field: EntropyField, point: PointLike, step: float = 1e-3) -> float:
    """
    Degree q of S from d S_hat(e^t x)/dt at t = 0 (extensive S gives q = 1)
    """
    x = _values(field.model.coordinates, point)
    forward = field.log_entropy_increment(x, math.exp(step) * x)
    backward = field.log_entropy_increment(x, math.exp(-step) * x)
    return (forward - backward) / (2.0 * step)


@dataclass(frozen=True)
class ExtensivityReport:
    points: Tuple[Tuple[float, ...], ...]
    lambdas: Tuple[float, ...]
    deviations: Tuple[Tuple[float, ...], ...]    # |S(lx) - l S(x)| / (l S(x)), one row per point
    tolerance: float

    @property
    def worst(self) -> float:
        return max((max(row) for row in self.deviations), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def extensivity_check(field: EntropyField, points: Sequence[PointLike],
                      lambdas: Optional[Sequence[float]] = None) -> ExtensivityReport:
    """
    Compare S(lambda x) with lambda S(x) at each point and scale factor

    Args:
        field (EntropyField): Reconstructed entropy
        points: States to scale
        lambdas (sequence, optional): Scale factors, default tolerances.lambdas

    Returns:
        ExtensivityReport: Relative deviations against tolerances.extensivity
    """
    tol = field.tolerances
    lambdas = tuple(float(v) for v in (tol.lambdas if lambdas is None else lambdas))
    rows, deviations = [], []
    for point in points:
        x = _values(field.model.coordinates, point)
        entropy = field.entropy(x)
        row = []
        for factor in lambdas:
            expected = factor * entropy
            row.append(abs(field.entropy(factor * x) - expected) / abs(expected))
        rows.append(tuple(x.tolist()))
        deviations.append(tuple(row))
    report = ExtensivityReport(tuple(rows), lambdas, tuple(deviations), tol.extensivity)
    if not report.passed:
        logger.warning("S deviates from degree 1 by %.3g on %s", report.worst, field.model.name)
    return report


# ---------------------------------------------------------------------------
# Gibbs-Duhem
# ---------------------------------------------------------------------------

def gibbs_duhem_form(model: ThermoModel) -> PfaffianForm:
    """
    The one-form -(V dp - sum_i X^i dxi_i) / f, equal to d log(1/T) when it is exact
    """
    coordinates = model.coordinates
    coefficients = []
    for name in coordinates:
        term = mul(var(model.volume), model.pressure.differentiate(name))
        for extensive, force in zip(model.extensives, model.forces):
            term = sub(term, mul(var(extensive), force.differentiate(name)))
        coefficients.append(neg(term))
    numerator = PfaffianForm(coordinates, tuple(coefficients), 0.0, "gibbs_duhem")
    return numerator.divided_by(model.integrating_factor_expression, "d log(1/T)")


def gibbs_duhem_exactness(model: ThermoModel, points: Sequence[PointLike],
                          tolerances: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, object]:
    """Exactness residuals of the Gibbs-Duhem one-form at each point, as a report dict"""
    form = gibbs_duhem_form(model)
    entries, worst = [], 0.0
    for point in points:
        residuals = exactness_residuals(form, point)
        worst = max(worst, worst_residual(residuals))
        entries.append({
            "point": list(_values(model.coordinates, point)),
            "residuals": [{"pair": list(r.names), "raw": r.raw, "normalized": r.normalized}
                          for r in residuals],
        })
    return {"model": model.name, "worst": worst, "tolerance": tolerances.exactness,
            "exact": worst <= tolerances.exactness, "points": entries}


def gibbs_duhem_reconstruct(model: ThermoModel, path: PathSpec,
                            tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Delta log(1/T) = -integral of (V dp - sum_i X^i dxi_i)/f along a path

    Raises:
        NotExactError: If the one-form fails the mixed partial test at a waypoint
    """
    report = gibbs_duhem_exactness(model, path.waypoints, tolerances)
    if not report["exact"]:
        raise NotExactError(report, f"Gibbs-Duhem one-form of '{model.name}' is not exact "
                                    f"(worst residual {report['worst']:.3g})")
    validate_path(model, path, tolerances.path_samples)
    result = line_integral(gibbs_duhem_form(model), path)
    if not result.reliable:
        logger.warning("Gibbs-Duhem integral along %s is unreliable", path)
    return result.value


@dataclass(frozen=True)
class GibbsDuhemReport:
    points: Tuple[Tuple[float, ...], ...]
    residuals: Tuple[float, ...]            # max |component| per point
    exactness: Optional[Dict[str, object]] = None
    log_inverse_temperature: Tuple[float, ...] = ()   # log(1/T) - log(1/T_ref)

    @property
    def worst(self) -> float:
        return max(self.residuals, default=0.0)


def gibbs_duhem_components(field: EntropyField, point: PointLike) -> np.ndarray:
    """
    U d(1/T) + V d(p/T) - sum_i X^i d(xi_i/T) contracted with each coordinate direction

    1/T = S/f is differentiated by central differences of the
    reconstructed entropy.
    """
    model = field.model
    x = _values(model.coordinates, point)
    base = field.entropy(x)
    intensives = model.intensives

    def potentials(y, entropy):
        binding = dict(zip(model.coordinates, y))
        inverse_t = entropy / float(model.integrating_factor(binding))
        return np.array([inverse_t] + [inverse_t * e.evaluate(binding) for e in intensives])

    weights = np.concatenate(([x[0], x[1]], -x[2:]))
    components = np.zeros(len(x))
    for k in range(len(x)):
        h = _step(x, k, field.tolerances.finite_difference_step)
        e = np.zeros_like(x)
        e[k] = h
        upper = potentials(x + e, field.entropy_near(x, e, base))
        lower = potentials(x - e, field.entropy_near(x, -e, base))
        components[k] = float(np.dot(weights, (upper - lower) / (2.0 * h)))
    return components


def gibbs_duhem_residual(field: EntropyField, point: PointLike) -> float:
    """Largest absolute component of the Gibbs-Duhem one-form at a point"""
    return float(np.max(np.abs(gibbs_duhem_components(field, point))))


def gibbs_duhem_report(field: EntropyField, points: Sequence[PointLike]) -> GibbsDuhemReport:
    """Pointwise residuals, exactness residuals and reconstructed log(1/T) at sample points"""
    model = field.model
    arrays = [tuple(_values(model.coordinates, p)) for p in points]
    residuals = tuple(gibbs_duhem_residual(field, p) for p in arrays)
    exactness = gibbs_duhem_exactness(model, arrays, field.tolerances)
    logs = []
    if exactness["exact"]:
        for p in arrays:
            if p == field.reference.values:
                logs.append(0.0)
                continue
            path = route_path(model, field.reference, p, field.tolerances)
            logs.append(gibbs_duhem_reconstruct(model, path, field.tolerances))
    return GibbsDuhemReport(tuple(arrays), residuals, exactness, tuple(logs))


def main():
    """
    Command-line interface: reconstruct S and T of a bundled model at a state
    """
    from model_catalog import ModelCatalog

    catalog = ModelCatalog()
    if len(sys.argv) < 3:
        print("Usage: python3 entropy_reconstructor.py <model-name> <value> [value ...]")
        print("Example: python3 entropy_reconstructor.py photon_gas 16 1")
        sys.exit(1)

    try:
        model = catalog.get(sys.argv[1])
        field = EntropyField(model)
        target = [float(v) for v in sys.argv[2:]]
        value = field.evaluate(target)
        print(f"Path: {value.path or field.reference}")
        print(f"  - S_hat increment: {value.hat_s:.12g}")
        print(f"  - S: {value.entropy:.12g} (error {value.error:.2g})")
        print(f"  - T: {temperature(field, target):.12g}")
        if model.analytic_entropy is not None:
            print(f"  - analytic S: {model.analytic_entropy_at(target):.12g}")
        print("✓ Reconstruction complete" if value.reliable else "⚠ Quadrature hit its subdivision cap")
    except (ThermoFormError, ValueError) as e:
        print(f"✗ Error: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
