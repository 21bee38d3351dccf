#!/usr/bin/env python3
"""
Error Types for the Pfaffian Entropy Toolkit

Every failure raised by the library derives from ThermoFormError so that
the command-line front end can map it to an exit code in one place.
"""

from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple


class ThermoFormError(Exception):
    """Base class for all toolkit errors"""


# ---------------------------------------------------------------------------
# Expression language
# ---------------------------------------------------------------------------

class ExpressionError(ThermoFormError):
    """Problems with model expressions"""


class ExpressionSyntaxError(ExpressionError, ValueError):
    """
    Syntax error in an expression source string

    Args:
        message (str): Human readable description
        offset (int): Byte offset (UTF-8) where parsing stopped
        expected (Iterable[str]): Tokens that would have been accepted
        source (str, optional): The text being parsed
    """

    def __init__(self, message, offset, expected=(), source=None):
        self.offset = offset
        self.expected: FrozenSet[str] = frozenset(expected)
        self.source = source
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownFunctionError(ExpressionSyntaxError):
    """A call to a function other than ln() or exp()"""

    def __init__(self, name, offset, source=None):
        self.name = name
        super().__init__(f"unknown function '{name}'", offset, ("ln", "exp"), source)


class EvaluationError(ExpressionError):
    """Expression could not be evaluated"""


class MissingVariableError(EvaluationError, KeyError):
    """The binding does not cover a free variable"""

    def __init__(self, name):
        self.name = name
        super().__init__(f"no value bound for variable '{name}'")

    def __str__(self):
        return self.args[0]


class EvaluationDomainError(EvaluationError, ArithmeticError):
    """ln of a non-positive value, division by zero, bad power or overflow"""

    def __init__(self, operation, detail=""):
        self.operation = operation
        message = f"domain error in {operation}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Models and model files
# ---------------------------------------------------------------------------

class ModelValidationError(ThermoFormError, ValueError):
    """
    A thermodynamic model violates one of its structural requirements

    Args:
        message (str): What went wrong
        field (str, optional): Dotted model-file key of the offending entry
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message)


class ModelFileError(ModelValidationError):
    """
    Located diagnostic for a model file

    Args:
        path (str): Model file path
        key (str, optional): Dotted key inside the file (e.g. 'intensive.p')
        message (str): What went wrong
        offset (int, optional): Byte offset inside the expression string
    """

    def __init__(self, path, message, key=None, offset=None):
        self.path = str(path)
        self.key = key
        self.offset = offset
        location = self.path
        if key:
            location += f" [{key}]"
        if offset is not None:
            location += f" @ byte {offset}"
        super().__init__(f"{location}: {message}", key)


class UnsupportedModelError(ModelValidationError):
    """The requested transformation is not available for this model"""


# ---------------------------------------------------------------------------
# Forms, paths and quadrature
# ---------------------------------------------------------------------------

class FormError(ThermoFormError):
    """Problems with a Pfaffian form"""


class NotClosedError(FormError):
    """A potential was requested for a form that is not closed"""

    def __init__(self, residuals: Sequence[Any], message="form is not closed"):
        self.residuals = list(residuals)
        super().__init__(message)


class QuadratureRequiredError(FormError):
    """Euler's formula does not apply to coefficients of degree -1"""


class NotIntegrableError(FormError):
    """Frobenius residuals do not vanish on the requested path"""

    def __init__(self, residuals: Sequence[Any], message="heat form is not integrable"):
        self.residuals = list(residuals)
        super().__init__(message)


class NotExactError(FormError):
    """The Gibbs-Duhem right member is not an exact differential"""

    def __init__(self, report: Dict[str, Any], message="Gibbs-Duhem one-form is not exact"):
        self.report = report
        super().__init__(message)


class PathError(ThermoFormError):
    """Problems with a reversible path"""


class NonPositiveFactorError(PathError):
    """The integrating factor is not positive somewhere on a path"""

    def __init__(self, parameter: float, point: Tuple[float, ...], value: float,
                 segment: Optional[int] = None):
        self.parameter = parameter
        self.point = tuple(point)
        self.value = value
        self.segment = segment
        where = f"segment {segment}, " if segment is not None else ""
        super().__init__(
            f"integrating factor f = {value:.6g} <= 0 at {where}t = {parameter:.6g}, "
            f"point {self.point}"
        )


class PathRoutingError(PathError):
    """No candidate polyline avoids the obstruction"""

    def __init__(self, message, obstructions: Optional[List[str]] = None):
        self.obstructions = list(obstructions or [])
        super().__init__(message)


class PathCornerError(PathError):
    """The path velocity is undefined at a waypoint"""

    def __init__(self, parameter):
        self.parameter = parameter
        super().__init__(f"path parameter {parameter:.6g} is a waypoint corner; "
                         "request a one-sided value")


class QuadratureError(ThermoFormError):
    """Adaptive quadrature could not reach the requested tolerance"""


class NoSolutionError(ThermoFormError):
    """The requested level set is not attained along the fiber"""

    def __init__(self, message, attained_range: Tuple[float, float]):
        self.attained_range = attained_range
        super().__init__(f"{message} (attained range {attained_range[0]:.6g} .. "
                         f"{attained_range[1]:.6g})")


class ConfigurationError(ThermoFormError, ValueError):
    """Invalid tolerance configuration"""
