#!/usr/bin/env python3
"""
Expression Module for the Pfaffian Entropy Toolkit

This module holds the immutable expression trees in which model state
equations are written, together with evaluation (scalar or numpy-array
bindings), exact symbolic differentiation, substitution and printing.
Printing produces text that expression_parser.parse() reads back into a
structurally equal tree.
"""

import math
from dataclasses import dataclass
from functools import singledispatch
from typing import FrozenSet, Mapping, Union

import numpy as np

from thermo_errors import EvaluationDomainError, MissingVariableError

Value = Union[float, np.ndarray]

ADDITIVE, MULTIPLICATIVE, UNARY, POWER, ATOM = 1, 2, 3, 4, 5


class Expression:
    """
    Base class of every expression node

    Nodes are frozen dataclasses; equality is structural and instances are
    hashable, so expressions can be shared freely between threads.
    """

    kind = "expression"

    @property
    def precedence(self) -> int:
        return ATOM

    def evaluate(self, binding: Mapping[str, Value]) -> Value:
        """
        Evaluate the expression at a binding

        Args:
            binding (Mapping[str, float | ndarray]): Value for every free
                variable; arrays broadcast against each other

        Returns:
            float | ndarray: The value (a float when every input is scalar)
        """
        return _to_output(self._evaluate(binding))

    def _evaluate(self, binding):
        raise NotImplementedError

    def free_variables(self) -> FrozenSet[str]:
        return frozenset()

    def differentiate(self, variable: str) -> "Expression":
        return differentiate(self, variable)

    def substitute(self, mapping: Mapping[str, "Expression"]) -> "Expression":
        return self


@dataclass(frozen=True)
class Constant(Expression):
    value: float

    kind = "constant"

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value):
            raise ValueError(f"constants must be finite, got {self.value!r}")
        object.__setattr__(self, "value", value)

    @property
    def precedence(self):
        return ATOM if self.value >= 0 else UNARY

    def _evaluate(self, binding):
        return self.value

    def __str__(self):
        return _format_number(self.value)


@dataclass(frozen=True)
class Variable(Expression):
    name: str

    kind = "variable"

    def _evaluate(self, binding):
        try:
            value = binding[self.name]
        except KeyError:
            raise MissingVariableError(self.name) from None
        if isinstance(value, np.ndarray):
            return value.astype(float, copy=False)
        return float(value)

    def free_variables(self):
        return frozenset((self.name,))

    def substitute(self, mapping):
        return mapping.get(self.name, self)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Negate(Expression):
    operand: Expression

    kind = "unary"

    @property
    def precedence(self):
        return UNARY

    def _evaluate(self, binding):
        return -self.operand._evaluate(binding)

    def free_variables(self):
        return self.operand.free_variables()

    def substitute(self, mapping):
        return neg(self.operand.substitute(mapping))

    def __str__(self):
        inner = str(self.operand)
        # a bare number after '-' would read back as a negative constant
        if self.operand.precedence < UNARY or isinstance(self.operand, Constant):
            inner = f"({inner})"
        return f"-{inner}"


@dataclass(frozen=True)
class BinaryOp(Expression):
    operator: str
    left: Expression
    right: Expression

    kind = "binary"

    def __post_init__(self):
        if self.operator not in "+-*/" or len(self.operator) != 1:
            raise ValueError(f"unsupported binary operator {self.operator!r}")

    @property
    def precedence(self):
        return ADDITIVE if self.operator in "+-" else MULTIPLICATIVE

    def _evaluate(self, binding):
        left = self.left._evaluate(binding)
        right = self.right._evaluate(binding)
        with np.errstate(all="ignore"):
            if self.operator == "+":
                result = np.add(left, right)
            elif self.operator == "-":
                result = np.subtract(left, right)
            elif self.operator == "*":
                result = np.multiply(left, right)
            else:
                if np.any(np.asarray(right) == 0.0):
                    raise EvaluationDomainError("division", "division by zero")
                result = np.divide(left, right)
        return _require_finite(result, self.operator)

    def free_variables(self):
        return self.left.free_variables() | self.right.free_variables()

    def substitute(self, mapping):
        combine = {"+": add, "-": sub, "*": mul, "/": div}[self.operator]
        return combine(self.left.substitute(mapping), self.right.substitute(mapping))

    def __str__(self):
        left = str(self.left)
        right = str(self.right)
        if self.left.precedence < self.precedence:
            left = f"({left})"
        if self.right.precedence <= self.precedence or self.right.precedence == UNARY:
            right = f"({right})"
        return f"{left} {self.operator} {right}"


@dataclass(frozen=True)
class Power(Expression):
    base: Expression
    exponent: Expression

    kind = "power"

    @property
    def precedence(self):
        return POWER

    def _evaluate(self, binding):
        base = np.asarray(self.base._evaluate(binding), dtype=float)
        exponent = np.asarray(self.exponent._evaluate(binding), dtype=float)
        integral = np.floor(exponent) == exponent
        if np.any(~integral & (base <= 0.0)):
            raise EvaluationDomainError("power", "non-integer power of a non-positive base")
        if np.any((base == 0.0) & (exponent < 0.0)):
            raise EvaluationDomainError("power", "zero raised to a negative power")
        with np.errstate(all="ignore"):
            result = np.power(base, exponent)
        return _require_finite(result, "^")

    def free_variables(self):
        return self.base.free_variables() | self.exponent.free_variables()

    def substitute(self, mapping):
        return power(self.base.substitute(mapping), self.exponent.substitute(mapping))

    def __str__(self):
        base = str(self.base)
        exponent = str(self.exponent)
        if self.base.precedence <= POWER:
            base = f"({base})"
        if self.exponent.precedence < POWER:
            exponent = f"({exponent})"
        return f"{base}^{exponent}"


@dataclass(frozen=True)
class Log(Expression):
    argument: Expression

    kind = "log"

    def _evaluate(self, binding):
        argument = self.argument._evaluate(binding)
        if np.any(np.asarray(argument) <= 0.0):
            raise EvaluationDomainError("ln", "logarithm of a non-positive value")
        with np.errstate(all="ignore"):
            result = np.log(argument)
        return _require_finite(result, "ln")

    def free_variables(self):
        return self.argument.free_variables()

    def substitute(self, mapping):
        return ln(self.argument.substitute(mapping))

    def __str__(self):
        return f"ln({self.argument})"


@dataclass(frozen=True)
class Exp(Expression):
    argument: Expression

    kind = "exp"

    def _evaluate(self, binding):
        with np.errstate(all="ignore"):
            result = np.exp(self.argument._evaluate(binding))
        return _require_finite(result, "exp")

    def free_variables(self):
        return self.argument.free_variables()

    def substitute(self, mapping):
        return exp(self.argument.substitute(mapping))

    def __str__(self):
        return f"exp({self.argument})"


ZERO = Constant(0.0)
ONE = Constant(1.0)


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 2.0 ** 53:
        text = str(int(value))
    else:
        text = repr(value)
    return text


def _require_finite(result, operation):
    if not np.all(np.isfinite(result)):
        raise EvaluationDomainError(operation, "result is not finite")
    return result


def _to_output(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


# ---------------------------------------------------------------------------
# Simplifying constructors (constant folding and 0/1 identities only)
# ---------------------------------------------------------------------------

def const(value) -> Constant:
    return Constant(float(value))


def _is_constant(expr, value=None):
    return isinstance(expr, Constant) and (value is None or expr.value == value)


def neg(a: Expression) -> Expression:
    if isinstance(a, Constant):
        return Constant(-a.value)
    if isinstance(a, Negate):
        return a.operand
    return Negate(a)


def add(a: Expression, b: Expression) -> Expression:
    if _is_constant(a) and _is_constant(b):
        return Constant(a.value + b.value)
    if _is_constant(a, 0.0):
        return b
    if _is_constant(b, 0.0):
        return a
    return BinaryOp("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if _is_constant(a) and _is_constant(b):
        return Constant(a.value - b.value)
    if _is_constant(b, 0.0):
        return a
    if _is_constant(a, 0.0):
        return neg(b)
    return BinaryOp("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if _is_constant(a) and _is_constant(b):
        return Constant(a.value * b.value)
    if _is_constant(a, 0.0) or _is_constant(b, 0.0):
        return ZERO
    if _is_constant(a, 1.0):
        return b
    if _is_constant(b, 1.0):
        return a
    if _is_constant(a, -1.0):
        return neg(b)
    if _is_constant(b, -1.0):
        return neg(a)
    return BinaryOp("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if _is_constant(b, 0.0):
        return BinaryOp("/", a, b)
    if _is_constant(a) and _is_constant(b):
        return Constant(a.value / b.value)
    if _is_constant(a, 0.0):
        return ZERO
    if _is_constant(b, 1.0):
        return a
    return BinaryOp("/", a, b)


def power(a: Expression, b: Expression) -> Expression:
    if _is_constant(b, 0.0):
        return ONE
    if _is_constant(b, 1.0):
        return a
    if _is_constant(a, 1.0):
        return ONE
    if _is_constant(a) and _is_constant(b):
        if a.value > 0 or (float(b.value).is_integer() and (a.value != 0 or b.value > 0)):
            try:
                folded = a.value ** b.value
            except OverflowError:
                folded = math.inf
            if isinstance(folded, float) and math.isfinite(folded):
                return Constant(folded)
    return Power(a, b)


def ln(a: Expression) -> Expression:
    if _is_constant(a) and a.value > 0:
        return Constant(math.log(a.value))
    return Log(a)


def exp(a: Expression) -> Expression:
    if _is_constant(a, 0.0):
        return ONE
    return Exp(a)


def var(name: str) -> Variable:
    return Variable(name)


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

@singledispatch
def differentiate(expr: Expression, variable: str) -> Expression:
    """
    Exact partial derivative of an expression

    Args:
        expr (Expression): Expression to differentiate
        variable (str): Name of the variable

    Returns:
        Expression: The derivative, lightly simplified
    """
    raise TypeError(f"cannot differentiate {type(expr).__name__}")


@differentiate.register
def _(expr: Constant, variable):
    return ZERO


@differentiate.register
def _(expr: Variable, variable):
    return ONE if expr.name == variable else ZERO


@differentiate.register
def _(expr: Negate, variable):
    return neg(differentiate(expr.operand, variable))


@differentiate.register
def _(expr: BinaryOp, variable):
    a, b = expr.left, expr.right
    da = differentiate(a, variable)
    db = differentiate(b, variable)
    if expr.operator == "+":
        return add(da, db)
    if expr.operator == "-":
        return sub(da, db)
    if expr.operator == "*":
        return add(mul(da, b), mul(a, db))
    # quotient rule
    return sub(div(da, b), div(mul(a, db), power(b, Constant(2.0))))


@differentiate.register
def _(expr: Power, variable):
    a, b = expr.base, expr.exponent
    da = differentiate(a, variable)
    if variable not in b.free_variables():
        return mul(mul(b, power(a, sub(b, ONE))), da)
    db = differentiate(b, variable)
    return mul(expr, add(mul(db, ln(a)), div(mul(b, da), a)))


@differentiate.register
def _(expr: Log, variable):
    return div(differentiate(expr.argument, variable), expr.argument)


@differentiate.register
def _(expr: Exp, variable):
    return mul(expr, differentiate(expr.argument, variable))


def evaluate(expr: Expression, binding: Mapping[str, Value]) -> Value:
    """Module-level alias of Expression.evaluate"""
    return expr.evaluate(binding)


def to_source(expr: Expression) -> str:
    """Printable source text that parses back to an equal tree"""
    return str(expr)

