#!/usr/bin/env python3
"""
Expression Parser Module for the Pfaffian Entropy Toolkit

This module turns the text of a state equation into an expression tree.

Grammar (standard precedence, '^' right-associative):

    expression := term (('+' | '-') term)*
    term       := unary (('*' | '/') unary)*
    unary      := '-' unary | power
    power      := primary ('^' unary)?
    primary    := NUMBER | IDENTIFIER | ('ln' | 'exp') '(' expression ')'
                | '(' expression ')'

A minus sign written directly in front of a number literal produces a
negative constant, so printed negative constants read back unchanged.
Error offsets are byte offsets into the UTF-8 encoding of the source.
"""

import re
import sys
from dataclasses import dataclass
from typing import FrozenSet, List

from expressions import BinaryOp, Constant, Exp, Expression, Log, Negate, Power, Variable
from thermo_errors import ExpressionSyntaxError, ThermoFormError, UnknownFunctionError

TOKEN_PATTERN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[^\W\d]\w*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

FUNCTIONS = {"ln": Log, "exp": Exp}

OPERAND_START = frozenset({"number", "identifier", "(", "-"})
OPERATORS = frozenset({"+", "-", "*", "/", "^"})
END = "end of input"


@dataclass(frozen=True)
class Token:
    kind: str        # 'number', 'identifier', an operator character, or END
    text: str
    offset: int      # byte offset


def tokenize(source: str) -> List[Token]:
    """
    Split source text into tokens

    Args:
        source (str): Expression text

    Returns:
        List[Token]: Tokens, terminated by an END token
    """
    tokens = []
    position = 0
    byte_offset = 0
    while position < len(source):
        match = TOKEN_PATTERN.match(source, position)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character {source[position]!r}",
                                        byte_offset, OPERAND_START | OPERATORS, source)
        text = match.group()
        group = match.lastgroup
        if group == "number":
            tokens.append(Token("number", text, byte_offset))
        elif group == "name":
            tokens.append(Token("identifier", text, byte_offset))
        elif group == "op":
            tokens.append(Token(text, text, byte_offset))
        position = match.end()
        byte_offset += len(text.encode("utf-8"))
    tokens.append(Token(END, "", byte_offset))
    return tokens


class ExpressionParser:
    """
    A class to handle parsing of state-equation source text
    """

    def __init__(self, source: str):
        """
        Initialize the parser

        Args:
            source (str): Expression text
        """
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _continuations(self) -> FrozenSet[str]:
        closing = {")"} if self.depth else {END}
        return OPERATORS | closing

    def _fail(self, message, expected):
        token = self.current
        found = "end of input" if token.kind == END else repr(token.text)
        raise ExpressionSyntaxError(f"{message}, found {found}", token.offset, expected, self.source)

    def parse(self) -> Expression:
        """
        Parse the whole source

        Returns:
            Expression: The expression tree
        """
        tree = self._expression()
        if self.current.kind != END:
            self._fail("unexpected token", self._continuations())
        return tree

    def _expression(self) -> Expression:
        left = self._term()
        while self.current.kind in ("+", "-"):
            operator = self._advance().kind
            left = BinaryOp(operator, left, self._term())
        return left

    def _term(self) -> Expression:
        left = self._unary()
        while self.current.kind in ("*", "/"):
            operator = self._advance().kind
            left = BinaryOp(operator, left, self._unary())
        return left

    def _unary(self) -> Expression:
        if self.current.kind == "-":
            self._advance()
            literal = self.current.kind == "number"
            operand = self._unary()
            if literal and isinstance(operand, Constant):
                return Constant(-operand.value)
            return Negate(operand)
        return self._power()

    def _power(self) -> Expression:
        base = self._primary()
        if self.current.kind == "^":
            self._advance()
            return Power(base, self._unary())
        return base

    def _primary(self) -> Expression:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Constant(float(token.text))
        if token.kind == "identifier":
            self._advance()
            if self.current.kind == "(":
                if token.text not in FUNCTIONS:
                    raise UnknownFunctionError(token.text, token.offset, self.source)
                self._advance()
                argument = self._parenthesized()
                return FUNCTIONS[token.text](argument)
            if token.text in FUNCTIONS:
                self._fail(f"function '{token.text}' must be called", frozenset({"("}))
            return Variable(token.text)
        if token.kind == "(":
            self._advance()
            return self._parenthesized()
        self._fail("expected an operand", OPERAND_START)

    def _parenthesized(self) -> Expression:
        self.depth += 1
        inner = self._expression()
        if self.current.kind != ")":
            self._fail("unbalanced parenthesis", self._continuations())
        self._advance()
        self.depth -= 1
        return inner


def parse(source: str) -> Expression:
    """
    Parse expression source text

    Args:
        source (str): Text in the expression grammar

    Returns:
        Expression: The expression tree

    Raises:
        ExpressionSyntaxError: On malformed input (with offset and expected tokens)
        UnknownFunctionError: On a call to anything but ln() or exp()
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    return ExpressionParser(source).parse()


def main():
    """
    Command-line interface: parse, print and optionally evaluate an expression
    """
    if len(sys.argv) < 2:
        print("Usage: python3 expression_parser.py <expression> [name=value ...]")
        print("Example: python3 expression_parser.py 'U/(3*V)' U=3 V=1")
        sys.exit(1)

    try:
        tree = parse(sys.argv[1])
        print(f"✓ Parsed: {tree}")
        if len(sys.argv) > 2:
            binding = {}
            for item in sys.argv[2:]:
                name, _, value = item.partition("=")
                binding[name] = float(value)
            print(f"  - Value: {tree.evaluate(binding)!r}")
    except ThermoFormError as e:
        print(f"✗ Error: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
