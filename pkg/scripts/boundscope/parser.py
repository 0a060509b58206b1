"""Recursive-descent parser for polynomial expressions such as "64*(x1^4*x2^2) - 48*x1^2*x2^2 + 1".

Grammar (precedence ^ > unary - > * / > binary + -):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-' | '+') factor | atom ('^' uint)?
    atom   := number | var | '(' expr ')'
    var    := 'x' uint

Division is only accepted by a constant subexpression (e.g. 5^6/6) and is
folded into the coefficient.
"""

from __future__ import annotations

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from scripts.boundscope import ParseError
from scripts.boundscope.poly import Polynomial, power

logger = logging.getLogger(__name__)

MAX_DEPTH = 200
MAX_EXPONENT = 256

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<var>x\d+)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str      # "number" | "var" | "op" | "end"
    text: str
    position: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(f"Unexpected character {source[pos]!r}", pos, source)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


# ── Expression tree ─────────────────────────────────────────


class Node(ABC):
    """Parsed expression: expands exactly or evaluates numerically."""

    @abstractmethod
    def expand(self, n: int) -> Polynomial:
        ...

    @abstractmethod
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        ...


@dataclass(frozen=True)
class Number(Node):
    value: float

    def expand(self, n):
        return Polynomial.constant(n, self.value)

    def evaluate(self, points):
        return np.full(points.shape[:-1], self.value)


@dataclass(frozen=True)
class Variable(Node):
    index: int  # zero-based

    def expand(self, n):
        return Polynomial.variable(n, self.index)

    def evaluate(self, points):
        return points[..., self.index]


@dataclass(frozen=True)
class Negate(Node):
    operand: Node

    def expand(self, n):
        return -self.operand.expand(n)

    def evaluate(self, points):
        return -self.operand.evaluate(points)


@dataclass(frozen=True)
class Power(Node):
    base: Node
    exponent: int

    def expand(self, n):
        return power(self.base.expand(n), self.exponent)

    def evaluate(self, points):
        return self.base.evaluate(points) ** self.exponent


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    def expand(self, n):
        left, right = self.left.expand(n), self.right.expand(n)
        if self.op == "+":
            return left + right
        if self.op == "-":
            return left - right
        if self.op == "*":
            return left * right
        return left / right.constant_value

    def evaluate(self, points):
        left, right = self.left.evaluate(points), self.right.evaluate(points)
        if self.op == "+":
            return left + right
        if self.op == "-":
            return left - right
        if self.op == "*":
            return left * right
        return left / right


# ── Parser ──────────────────────────────────────────────────


class Parser:
    """Recursive-descent parser over the token list of one expression."""

    def __init__(self, source: str, n: int):
        self.source = source
        self.n = n
        self._tokens = tokenize(source)
        self._index = 0
        self._depth = 0

    @property
    def token(self) -> Token:
        return self._tokens[self._index]

    def advance(self) -> Token:
        token = self.token
        if token.kind != "end":
            self._index += 1
        return token

    def _error(self, message: str, token: Token | None = None) -> ParseError:
        token = token or self.token
        return ParseError(message, token.position, self.source)

    def _is_op(self, *ops: str) -> bool:
        return self.token.kind == "op" and self.token.text in ops

    def parse(self) -> Node:
        if self.token.kind == "end":
            raise self._error("Empty expression")
        node = self.expr()
        if self.token.kind in ("number", "var") or self._is_op("("):
            raise self._error(f"Implicit multiplication before {self.token.text!r} is not supported")
        if self.token.kind != "end":
            raise self._error(f"Unexpected {self.token.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._is_op("+", "-"):
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self._is_op("*", "/"):
            op_token = self.advance()
            right = self.factor()
            if op_token.text == "/":
                divisor = right.expand(self.n)
                if not divisor.is_constant:
                    raise self._error("Division by a non-constant expression", op_token)
                if divisor.constant_value == 0.0:
                    raise self._error("Division by zero", op_token)
            node = BinaryOp(op_token.text, node, right)
        return node

    def factor(self) -> Node:
        if self._is_op("-", "+"):
            sign = self.advance().text
            self._enter()
            operand = self.factor()
            self._depth -= 1
            return Negate(operand) if sign == "-" else operand
        node = self.atom()
        if self._is_op("^"):
            self.advance()
            node = Power(node, self._exponent())
        return node

    def _exponent_literal(self) -> int:
        token = self.token
        if self._is_op("-"):
            raise self._error("Negative exponent")
        if token.kind != "number":
            raise self._error("Exponent must be a nonnegative integer literal")
        if not token.text.isdigit():
            raise self._error(f"Non-integer exponent {token.text!r}")
        self.advance()
        return int(token.text)

    def _exponent(self) -> int:
        start = self.token
        literals = [self._exponent_literal()]
        depth = self._depth
        while self._is_op("^"):
            self.advance()
            self._enter()
            literals.append(self._exponent_literal())
        self._depth = depth

        # right-associative: 2^3^2 == 2^9
        value = literals[-1]
        if value > MAX_EXPONENT and len(literals) == 1:
            raise ParseError(f"Exponent {value} exceeds {MAX_EXPONENT}", start.position, self.source)
        for base in reversed(literals[:-1]):
            value = self._bounded_power(base, value, start)
        return value

    def _bounded_power(self, base: int, exponent: int, start: Token) -> int:
        if base <= 1:
            return 1 if exponent == 0 else base
        result = 1
        for _ in range(exponent):
            result *= base
            if result > MAX_EXPONENT:
                raise ParseError(f"Exponent {base}^{exponent} exceeds {MAX_EXPONENT}", start.position, self.source)
        return result

    def atom(self) -> Node:
        token = self.token
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "var":
            index = int(token.text[1:])
            if not 1 <= index <= self.n:
                raise self._error(f"Variable {token.text} outside x1..x{self.n}")
            self.advance()
            return Variable(index - 1)
        if self._is_op("("):
            self.advance()
            self._enter()
            node = self.expr()
            self._depth -= 1
            if not self._is_op(")"):
                raise self._error("Expected ')'")
            self.advance()
            return node
        if token.kind == "end":
            raise self._error("Unexpected end of expression")
        raise self._error(f"Unexpected {token.text!r}")

    def _enter(self) -> None:
        self._depth += 1
        if self._depth > MAX_DEPTH:
            raise self._error("Expression nested too deeply")


def parse_expression(text: str, n: int) -> Node:
    """Parse text into an expression tree over variables x1..xn."""
    return Parser(text, n).parse()


def parse_polynomial(text: str, n: int) -> Polynomial:
    """Parse and expand text into a Polynomial of dimension n."""
    poly = parse_expression(text, n).expand(n)
    logger.debug("Parsed %r -> %r", text, poly)
    return poly
