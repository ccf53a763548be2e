"""Recursive-descent parser shared by expressions, phase polynomials and operators.

Grammar::

    expr     := ['+'|'-'] term { ('+'|'-') term }
    term     := factor { ('*'|'/') factor }
    factor   := base [ '^' exponent ]
    base     := number | name | '(' expr ')' | '{' expr ',' expr '}'
    exponent := ['-'] integer | '(' ['-'] integer [ '/' integer ] ')'

Products are built left to right, which matters for operators.  Braces denote
the anticommutator and are only accepted by rings that define one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .symexpr import Expression, ExpressionError, ParseError

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the pattern always matches one char
            raise ParseError("unexpected input", pos)
        num, name, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            tokens.append(("num", num, start))
        elif name is not None:
            tokens.append(("name", name, start))
        elif op is not None:
            if op not in "+-*/^(){},":
                raise ParseError(f"unexpected character {op!r}", start)
            tokens.append(("op", op, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


@dataclass
class Ring:
    """How parsed atoms map into a target algebra."""

    atoms: dict[str, Any]
    lift: Callable[[Expression], Any]
    lower: Callable[[Any], Expression | None]
    anticommutator: Callable[[Any, Any], Any] | None = None
    name: str = "expression"
    extra: dict = field(default_factory=dict)


class Parser:
    def __init__(self, text: str, ring: Ring):
        self.text = text
        self.ring = ring
        self.tokens = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, value: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == value

    def expect(self, value: str):
        kind, val, pos = self.take()
        if kind != "op" or val != value:
            found = val or "end of input"
            raise ParseError(f"expected {value!r}, found {found!r}", pos)

    # grammar
    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty input", 0)
        value = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return value

    def expr(self):
        negate = False
        if self.at("-") or self.at("+"):
            negate = self.take()[1] == "-"
        value = self.term()
        if negate:
            value = -value
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.factor()
        while self.at("*") or self.at("/"):
            op, pos = self.take()[1], self.peek()[2]
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                value = value * self._inverse(rhs, pos)
        return value

    def factor(self):
        pos = self.peek()[2]
        value = self.base()
        if self.at("^"):
            self.take()
            exp = self.exponent()
            value = self._power(value, exp, pos)
        return value

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return self.ring.lift(Expression.const(Fraction(val)))
        if kind == "name":
            if val not in self.ring.atoms:
                raise ParseError(f"unknown symbol {val!r} in {self.ring.name}", pos)
            return self.ring.atoms[val]
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind == "op" and val == "{":
            if self.ring.anticommutator is None:
                raise ParseError(f"anticommutator braces are not valid in {self.ring.name}", pos)
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("}")
            return self.ring.anticommutator(a, b)
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)

    def _int(self) -> int:
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        kind, val, pos = self.take()
        if kind != "num" or "." in val:
            raise ParseError("expected an integer exponent", pos)
        return sign * int(val)

    def exponent(self) -> Fraction:
        if self.at("("):
            self.take()
            num = self._int()
            den = 1
            if self.at("/"):
                self.take()
                pos = self.peek()[2]
                den = self._int()
                if den == 0:
                    raise ParseError("zero denominator in exponent", pos)
            self.expect(")")
            return Fraction(num, den)
        return Fraction(self._int())

    # semantic helpers
    def _inverse(self, value, pos):
        expr = self.ring.lower(value)
        if expr is None:
            raise ParseError("division is only defined by a function of x, y", pos)
        if expr.is_zero():
            raise ParseError("division by zero", pos)
        try:
            return self.ring.lift(expr.inverse())
        except ExpressionError as exc:
            raise ParseError(str(exc), pos) from None

    def _power(self, value, exp: Fraction, pos):
        if exp.denominator == 1 and exp >= 0:
            result = self.ring.lift(Expression.const(1))
            for _ in range(int(exp)):
                result = result * value
            return result
        expr = self.ring.lower(value)
        if expr is None:
            raise ParseError("negative or fractional powers need a function of x, y", pos)
        if expr.is_zero():
            raise ParseError("division by zero", pos)
        try:
            return self.ring.lift(expr ** exp)
        except ExpressionError as exc:
            raise ParseError(str(exc), pos) from None


EXPRESSION_RING = Ring(
    atoms={n: Expression.var(n) for n in ("x", "y", "alpha", "hbar", "i")},
    lift=lambda e: e,
    lower=lambda e: e,
)


def parse_expression(text: str) -> Expression:
    return Parser(text, EXPRESSION_RING).parse()
