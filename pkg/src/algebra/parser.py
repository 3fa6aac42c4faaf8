"""Text grammar for series and forms.

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := NUMBER | z<k> | w<k> | dz<k> | dw<k> | '(' expr ')'

NUMBER is ``p`` or ``p/q``. ``*`` between forms is the wedge product. A negative
exponent inverts a unit first.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from src.algebra.forms import Form
from src.algebra.ring import RingSpec, TruncatedSeries
from src.errors import DegreeOverflow, ParseError

logger = logging.getLogger(__name__)

TOKEN_PATTERN = re.compile(
    r"(?P<number>\d+(?:/\d+)?)"
    r"|(?P<form>d[zw]\d+)"
    r"|(?P<var>[zw]\d+)"
    r"|(?P<op>[-+*^()])"
    r"|(?P<space>\s+)"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        if match is None:
            raise ParseError(f"unexpected character {text[position]!r}", position)
        kind = match.lastgroup
        if kind != "space":
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class ExpressionParser:
    """Recursive-descent parser producing Forms over one ring.

    Each factor also reports its literal degree (None once parentheses are involved),
    so that a literal monomial beyond the truncation is rejected instead of silently
    truncated.
    """

    def __init__(self, text: str, ring: RingSpec, allow_forms: bool = True):
        self.text = text
        self.ring = ring
        self.allow_forms = allow_forms
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            raise ParseError(f"expected {text!r}", self.current.offset)
        return self.advance()

    def parse(self) -> Form:
        if self.current.kind == "end":
            raise ParseError("empty expression", self.current.offset)
        value = self.expression()
        if self.current.kind != "end":
            raise ParseError(f"unexpected {self.current.text!r}", self.current.offset)
        return value

    def expression(self) -> Form:
        value = self.term()
        while self.current.text in ("+", "-"):
            operator = self.advance().text
            right = self.term()
            value = value + right if operator == "+" else value - right
        return value

    def term(self) -> Form:
        start = self.current.offset
        value, degree = self.unary()
        while self.current.text == "*":
            self.advance()
            factor, factor_degree = self.unary()
            value = value.wedge(factor)
            degree = None if degree is None or factor_degree is None else degree + factor_degree
        if degree is not None and degree > self.ring.truncation:
            raise DegreeOverflow(
                f"monomial of degree {degree} exceeds truncation {self.ring.truncation}", start
            )
        return value

    def unary(self) -> Tuple[Form, Optional[int]]:
        if self.current.text == "-":
            self.advance()
            value, degree = self.unary()
            return -value, degree
        return self.power()

    def power(self) -> Tuple[Form, Optional[int]]:
        start = self.current.offset
        base, degree = self.atom()
        if self.current.text != "^":
            return base, degree
        self.advance()
        negative = False
        if self.current.text == "-":
            self.advance()
            negative = True
        if self.current.kind != "number" or "/" in self.current.text:
            raise ParseError("expected integer exponent", self.current.offset)
        exponent = int(self.advance().text)
        if negative:
            exponent = -exponent
        if set(base.terms) - {0}:
            raise ParseError("exponent applied to a form of positive degree", start)
        value = Form.scalar(base.function_part().power(exponent))
        literal = degree * exponent if degree is not None and exponent >= 0 else None
        return value, literal

    def atom(self) -> Tuple[Form, Optional[int]]:
        token = self.current
        if token.kind == "number":
            self.advance()
            numerator, _, denominator = token.text.partition("/")
            if denominator and int(denominator) == 0:
                raise ParseError("zero denominator", token.offset)
            value = Fraction(int(numerator), int(denominator or 1))
            return Form.constant(self.ring, value), 0
        if token.kind == "var":
            self.advance()
            kind, index = token.text[0], int(token.text[1:])
            self._check_index(index, token)
            return Form.scalar(TruncatedSeries.variable(self.ring, kind, index)), 1
        if token.kind == "form":
            if not self.allow_forms:
                raise ParseError(f"form generator {token.text} in a function expression", token.offset)
            self.advance()
            kind, index = token.text[1], int(token.text[2:])
            self._check_index(index, token)
            return Form.generator(self.ring, kind, index), 0
        if token.text == "(":
            self.advance()
            value = self.expression()
            self.expect(")")
            return value, None
        if token.kind == "end":
            raise ParseError("unexpected end of input", token.offset)
        raise ParseError(f"unexpected {token.text!r}", token.offset)

    def _check_index(self, index: int, token: Token) -> None:
        if not 1 <= index <= self.ring.num_vars:
            raise ParseError(f"variable {token.text} outside 1..{self.ring.num_vars}", token.offset)


def parse_form(text: str, ring: RingSpec) -> Form:
    return ExpressionParser(text, ring).parse()


def parse_series(text: str, ring: RingSpec) -> TruncatedSeries:
    """Parse a function expression; form generators are rejected."""
    return ExpressionParser(text, ring, allow_forms=False).parse().function_part()

