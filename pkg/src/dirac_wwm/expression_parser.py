"""
Expression Parser - text to Symbol

Grammar:
    atoms      integer literals, `hbar`, `i`, coordinates q<k> / p<k> (1 <= k <= n)
    operators  + - * / ^ with the usual precedence; ^ binds tightest and is
               right-associative; unary minus binds below * and /
    parens     ( ... )

`/` is only allowed by a nonzero hbar-free constant, `^` only by a
non-negative integer constant, and implicit multiplication ("2q1") is a
syntax error. Rational literals are written as divisions: 3/4.

The parser is a Pratt (top-down operator precedence) parser that evaluates
directly into expanded Symbols, so the result is always canonical.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List

from sympy.polys.domains import QQ_I

from .errors import ExpressionParseError
from .symbol_algebra import IMAGINARY_UNIT, PhaseSpace, Symbol, scalar_parts


class TokenType(Enum):
    """Token type for expression segmentation."""
    NUMBER = 'number'
    NAME = 'name'
    OPERATOR = 'operator'
    LPAREN = 'lparen'
    RPAREN = 'rparen'
    END = 'end'


@dataclass
class Token:
    """Represents a token in the expression."""
    text: str
    start: int
    token_type: TokenType


TOKEN_PATTERN = re.compile(
    r'(?P<space>\s+)'
    r'|(?P<number>\d+)'
    r'|(?P<name>[A-Za-z_][A-Za-z0-9_]*)'
    r'|(?P<operator>[-+*/^])'
    r'|(?P<lparen>\()'
    r'|(?P<rparen>\))'
    r'|(?P<bad>.)'
)

COORDINATE_PATTERN = re.compile(r'^([qp])([1-9][0-9]*)$')

# Left binding powers of infix operators
INFIX_BINDING: Dict[str, int] = {
    '+': 10,
    '-': 10,
    '*': 20,
    '/': 20,
    '^': 30,
}
UNARY_MINUS_BINDING = 15
RIGHT_ASSOCIATIVE = {'^'}


def tokenize_expression(text: str) -> List[Token]:
    """
    Split an expression into tokens, ending with an END token.

    Raises:
        ExpressionParseError: on characters outside the grammar
    """
    tokens: List[Token] = []
    for match in TOKEN_PATTERN.finditer(text):
        kind = match.lastgroup
        if kind == 'space':
            continue
        if kind == 'bad':
            raise ExpressionParseError(f"unexpected character {match.group()!r}", text, match.start())
        tokens.append(Token(match.group(), match.start(), TokenType(kind)))
    tokens.append(Token('', len(text), TokenType.END))
    return tokens


class ExpressionParser:
    """Pratt parser evaluating an expression into a Symbol of one phase space."""

    def __init__(self, text: str, space: PhaseSpace):
        self.text = text
        self.space = space
        self.tokens = tokenize_expression(text)
        self.index = 0
        self._infix: Dict[str, Callable[[Token, Symbol], Symbol]] = {
            '+': self._add,
            '-': self._sub,
            '*': self._mul,
            '/': self._div,
            '^': self._pow,
        }

    def error(self, message: str, position: int) -> ExpressionParseError:
        return ExpressionParseError(message, self.text, position)

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        if token.token_type is not TokenType.END:
            self.index += 1
        return token

    def parse(self) -> Symbol:
        if self.peek().token_type is TokenType.END:
            raise self.error("empty expression", 0)
        result = self.expression(0)
        token = self.peek()
        if token.token_type is not TokenType.END:
            raise self.error(f"unexpected {token.text!r}", token.start)
        return result

    def expression(self, right_binding: int) -> Symbol:
        left = self.prefix(self.advance())
        while True:
            token = self.peek()
            if token.token_type in (TokenType.NUMBER, TokenType.NAME, TokenType.LPAREN):
                raise self.error("implicit multiplication is not supported", token.start)
            if token.token_type is not TokenType.OPERATOR:
                return left
            binding = INFIX_BINDING[token.text]
            if binding <= right_binding:
                return left
            self.advance()
            left = self._infix[token.text](token, left)

    def prefix(self, token: Token) -> Symbol:
        if token.token_type is TokenType.NUMBER:
            return Symbol.constant(self.space, int(token.text))
        if token.token_type is TokenType.NAME:
            return self.name(token)
        if token.token_type is TokenType.LPAREN:
            inner = self.expression(0)
            closing = self.advance()
            if closing.token_type is not TokenType.RPAREN:
                raise self.error("expected ')'", closing.start)
            return inner
        if token.token_type is TokenType.OPERATOR and token.text == '-':
            return -self.expression(UNARY_MINUS_BINDING)
        if token.token_type is TokenType.END:
            raise self.error("unexpected end of expression", token.start)
        raise self.error(f"unexpected {token.text!r}", token.start)

    def name(self, token: Token) -> Symbol:
        if token.text == 'hbar':
            return Symbol.hbar(self.space)
        if token.text == 'i':
            return Symbol.constant(self.space, IMAGINARY_UNIT)
        match = COORDINATE_PATTERN.match(token.text)
        if match and int(match.group(2)) <= self.space.n:
            return Symbol.coordinate(self.space, self.space.index_of(token.text))
        raise self.error(f"unknown variable {token.text!r} (phase space has n={self.space.n})", token.start)

    # --- infix handlers -----------------------------------------------------

    def _operand(self, operator: Token) -> Symbol:
        binding = INFIX_BINDING[operator.text]
        if operator.text in RIGHT_ASSOCIATIVE:
            binding -= 1
        return self.expression(binding)

    def _add(self, operator: Token, left: Symbol) -> Symbol:
        return left + self._operand(operator)

    def _sub(self, operator: Token, left: Symbol) -> Symbol:
        return left - self._operand(operator)

    def _mul(self, operator: Token, left: Symbol) -> Symbol:
        return left * self._operand(operator)

    def _div(self, operator: Token, left: Symbol) -> Symbol:
        start = self.peek().start
        divisor = self._operand(operator)
        if not divisor.is_constant:
            raise self.error("division by a non-constant expression", start)
        value = divisor.constant_value()
        if not value:
            raise self.error("division by zero", start)
        return left.scale(QQ_I.one / value)

    def _pow(self, operator: Token, left: Symbol) -> Symbol:
        start = self.peek().start
        exponent = self._operand(operator)
        if not exponent.is_constant:
            raise self.error("exponent must be a non-negative integer constant", start)
        re, im = scalar_parts(exponent.constant_value())
        if im != 0 or re.denominator != 1 or re < 0:
            raise self.error(f"negative or non-integer exponent {exponent}", start)
        return left ** int(re)


def parse_symbol(text: str, space: PhaseSpace) -> Symbol:
    """
    Parse an expression into its expanded canonical Symbol.

    Raises:
        ExpressionParseError: syntax error, unknown variable, bad divisor or exponent
    """
    return ExpressionParser(text, space).parse()
