"""
Recursive-descent parser for difference-ring formulas.

Grammar, loosest binding first::

    formula  := disj ["->" formula]
    disj     := conj ("|" conj)*
    conj     := unary ("&" unary)*
    unary    := "~" unary | ("E" | "A") NAME "." formula | "true" | "false"
              | term "=" term | "(" formula ")"
    term     := factor (("+" | "-") factor)*
    factor   := unary_t ("*" unary_t)*
    unary_t  := "-" unary_t | power
    power    := primary ["^" INT]
    primary  := NAME | INT ["/" INT] | "s(" term ")" | "(" term ")"

Quantifier bodies extend as far right as possible.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from diffqe.errors import FormulaSyntaxError
from diffqe.logic.syntax import (
    FALSE,
    TRUE,
    Add,
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Implies,
    Mul,
    Neg,
    Not,
    Or,
    Pow,
    Sub,
    Term,
    Var,
    sigma,
)

_TOKEN = re.compile(r"\s*(?:(->)|(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([~&|()=+\-*^./]))")
_RESERVED = {"E", "A", "s", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    """
    Split formula text into tokens.

    Raises:
        FormulaSyntaxError: On a character outside the grammar.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if not match:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"Unexpected character {text[start]!r}", start)
        arrow, number, name, symbol = match.groups()
        start = match.start(match.lastindex)
        if arrow:
            tokens.append(Token("op", arrow, start))
        elif number:
            tokens.append(Token("int", number, start))
        elif name:
            tokens.append(Token("name", name, start))
        else:
            tokens.append(Token("op", symbol, start))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Parser:
    """Parser state over one token list."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.current.kind == "op" and self.current.text == text

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"Expected {text!r}")
        return self.advance()

    def fail(self, message: str):
        token = self.current
        found = token.text or "end of input"
        raise FormulaSyntaxError(f"{message}, found {found!r}", token.position)

    def parse(self) -> Formula:
        formula = self.formula()
        if self.current.kind != "end":
            self.fail("Unexpected trailing input")
        return formula

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        result = self.conjunction()
        while self.at("|"):
            self.advance()
            result = Or(result, self.conjunction())
        return result

    def conjunction(self) -> Formula:
        result = self.unary()
        while self.at("&"):
            self.advance()
            result = And(result, self.unary())
        return result

    def unary(self) -> Formula:
        token = self.current
        if self.at("~"):
            self.advance()
            return Not(self.unary())
        if token.kind == "name" and token.text in ("E", "A") and self.peek().kind == "name":
            self.advance()
            var = self.advance()
            if var.text in _RESERVED:
                raise FormulaSyntaxError(f"{var.text!r} cannot be bound", var.position)
            self.expect(".")
            body = self.formula()
            return Exists(var.text, body) if token.text == "E" else Forall(var.text, body)
        if token.kind == "name" and token.text in ("true", "false"):
            self.advance()
            return TRUE if token.text == "true" else FALSE
        if self.at("("):
            return self._parenthesised()
        return self.atom()

    def _parenthesised(self) -> Formula:
        # "(" opens either a term of an equation or a nested formula.
        start = self.index
        try:
            return self.atom()
        except FormulaSyntaxError as as_atom:
            self.index = start
            self.advance()
            try:
                inner = self.formula()
                self.expect(")")
            except FormulaSyntaxError as as_formula:
                raise max(as_atom, as_formula, key=lambda e: e.position) from None
            return inner

    def atom(self) -> Formula:
        left = self.term()
        self.expect("=")
        return Atom(left, self.term())

    def term(self) -> Term:
        result = self.product()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.product()
            result = Add(result, right) if op == "+" else Sub(result, right)
        return result

    def product(self) -> Term:
        result = self.signed()
        while self.at("*"):
            self.advance()
            result = Mul(result, self.signed())
        return result

    def signed(self) -> Term:
        if self.at("-"):
            self.advance()
            return Neg(self.signed())
        return self.power()

    def power(self) -> Term:
        base = self.primary()
        if self.at("^"):
            self.advance()
            token = self.current
            if token.kind != "int":
                self.fail("Expected an integer exponent")
            self.advance()
            return Pow(base, int(token.text))
        return base

    def primary(self) -> Term:
        token = self.current
        if token.kind == "int":
            self.advance()
            value = Fraction(int(token.text))
            if self.at("/") and self.peek().kind == "int":
                self.advance()
                denominator = self.advance()
                if int(denominator.text) == 0:
                    raise FormulaSyntaxError("Division by zero", denominator.position)
                value = value / int(denominator.text)
            return Const(value)
        if token.kind == "name":
            if token.text == "s" and self.peek().kind == "op" and self.peek().text == "(":
                self.advance()
                self.advance()
                inner = self.term()
                self.expect(")")
                return sigma(inner)
            if token.text in _RESERVED:
                self.fail("Expected a term")
            self.advance()
            return Var(token.text)
        if self.at("("):
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        self.fail("Expected a term")


def parse(text: str) -> Formula:
    """
    Parse a formula.

    Raises:
        FormulaSyntaxError: With the character offset of the offending token.

    Example:
        >>> parse("E z. z*z - v1 = 0")
        Exists(var='z', body=Atom(left=Sub(left=Mul(left=Var(name='z'), right=Var(name='z')), right=Var(name='v1')), right=Const(value=Fraction(0, 1))))
    """
    return Parser(text).parse()


def parse_term(text: str) -> Term:
    """Parse a single term."""
    parser = Parser(text)
    term = parser.term()
    if parser.current.kind != "end":
        parser.fail("Unexpected trailing input")
    return term


def try_parse(text: str) -> Optional[Formula]:
    try:
        return parse(text)
    except FormulaSyntaxError:
        return None
