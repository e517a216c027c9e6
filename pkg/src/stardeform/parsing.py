"""Text grammar for exact coefficients and lambda-series literals.

Grammar (informal):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')* atom ('^' INT)?
    atom   := INT | 'i' | VARIABLE | '(' expr ')'

``i`` is the imaginary unit.  Division is exact; dividing by a nonconstant
polynomial produces a rational function, so ``(1)/(1 + x^2 + p^2)`` works.
Series literals use the reserved symbol ``l`` for the formal parameter, as
in ``1 + 1/2*l + 3*l^2``; the denominator of a rational coefficient must
not contain ``l``.
"""

from __future__ import annotations

import re

from .coefficients import (
    CoefficientError,
    GR_I,
    GR_ONE,
    GaussianRational,
    Poly,
    RatFunc,
    demote,
)

LAMBDA_SYMBOL = "l"
RESERVED = ("i", LAMBDA_SYMBOL)


class ParseError(CoefficientError):
    """Malformed input text; carries 1-based line and column."""

    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.column = col


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|([-+*/^()]))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(
                f"unexpected character {stripped[0]!r}", text,
                pos + (len(text[pos:]) - len(stripped)))
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        t = self.tokens[self.k]
        self.k += 1
        return t

    def fail(self, message):
        raise ParseError(message, self.text, self.peek()[2])

    def parse(self):
        v = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            w = self.factor()
            v = v * w if op == "*" else v / w
        return v

    def factor(self):
        sign = 1
        while self.peek()[:2] == ("op", "-"):
            self.advance()
            sign = -sign
        v = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            neg = False
            if self.peek()[:2] == ("op", "-"):
                self.advance()
                neg = True
            kind, val, _ = self.peek()
            if kind != "int":
                self.fail("exponent must be an integer")
            self.advance()
            v = v ** (-val if neg else val)
        return -v if sign < 0 else v

    def atom(self):
        kind, val, _ = self.peek()
        if kind == "int":
            self.advance()
            return GaussianRational(val)
        if kind == "name":
            if val == "i":
                self.advance()
                return GR_I
            if val in self.variables:
                self.advance()
                return Poly.variable(self.variables, val)
            self.fail(f"unknown symbol {val!r}")
        if kind == "op" and val == "(":
            self.advance()
            v = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.advance()
            return v
        self.fail("expected a number, symbol, or '('")


def check_variable_names(variables) -> tuple[str, ...]:
    variables = tuple(variables)
    for v in variables:
        if v in RESERVED:
            raise CoefficientError(f"variable name {v!r} is reserved")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v):
            raise CoefficientError(f"bad variable name {v!r}")
    if len(set(variables)) != len(variables):
        raise CoefficientError("duplicate variable names")
    return variables


def parse_coefficient(text: str, variables=()):
    """Parse one coefficient; returns the smallest exact kind that fits."""
    variables = check_variable_names(variables)
    return demote(_Parser(text, variables).parse())


def parse_series_coefficients(text: str, variables, order: int) -> list:
    """Parse a series literal into its lambda coefficients 0..order.

    The literal is parsed over the variables extended by the reserved
    symbol ``l`` and then split by powers of ``l``.  Terms above the
    truncation order are dropped, matching series truncation semantics.
    """
    variables = check_variable_names(variables)
    ext = variables + (LAMBDA_SYMBOL,)
    value = _Parser(text, ext)
    # bypass reserved-name validation for the extension symbol
    raw = value.parse()
    if isinstance(raw, GaussianRational):
        coeffs = [raw] + [GaussianRational(0)] * order
        return coeffs
    if isinstance(raw, RatFunc):
        for f, _ in raw.factors:
            if any(e[-1] for e in f.terms):
                raise CoefficientError(
                    "series literal denominator must not contain "
                    f"{LAMBDA_SYMBOL!r}")
        split = _split_lambda(raw.num, variables, order)
        return [demote(RatFunc(num,
                               tuple((_drop_lambda(f, variables), e)
                                     for f, e in raw.factors)))
                for num in split]
    return [demote(p) for p in _split_lambda(raw, variables, order)]


def _drop_lambda(p: Poly, variables: tuple[str, ...]) -> Poly:
    return Poly(variables, {e[:-1]: c for e, c in p.terms.items()})


def _split_lambda(p: Poly, variables: tuple[str, ...], order: int):
    out = [dict() for _ in range(order + 1)]
    for e, c in p.terms.items():
        k = e[-1]
        if k <= order:
            out[k][e[:-1]] = c
    return [Poly(variables, terms) for terms in out]
