"""Recursive-descent parser for the textual RatExpr / polynomial form.

Grammar (whitespace ignored):
    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)?
    base   := '(' expr ')' | scalar | name
Scalars use the Scalar serialization (e.g. "3", "1/2", "2*s3"); "s3"
itself denotes sqrt(3).  Names are registered variables.
"""

from fractions import Fraction

from .scalars import Scalar, SQRT3
from .ratexpr import RatExpr


class _Tok:
    def __init__(self, text):
        self.text = text.replace(" ", "")
        self.pos = 0

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self):
        ch = self.peek()
        self.pos += 1
        return ch

    def expect(self, ch):
        if self.take() != ch:
            raise ValueError(f"expected {ch!r} at {self.pos} in {self.text!r}")


def parse_ratexpr(text):
    tok = _Tok(text)
    e = _expr(tok)
    if tok.pos != len(tok.text):
        raise ValueError(f"trailing input at {tok.pos}: {tok.text[tok.pos:]!r}")
    return e


def _expr(tok):
    if tok.peek() == "-":
        tok.take()
        acc = -_term(tok)
    else:
        acc = _term(tok)
    while tok.peek() and tok.peek() in "+-":
        op = tok.take()
        t = _term(tok)
        acc = acc + t if op == "+" else acc - t
    return acc


def _term(tok):
    acc = _factor(tok)
    while tok.peek() and tok.peek() in "*/":
        op = tok.take()
        f = _factor(tok)
        acc = acc * f if op == "*" else acc / f
    return acc


def _factor(tok):
    base = _base(tok)
    if tok.peek() == "^":
        tok.take()
        neg = tok.peek() == "-"
        if neg:
            tok.take()
        digits = _digits(tok)
        n = int(digits)
        return base ** (-n if neg else n)
    return base


def _base(tok):
    ch = tok.peek()
    if ch == "-":
        tok.take()
        return -_factor(tok)
    if ch == "(":
        tok.take()
        e = _expr(tok)
        tok.expect(")")
        return e
    if ch.isdigit():
        num = _digits(tok)
        if tok.peek() == "/":
            # possible fraction: only when followed by digits (else division)
            save = tok.pos
            tok.take()
            if tok.peek().isdigit():
                den = _digits(tok)
                return RatExpr.const(Scalar(Fraction(int(num), int(den))))
            tok.pos = save
        return RatExpr.const(Scalar(Fraction(int(num))))
    if ch.isalpha() or ch == "_":
        name = _name(tok)
        if name == "s3":
            return RatExpr.const(SQRT3)
        return RatExpr.var(name)
    raise ValueError(f"unexpected character {ch!r} at {tok.pos}")


def _digits(tok):
    out = ""
    while tok.peek().isdigit():
        out += tok.take()
    if not out:
        raise ValueError(f"expected digits at {tok.pos}")
    return out


def _name(tok):
    out = ""
    while tok.peek().isalnum() or tok.peek() == "_":
        out += tok.take()
    return out
