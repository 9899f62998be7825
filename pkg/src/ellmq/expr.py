"""Polynomial-string parser for forms, e.g. ``"2*w^2 - 1/3*a*b + (u + v)^2"``.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*       # "/" only by a number
    unary  := "-" unary | power
    power  := atom ("^" INT)?
    atom   := NUMBER | NAME | "(" expr ")"

Products keep the written order, so ``"b*a"`` equals ``-a*b`` for odd ``a, b``.
"""

import re
from fractions import Fraction

from .errors import EllmqError

__all__ = ["parse_form", "ExprError"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


class ExprError(EllmqError):
    def __init__(self, message, position=None, op="expr.parse_form"):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message, op=op)
        self.position = position


def _tokenize(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", int(m.group(1)), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ExprError(f"unexpected character {ch!r}", start)
            out.append((ch, ch, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, algebra):
        self.toks = _tokenize(text)
        self.i = 0
        self.alg = algebra

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ExprError(f"expected {kind!r}, found {tok[1] if tok[1] is not None else 'end'!r}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        out = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self):
        out = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            if op == "*":
                out = out * self.unary()
            else:
                rhs = self.unary()
                c = rhs.constant_term()
                if rhs != self.alg.const(c) or not c:
                    raise ExprError("division only by a nonzero number", pos)
                out = out / c
        return out

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            exp = self.take("num")[1]
            base = base ** exp
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return self.alg.const(Fraction(val))
        if kind == "name":
            self.take()
            if not self.alg.has_generator(val):
                raise ExprError(f"unknown generator {val!r}", pos)
            return self.alg.gen(val)
        if kind == "(":
            self.take()
            out = self.expr()
            self.take(")")
            return out
        raise ExprError(f"unexpected {val if val is not None else 'end of input'!r}", pos)


def parse_form(text, algebra):
    """Parse ``text`` into a :class:`~ellmq.algebra.FormExpr` of ``algebra``."""
    if isinstance(text, (int, Fraction)):
        return algebra.const(text)
    if not isinstance(text, str):
        raise ExprError(f"expected a polynomial string, got {type(text).__name__}")
    p = _Parser(text, algebra)
    out = p.expr()
    p.take("end")
    return out
