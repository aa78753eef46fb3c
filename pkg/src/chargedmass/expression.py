"""Closed-form field expressions for configuration files.

Grammar (``^`` binds tighter than unary minus and associates to the right)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := ("-" | "+") unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names are the coordinates ``x, y, z, r``, the constants ``pi, e`` and the
functions ``exp, log, sqrt, sin, cos``.  A parsed expression evaluates on
plain arrays and on :class:`~chargedmass.jets.Jet` inputs alike, so the
resulting fields carry exact jets.  Domain problems (``log`` of a negative
number, division by zero) surface only when the field is evaluated.
"""

import math
import re

import numpy as np

from . import jets as J
from .errors import ExpressionSyntaxError
from .fields import ScalarField, VectorField

VARIABLES = ("x", "y", "z", "r")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {"exp": J.exp, "log": J.log, "sqrt": J.sqrt, "sin": J.sin, "cos": J.cos}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def tokenize(text):
    """List of ``(kind, value, offset)``; ``kind`` is ``num``, ``name``, ``op`` or ``end``."""
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _describe(self, tok):
        return "end of input" if tok[0] == "end" else repr(tok[1])

    def fail(self, what):
        tok = self.tok
        raise ExpressionSyntaxError(f"{what}, found {self._describe(tok)}", tok[2])

    def accept(self, op):
        if self.tok[0] == "op" and self.tok[1] == op:
            self.i += 1
            return True
        return False

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            self.fail("expected an operator")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            rhs = self.term()
            node = _binary(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            rhs = self.unary()
            node = _binary(op, node, rhs)
        return node

    def unary(self):
        if self.accept("-"):
            inner = self.unary()
            return lambda env: -inner(env)
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            exponent = self.unary()
            return _binary("^", base, exponent)
        return base

    def atom(self):
        kind, value, offset = self.tok
        if kind == "num":
            self.i += 1
            c = float(value)
            return lambda env: c
        if kind == "name":
            self.i += 1
            if value in FUNCTIONS:
                if not self.accept("("):
                    self.fail(f"expected '(' after {value}")
                arg = self.expr()
                if not self.accept(")"):
                    self.fail("expected ')'")
                fn = FUNCTIONS[value]
                return lambda env: fn(arg(env))
            if value in VARIABLES:
                return lambda env: env[value]
            if value in CONSTANTS:
                c = CONSTANTS[value]
                return lambda env: c
            raise ExpressionSyntaxError(f"unknown name {value!r}", offset)
        if self.accept("("):
            node = self.expr()
            if not self.accept(")"):
                self.fail("expected ')'")
            return node
        self.fail("expected a number, name or '('")


def _binary(op, a, b):
    if op == "+":
        return lambda env: a(env) + b(env)
    if op == "-":
        return lambda env: a(env) - b(env)
    if op == "*":
        return lambda env: a(env) * b(env)
    if op == "/":
        return lambda env: a(env) / b(env)
    return lambda env: a(env) ** b(env)


def compile_expression(text):
    """Parse ``text`` into a function ``fn(x, y, z, r)``."""
    node = _Parser(text).parse()

    def fn(x, y, z, r):
        with np.errstate(all="ignore"):
            return node({"x": x, "y": y, "z": z, "r": r})

    return fn


def expression_parse(text, *, decay=1.0, r_min=0.0, name=None):
    """Scalar field with exact jets from an expression in ``x, y, z, r``.

    >>> f = expression_parse("1/r")
    >>> float(f((2.0, 0.0, 0.0)))
    0.5
    """
    return ScalarField.from_formula(compile_expression(text), decay=decay, r_min=r_min, name=name or text)


def vector_parse(texts, *, decay=2.0, r_min=0.0, name=None):
    """Vector field from three component expressions."""
    if len(texts) != 3:
        raise ValueError("a vector field needs exactly three component expressions")
    fns = [compile_expression(t) for t in texts]
    return VectorField.from_formula(
        lambda x, y, z, r: tuple(fn(x, y, z, r) for fn in fns),
        decay=decay,
        r_min=r_min,
        name=name or "(" + ", ".join(texts) + ")",
    )
