"""Tiny expression language for time-dependent coefficient functions.

Grammar (EBNF, whitespace insignificant)::

    expr    :=  term  (("+" | "-") term)*
    term    :=  factor (("*" | "/") factor)*
    factor  :=  "-" factor | power
    power   :=  atom ("^" factor)?
    atom    :=  NUMBER | "t" | "pi" | FUNC "(" expr ")" | "(" expr ")"
    FUNC    :=  "sin" | "cos" | "exp" | "sqrt"
    NUMBER  :=  decimal literal, optional fraction and exponent (1, 0.5, 2e-3)

Precedence is ``^`` > unary ``-`` > ``*`` ``/`` > ``+`` ``-``; binary ``-``
and ``/`` associate to the left, ``^`` to the right.  There are no variables
other than ``t`` and no user-defined functions.  ``**`` is not an operator.

``parse`` returns a :class:`CoeffFn`, an immutable callable evaluating the
expression at a time ``t``.  Evaluation raises :class:`EvalError` on division
by zero or any non-finite intermediate, so callers can rely on a finite float
or a diagnosable failure.
"""

from __future__ import annotations

import math
import re

__all__ = ["CoeffFn", "parse", "ParseError", "UnknownNameError", "EvalError"]

_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class ParseError(ValueError):
    """Syntax error; carries the byte offset and an expected-token hint."""

    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnknownNameError(ParseError):
    """Identifier that is not ``t``, ``pi`` or a known function."""


class EvalError(ArithmeticError):
    """Division by zero or non-finite result; carries the offending time."""

    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} at t={t!r}")


def _tokenize(source):
    if not isinstance(source, str):
        source = str(source)
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.lastgroup is None:
            if source[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {source[pos:pos + 1]!r}", pos)
        tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


# AST nodes are plain tuples: ("num", v), ("t",), ("pi",),
# ("neg", a), ("add"|"sub"|"mul"|"div"|"pow", a, b), ("call", name, a).


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"unexpected token {text!r}" if kind != "end" else "unexpected end of input",
                             off, expected=repr(op))
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {text!r}", off, expected="end of input")
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = ("add" if text == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.factor()
                node = ("mul" if text == "*" else "div", node, rhs)
            else:
                return node

    def factor(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return ("neg", self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return ("pow", base, self.factor())
        return base

    def atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            return ("num", float(text))
        if kind == "name":
            if text == "t":
                return ("t",)
            if text == "pi":
                return ("pi",)
            if text in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return ("call", text, arg)
            raise UnknownNameError(f"unknown identifier {text!r}", off,
                                   expected="t, pi, sin, cos, exp or sqrt")
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        msg = "unexpected end of input" if kind == "end" else f"unexpected token {text!r}"
        raise ParseError(msg, off, expected="number, name or '('")


def _eval(node, t):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "t":
        return t
    if tag == "pi":
        return math.pi
    if tag == "neg":
        return -_eval(node[1], t)
    if tag == "call":
        x = _eval(node[2], t)
        try:
            return _FUNCS[node[1]](x)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{node[1]}({x!r}) failed: {exc}", t) from None
    a = _eval(node[1], t)
    b = _eval(node[2], t)
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div":
        if b == 0.0:
            raise EvalError("division by zero", t)
        return a / b
    if tag == "pow":
        try:
            v = a ** b
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise EvalError(f"power failed: {exc}", t) from None
        if isinstance(v, complex):
            raise EvalError("power produced a complex value", t)
        return v
    raise AssertionError(f"bad node {node!r}")


_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _to_source(node, parent_prec=0):
    tag = node[0]
    if tag == "num":
        v = node[1]
        return repr(int(v)) if v == int(v) and abs(v) < 1e16 else repr(v)
    if tag == "t":
        return "t"
    if tag == "pi":
        return "pi"
    if tag == "call":
        return f"{node[1]}({_to_source(node[2])})"
    if tag == "neg":
        inner = _to_source(node[1], _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    prec = _PRECEDENCE[tag]
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[tag]
    # Associativity via the +1 trick: the non-associating side requires
    # parentheses at equal precedence ('-' '/' left-assoc, '^' right-assoc).
    lhs = _to_source(node[1], prec + (1 if tag == "pow" else 0))
    rhs = _to_source(node[2], prec + (0 if tag == "pow" else 1))
    text = f"{lhs} {op} {rhs}" if tag in ("add", "sub") else f"{lhs}{op}{rhs}"
    return f"({text})" if prec < parent_prec else text


class CoeffFn:
    """A parsed coefficient function of the single variable ``t``.

    Instances are immutable and reentrant; ``f(t)`` returns a finite float or
    raises :class:`EvalError`.
    """

    __slots__ = ("source", "ast")

    def __init__(self, source, ast):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "ast", ast)

    def __setattr__(self, name, value):
        raise AttributeError("CoeffFn is immutable")

    def __call__(self, t):
        value = _eval(self.ast, float(t))
        if isinstance(value, complex) or not math.isfinite(value):
            raise EvalError(f"non-finite result {value!r}", t)
        return value

    def to_source(self):
        """Render the AST back to parseable text (round-trip equivalent)."""
        return _to_source(self.ast)

    def __repr__(self):
        return f"CoeffFn({self.to_source()!r})"

    def __eq__(self, other):
        return isinstance(other, CoeffFn) and self.ast == other.ast

    def __hash__(self):
        return hash(("CoeffFn", self.ast))


def parse(source):
    """Parse ``source`` into a :class:`CoeffFn`.

    Raises :class:`ParseError` (with byte offset and an expected-token hint)
    on malformed input and :class:`UnknownNameError` on identifiers outside
    the grammar.
    """
    ast = _Parser(source).parse()
    return CoeffFn(str(source), ast)
