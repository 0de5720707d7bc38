"""A small language for complex scalar fields of (t, x, y, z).

Grammar, lowest to highest precedence::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" ["-" | "+"] INTEGER)?
    atom   := NUMBER | "i" | "t" | "x" | "y" | "z"
            | "conj" "(" expr ")" | "(" expr ")"

``-x^2`` therefore means ``-(x^2)``.  Exponents are integer literals with
``|n| <= 16`` so every expression is a rational function of the
coordinates and their conjugates, and :func:`eval_jet` returns exact first
and second derivatives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .jet import Jet2, JetDomainError, constant, variables

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvaluationError",
    "Num",
    "Imag",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Conj",
    "parse",
    "to_string",
    "eval_jet",
    "Expression",
]

VARIABLES = ("t", "x", "y", "z")
MAX_EXPONENT = 16


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"syntax error at offset {offset}: {message}")


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, offset: int, text: str = ""):
        self.name = name
        ExprError.__init__(self, f"unknown identifier {name!r} at offset {offset}")
        self.offset = offset
        self.text = text


class EvaluationError(ExprError):
    def __init__(self, message: str, point=None):
        self.point = None if point is None else np.asarray(point, dtype=float)
        where = "" if point is None else f" at (t,x,y,z) = {tuple(float(c) for c in self.point)}"
        super().__init__(message + where)


# -- AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Conj:
    arg: "Expr"


Expr = Union[Num, Imag, Var, Neg, BinOp, Pow, Conj]


# -- tokenizer ------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int  # 1-based byte offset


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8")) + 1


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"expected {expected}, found {found}", t.offset, self.text)

    def expect(self, text: str):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.error(repr(text))

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.error("operator or end of input")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            operand = self.unary()
            return Neg(operand) if op == "-" else operand
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text in "+-":
                sign = -1 if self.advance().text == "-" else 1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                self.error("integer exponent")
            self.advance()
            n = sign * int(t.text)
            if abs(n) > MAX_EXPONENT:
                raise ExprSyntaxError(f"exponent {n} exceeds |n| <= {MAX_EXPONENT}", t.offset, self.text)
            return Pow(base, n)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text == "i":
                return Imag()
            if t.text in VARIABLES:
                return Var(t.text)
            if t.text == "conj":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Conj(arg)
            raise UnknownIdentifierError(t.text, t.offset, self.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error("number, variable, 'i', 'conj(' or '('")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises ``ExprSyntaxError`` (with a 1-based byte ``offset``) on malformed
    input and ``UnknownIdentifierError`` for names other than t, x, y, z,
    i and conj.
    """
    return _Parser(text).parse()


def to_string(e: Expr) -> str:
    """Print an expression so that ``parse(to_string(e))`` rebuilds it."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Imag):
        return "i"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_string(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_string(e.left)} {e.op} {to_string(e.right)})"
    if isinstance(e, Pow):
        return f"({to_string(e.base)})^{e.exponent}"
    if isinstance(e, Conj):
        return f"conj({to_string(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def _eval(e: Expr, env: dict, shape, order: int) -> Jet2:
    if isinstance(e, Num):
        return constant(e.value, shape, order)
    if isinstance(e, Imag):
        return constant(1j, shape, order)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.operand, env, shape, order)
    if isinstance(e, BinOp):
        a = _eval(e.left, env, shape, order)
        b = _eval(e.right, env, shape, order)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return a / b
    if isinstance(e, Pow):
        return _eval(e.base, env, shape, order) ** e.exponent
    if isinstance(e, Conj):
        return _eval(e.arg, env, shape, order).conj()
    raise TypeError(f"not an expression node: {e!r}")


def eval_jet(e: Expr, points, order: int = 2) -> Jet2:
    """Evaluate ``e`` with exact derivatives at ``points`` of shape ``(..., 4)``.

    Raises ``EvaluationError`` carrying the offending point on division by
    zero or any non-finite result.
    """
    points = np.asarray(points, dtype=float)
    t, x, y, z = variables(points, order)
    env = dict(zip(VARIABLES, (t, x, y, z)))
    flat = points.reshape(-1, 4)
    with np.errstate(all="ignore"):
        try:
            jet = _eval(e, env, points.shape[:-1], order)
        except JetDomainError as exc:
            bad = _first_bad_point(e, flat)
            raise EvaluationError(str(exc), bad) from None
    ok = jet.is_finite()
    if not np.all(ok):
        bad = flat[np.flatnonzero(~np.ravel(ok))[0]]
        raise EvaluationError("non-finite value", bad)
    return jet


def _first_bad_point(e: Expr, flat: np.ndarray):
    for p in flat:
        try:
            with np.errstate(all="ignore"):
                _eval(e, dict(zip(VARIABLES, variables(p, 1))), (), 1)
        except JetDomainError:
            return p
    return None


class Expression:
    """A parsed field expression usable as a jet provider."""

    def __init__(self, text: str):
        self.text = text
        self.tree = parse(text)

    def __call__(self, points, order: int = 2) -> Jet2:
        return eval_jet(self.tree, points, order)

    def __repr__(self):
        return f"Expression({self.text!r})"
