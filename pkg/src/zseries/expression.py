"""Expression language for term magnitudes, signs and envelopes.

Grammar (one free variable, named ``n``, ``k`` or ``x``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" power)?
    primary := number | ident | ident "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus and is right-associative, so ``-x^2``
is ``-(x^2)`` and an exponent may not start with a bare minus: write
``2^(-k)``, not ``2^-k``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, ParseError

VARIABLES = frozenset({"n", "k", "x"})
FUNCTIONS = frozenset({"sin", "cos", "ln", "exp", "sqrt", "abs", "floor"})
CONSTANTS = frozenset({"pi", "e"})


class Expression:
    """Base class of AST nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expression):
    text: str


@dataclass(frozen=True)
class Var(Expression):
    name: str


@dataclass(frozen=True)
class Const(Expression):
    name: str


@dataclass(frozen=True)
class Neg(Expression):
    operand: Expression


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Call(Expression):
    func: str
    arg: Expression


# --------------------------------------------------------------------------
# tokenizer / parser

_NUMBER = re.compile(r"\d+(?:\.\d+)?")
_IDENT = re.compile(r"[A-Za-z_]\w*")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int


def _tokenize(text):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        offset = len(text[:pos].encode("utf-8"))
        if pos == len(text):
            tokens.append(_Tok("end", "", offset))
            return tokens
        if m := _NUMBER.match(text, pos):
            tokens.append(_Tok("num", m.group(), offset))
            pos = m.end()
        elif m := _IDENT.match(text, pos):
            tokens.append(_Tok("ident", m.group(), offset))
            pos = m.end()
        elif text[pos] in "+-*/^(),":
            tokens.append(_Tok("op", text[pos], offset))
            pos += 1
        else:
            raise ParseError(f"unexpected character {text[pos]!r}", offset)


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            raise ParseError(f"expected {text!r}", self.tok.offset)
        return self._advance()

    def parse(self):
        if self.tok.kind == "end":
            raise ParseError("empty expression", self.tok.offset)
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self._advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self._advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self._advance()
            if self.tok.kind == "op" and self.tok.text == "-":
                raise ParseError(
                    "negative exponent needs parentheses, e.g. 2^(-k)", self.tok.offset
                )
            return BinOp("^", base, self.power())
        return base

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self._advance()
            return Num(t.text)
        if t.kind == "ident":
            self._advance()
            followed_by_paren = self.tok.kind == "op" and self.tok.text == "("
            if t.text in FUNCTIONS:
                if not followed_by_paren:
                    raise ParseError(f"function {t.text!r} takes exactly one argument", t.offset)
                self._advance()
                arg = self.expr()
                if self.tok.kind == "op" and self.tok.text == ",":
                    raise ParseError(f"function {t.text!r} takes exactly one argument", self.tok.offset)
                self._expect(")")
                return Call(t.text, arg)
            if t.text in VARIABLES or t.text in CONSTANTS:
                if followed_by_paren:
                    raise ParseError(f"{t.text!r} is not a function", self.tok.offset)
                return Var(t.text) if t.text in VARIABLES else Const(t.text)
            raise ParseError(f"unknown identifier {t.text!r}", t.offset)
        if t.kind == "op" and t.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if t.kind == "end":
            raise ParseError("unexpected end of expression", t.offset)
        raise ParseError(f"unexpected token {t.text!r}", t.offset)


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an AST; raise :class:`ParseError` on bad input."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    node = _Parser(text).parse()
    names = free_variables(node)
    if len(names) > 1:
        raise ParseError(f"expression mixes variables {sorted(names)}", 0)
    return node


def free_variables(node: Expression) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        return free_variables(node.arg)
    return set()


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def to_text(node: Expression) -> str:
    """Render with the minimal parentheses that re-parse to the same tree."""
    if isinstance(node, Num):
        return node.text
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    sep = "^" if node.op == "^" else f" {node.op} "
    return f"{left}{sep}{right}"


def substitute(node: Expression, replacement: Expression) -> Expression:
    """Replace the free variable by ``replacement``."""
    if isinstance(node, Var):
        return replacement
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, replacement))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, replacement), substitute(node.right, replacement))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, replacement))
    return node


# --------------------------------------------------------------------------
# evaluation


def _check(mp, value, what):
    if not isinstance(value, mp.mpf) or not mp.isfinite(value):
        raise DomainError(f"{what} is not a finite real number")
    return value


def _compile(node, mp):
    if isinstance(node, Num):
        value = mp.mpf(node.text)
        return lambda x: value
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Const):
        value = +mp.pi if node.name == "pi" else +mp.e
        return lambda x: value
    if isinstance(node, Neg):
        f = _compile(node.operand, mp)
        return lambda x: -f(x)
    if isinstance(node, Call):
        f = _compile(node.arg, mp)
        name = node.func
        if name == "ln":
            def fn(x):
                v = f(x)
                if v <= 0:
                    raise DomainError(f"ln of non-positive value {mp.nstr(v, 10)}")
                return mp.ln(v)
        elif name == "sqrt":
            def fn(x):
                v = f(x)
                if v < 0:
                    raise DomainError(f"sqrt of negative value {mp.nstr(v, 10)}")
                return mp.sqrt(v)
        else:
            g = {"sin": mp.sin, "cos": mp.cos, "exp": mp.exp, "abs": abs, "floor": mp.floor}[name]
            fn = lambda x: g(f(x))  # noqa: E731
        return fn
    lf, rf = _compile(node.left, mp), _compile(node.right, mp)
    op = node.op
    if op == "+":
        return lambda x: lf(x) + rf(x)
    if op == "-":
        return lambda x: lf(x) - rf(x)
    if op == "*":
        return lambda x: lf(x) * rf(x)
    if op == "/":
        def div(x):
            d = rf(x)
            if not d:
                raise DomainError("division by zero")
            return lf(x) / d
        return div

    def power(x):
        b, p = lf(x), rf(x)
        if not b and p <= 0:
            raise DomainError("zero raised to a non-positive power")
        if b < 0 and p != mp.floor(p):
            raise DomainError("negative base with non-integer exponent")
        return _check(mp, mp.power(b, p), "power")
    return power


@lru_cache(maxsize=512)
def compile_expression(node: Expression, mp):
    """Return ``f(x) -> mpf`` evaluating ``node`` in mpmath context ``mp``.

    The returned function raises :class:`DomainError` for out-of-domain or
    non-finite results instead of producing NaN.
    """
    f = _compile(node, mp)

    def evaluate(x):
        return _check(mp, f(mp.mpf(x)), "expression value")

    return evaluate


# --------------------------------------------------------------------------
# affine index maps


@lru_cache(maxsize=1024)
def affine_form(node: Expression) -> tuple[Fraction, Fraction]:
    """Return ``(slope, intercept)`` if ``node`` is affine in its variable.

    Only literals, the variable, +, -, unary minus, multiplication where one
    side is constant and division by a constant are accepted.
    """

    def walk(e):
        if isinstance(e, Num):
            return Fraction(0), Fraction(e.text)
        if isinstance(e, Var):
            return Fraction(1), Fraction(0)
        if isinstance(e, Neg):
            a, b = walk(e.operand)
            return -a, -b
        if isinstance(e, BinOp) and e.op in "+-*/":
            a1, b1 = walk(e.left)
            a2, b2 = walk(e.right)
            if e.op == "+":
                return a1 + a2, b1 + b2
            if e.op == "-":
                return a1 - a2, b1 - b2
            if e.op == "*":
                if a1 and a2:
                    raise ValueError("index map is not affine")
                return a1 * b2 + a2 * b1, b1 * b2
            if a2 or not b2:
                raise ValueError("index map divides by a non-constant or zero")
            return a1 / b2, b1 / b2
        raise ValueError(f"index map must be affine, got {to_text(e)!r}")

    return walk(node)
