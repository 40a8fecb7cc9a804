"""Term sequences: magnitudes |a_n|, sign conventions and precision contexts."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Union

from mpmath import libmp
from mpmath.ctx_mp import MPContext

from .errors import DomainError, NegativeMagnitudeError, SeriesError
from .expression import Expression, affine_form, compile_expression, parse_expression, to_text

ALTERNATING_PLUS = "alternating+"  # (-1)^(n+1)
ALTERNATING_MINUS = "alternating-"  # (-1)^n
INHERIT = "inherit"  # only for strided views of another sequence

DEFAULT_BITS = 256
GUARD_BITS = 64


@lru_cache(maxsize=None)
def _mp_context(bits):
    mp = MPContext()
    mp.prec = bits
    return mp


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision for term evaluation and bound arithmetic.

    Each context owns a private mpmath context, so no global state is touched
    and contexts can be shared between threads.
    """

    bits: int = DEFAULT_BITS
    rounding: str = "nearest"

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError("precision must be at least 64 bits")
        if self.rounding != "nearest":
            raise ValueError("only round-to-nearest evaluation is supported")

    @classmethod
    def from_env(cls, default=DEFAULT_BITS):
        return cls(int(os.environ.get("ZSERIES_PRECISION_BITS", default)))

    @property
    def mp(self) -> MPContext:
        return _mp_context(self.bits)

    @property
    def guard(self) -> MPContext:
        """Context with extra bits, used to accumulate partial sums."""
        return _mp_context(self.bits + GUARD_BITS)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.bits)

    @property
    def slack(self):
        # Relative error budget for one evaluated term; bound certification
        # widens by this much before directed rounding.
        return self.mp.ldexp(1, -(self.bits - 8))

    def mpf(self, value):
        return self.mp.mpf(value)

    def round_up(self, x):
        return self.mp.make_mpf(libmp.mpf_pos(x._mpf_, self.bits, libmp.round_ceiling))

    def round_down(self, x):
        return self.mp.make_mpf(libmp.mpf_pos(x._mpf_, self.bits, libmp.round_floor))


@dataclass(frozen=True)
class PieceRule:
    """Magnitude on one residue class: ``a_n = expr(k)`` with ``k = index(n)``."""

    modulus: int
    residue: int
    index: Expression
    expr: Expression

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if not 0 <= self.residue < self.modulus:
            raise ValueError("residue must lie in [0, modulus)")
        affine_form(self.index)  # raises if not affine

    def k_of(self, n) -> int:
        slope, intercept = affine_form(self.index)
        k = slope * n + intercept
        if k.denominator != 1 or k < 1:
            raise DomainError(f"index map gives k={k} at n={n}; expected a positive integer")
        return int(k)


@dataclass(frozen=True)
class Piecewise:
    rules: tuple[PieceRule, ...]

    @property
    def period(self) -> int:
        return math.lcm(*(r.modulus for r in self.rules))

    def rule_for(self, n) -> PieceRule:
        hits = [r for r in self.rules if n % r.modulus == r.residue]
        if len(hits) != 1:
            raise DomainError(f"{len(hits)} piece rules match n={n}; expected exactly one")
        return hits[0]

    def validate(self, start):
        period = self.period
        for r in range(period):
            hits = [p for p in self.rules if r % p.modulus == p.residue]
            if len(hits) != 1:
                raise SeriesError(f"residue {r} mod {period} is covered by {len(hits)} rules")
        for rule in self.rules:
            slope, intercept = affine_form(rule.index)
            first = start + (rule.residue - start) % rule.modulus
            step = slope * rule.modulus
            k0 = slope * first + intercept
            if step.denominator != 1 or k0.denominator != 1 or step < 0 or k0 < 1:
                raise SeriesError(
                    f"index map {to_text(rule.index)} does not give positive integers "
                    f"for n = {rule.residue} mod {rule.modulus}, n >= {start}"
                )


@dataclass(frozen=True)
class Table:
    """Finite list of magnitudes; indices past the end have magnitude 0."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_as_exact(v) for v in self.values))


def _as_exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"unsupported table entry {v!r}")


@dataclass(frozen=True)
class Strided:
    """View ``b_j = parent.a_{first + j*step}``."""

    parent: "TermSequence"
    first: int
    step: int


Magnitude = Union[Expression, Piecewise, Table, Strided]


def _sign_of(sign):
    # anything other than the two named conventions is a sign expression
    if isinstance(sign, str) and sign not in (ALTERNATING_PLUS, ALTERNATING_MINUS):
        return parse_expression(sign)
    return sign


@dataclass(frozen=True)
class TermSequence:
    """The series ``sum_{n >= start} s_n a_n`` with ``a_n >= 0``.

    ``sign`` is ``"alternating+"`` for ``(-1)^(n+1)``, ``"alternating-"`` for
    ``(-1)^n``, or an :class:`Expression` whose sign gives ``s_n`` (explicit
    mode, where zero terms are rejected).
    """

    start: int
    magnitude: Magnitude
    sign: Union[str, Expression] = ALTERNATING_PLUS
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("start index must be >= 0")
        if isinstance(self.sign, str) and self.sign not in (ALTERNATING_PLUS, ALTERNATING_MINUS, INHERIT):
            raise ValueError(f"unknown sign convention {self.sign!r}")
        if self.sign == INHERIT and not isinstance(self.magnitude, Strided):
            raise ValueError("sign 'inherit' requires a strided magnitude")
        if isinstance(self.magnitude, Piecewise):
            self.magnitude.validate(self.start)

    @classmethod
    def from_expr(cls, text, start=1, sign=ALTERNATING_PLUS, name=""):
        return cls(start, parse_expression(text), _sign_of(sign), name)

    @classmethod
    def piecewise(cls, pieces, start=1, sign=ALTERNATING_PLUS, name=""):
        """``pieces`` is an iterable of ``(modulus, residue, index_text, expr_text)``."""
        rules = tuple(
            PieceRule(int(m), int(r), parse_expression(idx), parse_expression(ex))
            for m, r, idx, ex in pieces
        )
        return cls(start, Piecewise(rules), _sign_of(sign), name)

    @classmethod
    def table(cls, values, start=1, sign=ALTERNATING_PLUS, name=""):
        return cls(start, Table(tuple(values)), _sign_of(sign), name)

    @property
    def explicit_sign(self) -> bool:
        if self.sign == INHERIT:
            return self.magnitude.parent.explicit_sign
        return isinstance(self.sign, Expression)


def _raw_magnitude(seq, n, ctx):
    mag = seq.magnitude
    mp = ctx.mp
    if isinstance(mag, Expression):
        return compile_expression(mag, mp)(n)
    if isinstance(mag, Piecewise):
        rule = mag.rule_for(n)
        return compile_expression(rule.expr, mp)(rule.k_of(n))
    if isinstance(mag, Table):
        i = n - seq.start
        if i >= len(mag.values):
            return mp.zero
        v = mag.values[i]
        return mp.mpf(v.numerator) / v.denominator
    return eval_term(mag.parent, mag.first + (n - seq.start) * mag.step, ctx)


def eval_term(seq: TermSequence, n: int, ctx: PrecisionContext):
    """Return the magnitude ``|a_n|`` at the precision of ``ctx``."""
    if n < seq.start:
        raise DomainError(f"index {n} is before the sequence start {seq.start}")
    value = _raw_magnitude(seq, n, ctx)
    if value < 0:
        raise NegativeMagnitudeError(f"magnitude at n={n} is negative ({ctx.mp.nstr(value, 10)})")
    if not value and seq.explicit_sign:
        raise DomainError(f"zero term at n={n} in explicit-sign mode")
    return value


def sign_at(seq: TermSequence, n: int, ctx: PrecisionContext) -> int:
    """The factor +1 or -1 multiplying ``a_n``; never depends on the magnitude."""
    if seq.sign == ALTERNATING_PLUS:
        return 1 if n % 2 else -1
    if seq.sign == ALTERNATING_MINUS:
        return -1 if n % 2 else 1
    if seq.sign == INHERIT:
        mag = seq.magnitude
        return sign_at(mag.parent, mag.first + (n - seq.start) * mag.step, ctx)
    s = compile_expression(seq.sign, ctx.mp)(n)
    if not s:
        raise DomainError(f"sign expression vanishes at n={n}")
    return 1 if s > 0 else -1


def signed_term(seq: TermSequence, n: int, ctx: PrecisionContext):
    value = eval_term(seq, n, ctx)
    return value if sign_at(seq, n, ctx) > 0 else -value


def eval_terms(seq, lo, hi, ctx) -> list:
    """Magnitudes for n in [lo, hi] (inclusive)."""
    return [eval_term(seq, n, ctx) for n in range(lo, hi + 1)]


# --------------------------------------------------------------------------
# series-definition JSON


def series_from_dict(data: dict) -> TermSequence:
    """Build a sequence from the series-definition JSON object."""
    from .schema import validate_series_definition

    validate_series_definition(data)
    sign = data.get("sign", ALTERNATING_PLUS)
    if isinstance(sign, dict):
        sign = parse_expression(sign["expr"])
    mag = data["magnitude"]
    start = int(data["start"])
    name = data.get("name", "")
    if "expr" in mag:
        return TermSequence(start, parse_expression(mag["expr"]), sign, name)
    pieces = [(p["modulus"], p["residue"], p["index"], p["expr"]) for p in mag["pieces"]]
    return TermSequence.piecewise(pieces, start, sign, name)


def series_to_dict(seq: TermSequence) -> dict:
    if isinstance(seq.sign, Expression):
        sign = {"expr": to_text(seq.sign)}
    elif seq.sign == INHERIT:
        raise ValueError("strided views cannot be exported")
    else:
        sign = seq.sign
    mag = seq.magnitude
    if isinstance(mag, Expression):
        magnitude = {"expr": to_text(mag)}
    elif isinstance(mag, Piecewise):
        magnitude = {
            "pieces": [
                {"modulus": r.modulus, "residue": r.residue, "index": to_text(r.index), "expr": to_text(r.expr)}
                for r in mag.rules
            ]
        }
    else:
        raise ValueError(f"{type(mag).__name__} magnitudes have no JSON form")
    return {"name": seq.name, "start": seq.start, "sign": sign, "magnitude": magnitude}


def load_series(path) -> tuple[TermSequence, dict]:
    """Read a series file; return the sequence and the raw JSON object."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return series_from_dict(data), data
