"""Envelope certificates for Zv-monotone functions.

A function f lying between two monotone envelopes phi1 <= f <= phi2 is
Z(T+tau)-monotone for every tau > 0 once the envelopes are ``T`` apart
horizontally: ``phi1(x+T) > phi2(x)`` for increasing envelopes, or
``phi2(x+T) < phi1(x)`` for decreasing ones. Such a ``T`` bounds the parameter
Par_Zv(f) from above, and the smallest odd integer >= T is a valid window for
the Z-monotone summation bounds.

All certificates here are checked on a finite grid and are labelled
empirical.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .errors import DomainError, NoCertificateError, WindowError
from .expression import Expression, compile_expression, parse_expression
from .series import PrecisionContext

INCREASING = "inc"
DECREASING = "dec"

DEFAULT_T_MAX = 100
DEFAULT_TOLERANCE = "1e-6"


def _expr(e):
    return parse_expression(e) if isinstance(e, str) else e


@dataclass(frozen=True)
class EnvelopePair:
    """Monotone bounds ``lower <= f <= upper`` for ``x >= domain_start``."""

    lower: Expression
    upper: Expression
    domain_start: object
    direction: str = INCREASING

    def __post_init__(self):
        object.__setattr__(self, "lower", _expr(self.lower))
        object.__setattr__(self, "upper", _expr(self.upper))
        aliases = {"increasing": INCREASING, "decreasing": DECREASING}
        object.__setattr__(self, "direction", aliases.get(self.direction, self.direction))
        if self.direction not in (INCREASING, DECREASING):
            raise ValueError(f"direction must be 'inc' or 'dec', got {self.direction!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "EnvelopePair":
        return cls(data["lower"], data["upper"], data["from"], data["direction"])

    def to_dict(self) -> dict:
        return {
            "lower": str(self.lower),
            "upper": str(self.upper),
            "from": float(self.domain_start),
            "direction": self.direction,
        }


@dataclass(frozen=True)
class Grid:
    """Points ``start, start+step, ...`` up to and including ``end``."""

    start: object
    end: object
    step: object

    def points(self, ctx: PrecisionContext) -> list:
        mp = ctx.mp
        start, end, step = mp.mpf(self.start), mp.mpf(self.end), mp.mpf(self.step)
        if step <= 0:
            raise ValueError("grid step must be positive")
        if end < start:
            raise ValueError(f"empty grid [{self.start}, {self.end}]")
        count = int(mp.floor((end - start) / step)) + 1
        return [start + i * step for i in range(count)]

    def to_dict(self) -> dict:
        return {"start": str(self.start), "end": str(self.end), "step": str(self.step)}


def _check_domain(env, grid, ctx):
    if ctx.mp.mpf(grid.start) < ctx.mp.mpf(env.domain_start):
        raise WindowError(f"grid starts at {grid.start}, before the envelope domain {env.domain_start}")


@dataclass(frozen=True)
class EnvelopeReport:
    holds: bool
    monotone: bool
    sandwich_violations: tuple
    monotone_violations: tuple
    lower_slack: object
    upper_slack: object
    points: int

    def to_dict(self, ctx, sample=10) -> dict:
        nstr = lambda x: ctx.mp.nstr(x, 20)  # noqa: E731
        return {
            "holds": self.holds,
            "monotone": self.monotone,
            "points": self.points,
            "sandwich_violations": [nstr(x) for x in self.sandwich_violations[:sample]],
            "monotone_violations": [nstr(x) for x in self.monotone_violations[:sample]],
            "lower_slack": nstr(self.lower_slack),
            "upper_slack": nstr(self.upper_slack),
        }


def verify_envelope(env: EnvelopePair, f, grid: Grid, ctx: PrecisionContext) -> EnvelopeReport:
    """Check ``lower(x) <= f(x) <= upper(x)`` at every grid point.

    ``holds`` covers the sandwich only; ``monotone`` reports whether both
    envelopes move in the declared direction between consecutive points.
    """
    _check_domain(env, grid, ctx)
    mp = ctx.mp
    f1 = compile_expression(env.lower, mp)
    f2 = compile_expression(env.upper, mp)
    g = compile_expression(_expr(f), mp)
    xs = grid.points(ctx)
    lo = [f1(x) for x in xs]
    hi = [f2(x) for x in xs]
    fv = [g(x) for x in xs]
    bad = tuple(x for x, a, b, c in zip(xs, lo, fv, hi) if not a <= b <= c)
    sign = 1 if env.direction == INCREASING else -1
    mono_bad = tuple(
        xs[i]
        for i in range(len(xs) - 1)
        if sign * (lo[i + 1] - lo[i]) < 0 or sign * (hi[i + 1] - hi[i]) < 0
    )
    return EnvelopeReport(
        not bad,
        not mono_bad,
        bad,
        mono_bad,
        min(b - a for a, b in zip(lo, fv)),
        min(c - b for b, c in zip(fv, hi)),
        len(xs),
    )


@dataclass(frozen=True)
class ZvCertificate:
    """``T`` bounds Par_Zv from above on the sampled grid.

    ``margin`` is the smallest gap at ``T`` (``lower(x+T) - upper(x)`` when
    increasing, ``lower(x) - upper(x+T)`` when decreasing). ``T_lower`` is the
    largest tested parameter that failed, so the true grid threshold lies in
    ``(T_lower, T]``.
    """

    T: object
    T_lower: object
    grid: Grid
    margin: object
    threshold: object
    direction: str
    empirical: bool = True

    def __post_init__(self):
        assert self.margin > self.threshold

    @property
    def window(self) -> int:
        return parameter_to_window(self.T)

    def to_dict(self, ctx) -> dict:
        nstr = lambda x: ctx.mp.nstr(x, 15)  # noqa: E731
        return {
            "T": nstr(self.T),
            "T_lower": nstr(self.T_lower),
            "grid": self.grid.to_dict(),
            "margin": nstr(self.margin),
            "direction": self.direction,
            "window": self.window,
            "empirical": self.empirical,
        }


def _margin_fn(env, grid, ctx):
    mp = ctx.mp
    f1 = compile_expression(env.lower, mp)
    f2 = compile_expression(env.upper, mp)
    xs = grid.points(ctx)
    if env.direction == INCREASING:
        fixed = [f2(x) for x in xs]
        return lambda T: min(f1(x + T) - c for x, c in zip(xs, fixed))
    fixed = [f1(x) for x in xs]
    return lambda T: min(c - f2(x + T) for x, c in zip(xs, fixed))


def bound_parameter(
    env: EnvelopePair,
    grid: Grid,
    ctx: PrecisionContext,
    *,
    t_max=DEFAULT_T_MAX,
    tol=DEFAULT_TOLERANCE,
    threshold=None,
) -> ZvCertificate:
    """Smallest ``T`` in ``[0, t_max]`` (to within ``tol``) separating the envelopes.

    The strict inequality is certified with a margin above ``threshold``
    (default ``2^(-bits/2)``). The gap is monotone in ``T``, so bisection
    applies. Raises :class:`NoCertificateError` if ``t_max`` itself fails.
    """
    _check_domain(env, grid, ctx)
    mp = ctx.mp
    threshold = mp.ldexp(1, -(ctx.bits // 2)) if threshold is None else mp.mpf(threshold)
    margin = _margin_fn(env, grid, ctx)
    lo, hi = mp.zero, mp.mpf(t_max)
    tol = mp.mpf(tol)
    try:
        m_lo = margin(lo)
        m_hi = margin(hi)
    except DomainError as exc:
        raise NoCertificateError(f"envelope evaluation failed: {exc}") from exc
    if m_lo > threshold:
        return ZvCertificate(lo, lo, grid, m_lo, threshold, env.direction)
    if not m_hi > threshold:
        raise NoCertificateError(
            f"no T <= {t_max} separates the envelopes on the grid "
            f"(gap at T_max is {mp.nstr(m_hi, 8)})"
        )
    while hi - lo > tol:
        mid = (lo + hi) / 2
        m_mid = margin(mid)
        if m_mid > threshold:
            hi, m_hi = mid, m_mid
        else:
            lo = mid
    return ZvCertificate(hi, lo, grid, m_hi, threshold, env.direction)


def parameter_to_window(T) -> int:
    """Smallest odd integer >= max(T, 1)."""
    if T < 0 or not mpmath.isfinite(T):
        raise ValueError("parameter must be finite and non-negative")
    n = max(int(mpmath.ceil(T)), 1)
    return n if n % 2 else n + 1


# --------------------------------------------------------------------------
# tangent-line bound for f(x) = x^alpha + p(x) x^(alpha-1), |p| <= M


def tangent_envelopes(M, alpha, x0) -> EnvelopePair:
    """The pair ``x^a - M x^(a-1) <= f <= x^a + M x^(a-1)`` as expressions."""
    a, am1 = str(alpha), f"({alpha}) - 1"
    return EnvelopePair(f"x^({a}) - ({M})*x^({am1})", f"x^({a}) + ({M})*x^({am1})", x0, INCREASING)


def tangent_parameter_bound(M, alpha, x0, ctx: PrecisionContext, *, variant="sound"):
    """Upper bound on the horizontal gap between the envelopes for ``x >= x0``.

    The point ``x1`` with ``r(x1) = q(x0)`` is found numerically, where
    ``q = x^a + M x^(a-1)`` and ``r = x^a - M x^(a-1)``. The tangent to r at x1
    is steeper than r further right, giving
    ``T = 2M / (alpha - (1-alpha) M / x1)``.

    Preconditions: ``0 < alpha <= 1``, ``M >= 0``, and for ``alpha < 1``
    ``x0 > (2-alpha) M / alpha`` so that both envelopes are increasing and
    concave there. ``variant="stated"`` divides by ``x1^2`` instead of ``x1``;
    it is kept only for comparison and is not a valid bound in general.
    """
    mp = ctx.mp
    M, alpha, x0 = mp.mpf(M), mp.mpf(alpha), mp.mpf(x0)
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if M < 0:
        raise DomainError("M must be non-negative")
    if variant not in ("sound", "stated"):
        raise ValueError("variant must be 'sound' or 'stated'")
    if M == 0:
        return mp.zero
    if x0 <= (1 - alpha) * M / alpha:
        raise DomainError("x0 too small: the lower envelope is not increasing there")
    if alpha < 1 and x0 <= (2 - alpha) * M / alpha:
        raise DomainError("x0 too small: the envelopes are not concave there")

    q0 = x0**alpha + M * x0 ** (alpha - 1)

    def r(x):
        return x**alpha - M * x ** (alpha - 1) - q0

    hi = 2 * x0
    for _ in range(2000):
        if r(hi) > 0:
            break
        hi *= 2
    else:
        raise DomainError("root bracket for x1 not found")
    x1 = mp.findroot(r, (x0, hi), solver="anderson")
    if not x0 < x1 <= hi:
        raise DomainError("root-find for x1 left the bracket")
    denom = alpha - (1 - alpha) * M / (x1 if variant == "sound" else x1**2)
    if denom <= 0:
        raise DomainError("denominator is not positive; increase x0")
    return 2 * M / denom
