"""Remainder bounds for R_m = S - S_m.

Every bound is a certificate for ``|R_m|`` (or an enclosure of ``R_m``)
computed from a few terms past the cut. Term values are combined exactly,
widened by the context's per-term error budget and then rounded outward, so
rounding can only make an upper bound larger and a lower bound smaller.

Failed mathematical preconditions never raise: the bound is returned with
``valid=False`` and the failing reports attached.

Subsequence structure: for the alternating conventions a Z(2w-1)-monotone
sequence splits into 2w-1 interleaved Leibniz series, so the stride is
``2*omega - 1``. For explicit-sign series with ``sign(a_k) = -sign(a_{k+w})``
each stride-w subsequence alternates, so the stride is ``omega`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .monotonicity import check_convexity, check_sign_pattern, check_slow_decay, check_z_monotone
from .series import PrecisionContext, TermSequence, eval_term, sign_at

DEFAULT_WINDOW = 256

METHODS = (
    "leibniz",
    "z_simple",
    "z_stated",
    "z_improved",
    "half_upper",
    "half_lower",
    "delta_upper",
    "delta_lower",
    "enclosure",
)

STATED_NOTE = (
    "z_stated sums 2*omega terms past the cut; the subsequence argument only "
    "needs 2*omega-1 (z_simple), which is tighter and is the default"
)


@dataclass(frozen=True)
class RemainderBound:
    """A certified statement about ``R_m``.

    For one-sided methods ``value`` bounds ``|R_m|`` from above (``*_upper``,
    ``leibniz``, ``z_*``) or below (``*_lower``). For ``enclosure`` the
    signed remainder lies in ``[lo, hi]`` and ``value = max(-lo, hi)``.
    """

    m: int
    method: str
    value: object
    valid: bool
    preconditions: tuple = ()
    lo: object = None
    hi: object = None
    raw: object = None
    notes: tuple[str, ...] = field(default=())

    @property
    def is_upper(self) -> bool:
        return not self.method.endswith("_lower")

    def to_dict(self, ctx: PrecisionContext) -> dict:
        nstr = lambda x: None if x is None else ctx.mp.nstr(x, 20)  # noqa: E731
        return {
            "m": self.m,
            "method": self.method,
            "value": nstr(self.value),
            "lo": nstr(self.lo),
            "hi": nstr(self.hi),
            "raw": nstr(self.raw),
            "valid": self.valid,
            "preconditions": [r.to_dict(ctx) for r in self.preconditions],
            "notes": list(self.notes),
        }


def strand_step(seq: TermSequence, omega: int) -> int:
    """Stride of the interleaved Leibniz subsequences for window parameter omega."""
    if omega < 1:
        raise ValueError("omega must be >= 1")
    return omega if seq.explicit_sign else 2 * omega - 1


# --------------------------------------------------------------------------
# certified arithmetic


def certify(ctx: PrecisionContext, combo, upward: bool):
    """Directed-rounded value of ``sum(c * v for c, v in combo)``.

    The exact combination is widened by ``slack * sum(|c * v|)`` to cover the
    evaluation error of each term, then rounded toward +inf (``upward``) or
    -inf. Coefficients must be exactly representable (here: +-1, +-1/2).
    """
    mp = ctx.mp
    total = mp.zero
    mag = mp.zero
    for c, v in combo:
        t = mp.fmul(c, v, exact=True)
        total = mp.fadd(total, t, exact=True)
        mag = mp.fadd(mag, abs(t), exact=True)
    err = mp.fmul(mag, ctx.slack, exact=True)
    if upward:
        return ctx.round_up(mp.fadd(total, err, exact=True))
    return ctx.round_down(mp.fsub(total, err, exact=True))


class _Terms:
    """Memoised accessor ``a(n)`` / ``s(n)`` over a sequence."""

    def __init__(self, seq, ctx):
        self.seq, self.ctx = seq, ctx
        self._a = {}

    def a(self, n):
        v = self._a.get(n)
        if v is None:
            v = self._a[n] = eval_term(self.seq, n, self.ctx)
        return v

    def s(self, n):
        return sign_at(self.seq, n, self.ctx)


# Value formulas. They take an accessor so the adaptive summation loop can
# feed them from its own term buffer.


def z_value(ctx, a, m, step, stated=False):
    count = step + 1 if stated else step
    return certify(ctx, [(1, a(n)) for n in range(m + 1, m + count + 1)], True)


def enclosure_value(ctx, a, s, m, step):
    """``(lo, hi)`` with ``R_m`` in ``[lo, hi]``; the first omitted terms of the
    subsequences carry the sign of their subsequence's tail."""
    pos = [(1, a(n)) for n in range(m + 1, m + step + 1) if s(n) > 0]
    neg = [(1, a(n)) for n in range(m + 1, m + step + 1) if s(n) < 0]
    return -certify(ctx, neg, True), certify(ctx, pos, True)


def improved_value(ctx, a, s, m, step):
    lo, hi = enclosure_value(ctx, a, s, m, step)
    return max(-lo, hi)


def half_values(ctx, a, m):
    return certify(ctx, [(0.5, a(m + 1))], False), certify(ctx, [(0.5, a(m))], True)


def delta_values(ctx, a, s, m, p, slow):
    """Bounds on ``|R_m| = |sum_i s_i delta_i|`` where ``delta_i`` is the tail of
    the subsequence starting at ``m+i`` (i = 1..p).

    Returns ``(lower, upper, raw_lower, raw_upper)``. The raw values are the
    one-sided combinations with the group containing ``i = 1`` taken as
    positive; the certified values also consider the mirrored sign, since the
    signed combination may be negative.
    """
    first = s(m + 1)
    same, other = [], []
    for i in range(1, p + 1):
        lo = (0.5, a(m + i))
        hi = (0.5, a(m + i - p)) if slow else (1, a(m + i))
        (same if s(m + i) == first else other).append((lo, hi))

    def neg(term):
        return (-term[0], term[1])

    # D = sum(same) - sum(other)
    d_hi = [hi for lo, hi in same] + [neg(lo) for lo, hi in other]
    d_lo = [lo for lo, hi in same] + [neg(hi) for lo, hi in other]
    raw_upper = certify(ctx, d_hi, True)
    raw_lower = certify(ctx, d_lo, False)
    upper = max(raw_upper, certify(ctx, [neg(t) for t in d_lo], True))
    lower = max(ctx.mp.zero, raw_lower, certify(ctx, [neg(t) for t in d_hi], False))
    return lower, upper, raw_lower, raw_upper


# --------------------------------------------------------------------------
# precondition reports


def _tail_hi(lo, step, window):
    return lo + max(window, 2 * step + 1)


def z_reports(seq, m, step, ctx, window=DEFAULT_WINDOW):
    lo = m + 1
    hi = _tail_hi(lo, step, window)
    reports = [check_z_monotone(seq, step, lo, hi, ctx)]
    if seq.explicit_sign:
        reports.append(check_sign_pattern(seq, step, lo, hi, ctx))
    return tuple(reports)


def half_reports(seq, m, ctx, window=DEFAULT_WINDOW):
    hi = _tail_hi(m, 2, window)
    reports = [check_z_monotone(seq, 1, m, hi, ctx), check_convexity(seq, m, hi, ctx)]
    if seq.explicit_sign:
        reports.append(check_sign_pattern(seq, 1, m, hi, ctx))
    return tuple(reports)


def delta_reports(seq, m, p, ctx, slow, window=DEFAULT_WINDOW):
    lo = m + 1 - p if slow else m + 1
    hi = _tail_hi(lo, 2 * p, window)
    reports = [check_z_monotone(seq, p, lo, hi, ctx), check_convexity(seq, lo, hi, ctx, step=p)]
    if slow:
        reports.append(check_slow_decay(seq, p, lo, hi, ctx))
    if seq.explicit_sign:
        reports.append(check_sign_pattern(seq, p, lo, hi, ctx))
    return tuple(reports)


def _holds(reports):
    return all(r.holds for r in reports)


def _check_cut(seq, m, least):
    if m < least:
        raise ValueError(f"cut m={m} is below the smallest allowed index {least}")


# --------------------------------------------------------------------------
# public bounds


def leibniz_bound(seq, m, ctx, *, window=DEFAULT_WINDOW, reports=None) -> RemainderBound:
    """``|R_m| <= a_{m+1}``, valid when the tail is monotone decreasing."""
    _check_cut(seq, m, seq.start - 1)
    t = _Terms(seq, ctx)
    reports = tuple(reports) if reports is not None else z_reports(seq, m, 1, ctx, window)
    return RemainderBound(m, "leibniz", z_value(ctx, t.a, m, 1), _holds(reports), reports)


def z_bound(seq, m, omega, ctx, variant="proof", *, window=DEFAULT_WINDOW, reports=None) -> RemainderBound:
    """Sum of the terms just past the cut.

    ``variant="proof"`` sums ``2w-1`` terms (one per subsequence);
    ``variant="stated"`` sums ``2w`` terms and is never smaller.
    """
    if variant not in ("proof", "stated"):
        raise ValueError("variant must be 'proof' or 'stated'")
    _check_cut(seq, m, seq.start - 1)
    step = strand_step(seq, omega)
    t = _Terms(seq, ctx)
    reports = tuple(reports) if reports is not None else z_reports(seq, m, step, ctx, window)
    stated = variant == "stated"
    return RemainderBound(
        m,
        "z_stated" if stated else "z_simple",
        z_value(ctx, t.a, m, step, stated),
        _holds(reports),
        reports,
        notes=(STATED_NOTE,) if stated else (),
    )


def z_bound_improved(seq, m, omega, ctx, *, window=DEFAULT_WINDOW, reports=None) -> RemainderBound:
    """Larger of the two same-sign partial sums among the first 2w-1 omitted terms."""
    _check_cut(seq, m, seq.start - 1)
    step = strand_step(seq, omega)
    t = _Terms(seq, ctx)
    reports = tuple(reports) if reports is not None else z_reports(seq, m, step, ctx, window)
    return RemainderBound(m, "z_improved", improved_value(ctx, t.a, t.s, m, step), _holds(reports), reports)


def remainder_enclosure(seq, m, omega, ctx, *, window=DEFAULT_WINDOW, reports=None) -> RemainderBound:
    """Signed interval for ``R_m``: each omitted subsequence tail has the sign of
    its first term and magnitude between 0 and that term."""
    _check_cut(seq, m, seq.start - 1)
    step = strand_step(seq, omega)
    t = _Terms(seq, ctx)
    reports = tuple(reports) if reports is not None else z_reports(seq, m, step, ctx, window)
    lo, hi = enclosure_value(ctx, t.a, t.s, m, step)
    return RemainderBound(m, "enclosure", max(-lo, hi), _holds(reports), reports, lo=lo, hi=hi)


def half_bounds(seq, m, ctx, *, window=DEFAULT_WINDOW, reports=None):
    """``a_{m+1}/2 <= |R_m| <= a_m/2`` for a monotone, convex tail.

    Returns ``(lower, upper)``.
    """
    _check_cut(seq, m, seq.start)
    t = _Terms(seq, ctx)
    reports = tuple(reports) if reports is not None else half_reports(seq, m, ctx, window)
    ok = _holds(reports)
    lower, upper = half_values(ctx, t.a, m)
    return (
        RemainderBound(m, "half_lower", lower, ok, reports),
        RemainderBound(m, "half_upper", upper, ok, reports),
    )


def delta_bounds(seq, m, p, ctx, slow_decay=False, *, window=DEFAULT_WINDOW, reports=None):
    """Bounds from splitting ``R_m`` into the p subsequence tails ``delta_i``.

    Each tail satisfies ``a_{m+i}/2 <= delta_i <= a_{m+i}`` when its
    subsequence is convex, and ``delta_i <= a_{m+i-p}/2`` in the slow-decay
    variant. ``raw`` on the lower bound keeps the unclamped (often negative)
    value. Returns ``(lower, upper)``.
    """
    if p < 1 or (p % 2 == 0 and not seq.explicit_sign):
        raise ValueError("p must be a positive odd integer for alternating series")
    _check_cut(seq, m, seq.start - 1 + (p if slow_decay else 0))
    t = _Terms(seq, ctx)
    reports = tuple(reports) if reports is not None else delta_reports(seq, m, p, ctx, slow_decay, window)
    ok = _holds(reports)
    lower, upper, raw_lower, raw_upper = delta_values(ctx, t.a, t.s, m, p, slow_decay)
    notes_l = ()
    if raw_lower < 0:
        notes_l = ("raw lower bound is negative; reported as 0",) if lower == 0 else (
            "raw lower bound is negative; the mirrored sign combination is positive",
        )
    notes_u = ("mirrored sign combination dominates the one-sided sum",) if upper > raw_upper else ()
    return (
        RemainderBound(m, "delta_lower", lower, ok, reports, raw=raw_lower, notes=notes_l),
        RemainderBound(m, "delta_upper", upper, ok, reports, raw=raw_upper, notes=notes_u),
    )


def all_bounds(seq, m, omega, ctx, *, window=DEFAULT_WINDOW) -> dict:
    """Every applicable bound at cut m, keyed by a short name."""
    out = {}
    step = strand_step(seq, omega)
    zr = z_reports(seq, m, step, ctx, window)
    out["leibniz"] = leibniz_bound(seq, m, ctx, window=window)
    out["z_proof"] = z_bound(seq, m, omega, ctx, "proof", reports=zr)
    out["z_stated"] = z_bound(seq, m, omega, ctx, "stated", reports=zr)
    out["z_improved"] = z_bound_improved(seq, m, omega, ctx, reports=zr)
    out["enclosure"] = remainder_enclosure(seq, m, omega, ctx, reports=zr)
    if m >= seq.start:
        out["half_lower"], out["half_upper"] = half_bounds(seq, m, ctx, window=window)
    if step % 2 == 1 or seq.explicit_sign:
        out["delta_lower"], out["delta_upper"] = delta_bounds(seq, m, step, ctx, window=window)
        if m + 1 - step >= seq.start:
            lo, hi = delta_bounds(seq, m, step, ctx, slow_decay=True, window=window)
            out["delta_slow_lower"], out["delta_slow_upper"] = lo, hi
    return out
