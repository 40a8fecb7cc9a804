"""Finite-window checks of Z(p)-monotone decrease, convexity, slow decay and
periodic sign patterns.

All verdicts are empirical: they cover exactly the window they report and use
exact ``<=`` on the computed values, with no epsilon. Callers control the
precision instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, WindowError
from .series import PrecisionContext, TermSequence, eval_terms, sign_at


def _fmt(mp, x):
    return mp.nstr(x, 20) if x is not None else None


@dataclass(frozen=True)
class ZReport:
    """Outcome of a window scan.

    ``violations`` holds tuples whose first entry is the offending index ``k``;
    the rest are the term values involved. ``comparison_margin`` is the
    smallest slack seen (negative when the check fails).
    """

    kind: str
    p: int
    window: tuple[int, int]
    holds: bool
    violations: tuple
    comparison_margin: object = None

    def __post_init__(self):
        assert self.holds == (not self.violations)

    def to_dict(self, ctx: PrecisionContext, sample: int = 10) -> dict:
        mp = ctx.mp
        return {
            "kind": self.kind,
            "p": self.p,
            "window": list(self.window),
            "holds": self.holds,
            "violation_count": len(self.violations),
            "violations": [
                [v[0]] + [_fmt(mp, x) for x in v[1:]] for v in self.violations[:sample]
            ],
            "comparison_margin": _fmt(mp, self.comparison_margin),
        }


@dataclass(frozen=True)
class SignPatternReport:
    omega: int
    window: tuple[int, int]
    holds: bool
    violations: tuple[int, ...]

    def __post_init__(self):
        assert self.holds == (not self.violations)

    def to_dict(self, ctx=None, sample: int = 10) -> dict:
        return {
            "kind": "sign_pattern",
            "p": self.omega,
            "window": list(self.window),
            "holds": self.holds,
            "violation_count": len(self.violations),
            "violations": list(self.violations[:sample]),
        }


def _check_window(seq, n_lo, n_hi, span):
    if n_lo < seq.start:
        raise WindowError(f"window starts at {n_lo}, before the sequence start {seq.start}")
    if n_hi < n_lo + span:
        raise WindowError(f"window [{n_lo}, {n_hi}] is too small for a span of {span}")


def _z_scan(terms, n_lo, p):
    violations = []
    margin = None
    for i in range(len(terms) - p):
        d = terms[i] - terms[i + p]
        if margin is None or d < margin:
            margin = d
        if d < 0:
            violations.append((n_lo + i, terms[i], terms[i + p]))
    return tuple(violations), margin


def check_z_monotone(seq: TermSequence, p: int, n_lo: int, n_hi: int, ctx: PrecisionContext) -> ZReport:
    """Check ``a_{k+p} <= a_k`` for every k in ``[n_lo, n_hi - p]``."""
    if p < 1:
        raise ValueError("period must be positive")
    _check_window(seq, n_lo, n_hi, p)
    violations, margin = _z_scan(eval_terms(seq, n_lo, n_hi, ctx), n_lo, p)
    return ZReport("z_monotone", p, (n_lo, n_hi), not violations, violations, margin)


def infer_min_odd_period(seq, n_lo, n_hi, p_max, ctx):
    """Smallest odd p <= p_max that is Z(p)-monotone on the window, or None."""
    if p_max < 1 or p_max % 2 == 0:
        raise ValueError("p_max must be a positive odd integer")
    _check_window(seq, n_lo, n_hi, p_max)
    terms = eval_terms(seq, n_lo, n_hi, ctx)
    for p in range(1, p_max + 1, 2):
        violations, _ = _z_scan(terms, n_lo, p)
        if not violations:
            return p
    return None


def check_convexity(seq, n_lo, n_hi, ctx, step=1) -> ZReport:
    """Check ``a_{k+s} <= (a_k + a_{k+2s}) / 2`` on the window (s = ``step``).

    ``step > 1`` tests convexity of each interleaved subsequence of stride s.
    """
    if step < 1:
        raise ValueError("step must be positive")
    _check_window(seq, n_lo, n_hi, 2 * step)
    mp = ctx.mp
    terms = eval_terms(seq, n_lo, n_hi, ctx)
    violations = []
    margin = None
    for i in range(len(terms) - 2 * step):
        a0, a1, a2 = terms[i], terms[i + step], terms[i + 2 * step]
        # exact, so the sign of the comparison is never a rounding artefact
        d = mp.fsub(mp.fadd(a0, a2, exact=True), mp.ldexp(a1, 1), exact=True)
        if margin is None or d < margin:
            margin = d
        if d < 0:
            violations.append((n_lo + i, a0, a1, a2))
    if margin is not None:
        margin = mp.ldexp(margin, -1)
    return ZReport("convexity", step, (n_lo, n_hi), not violations, tuple(violations), margin)


def check_slow_decay(seq, p, n_lo, n_hi, ctx) -> ZReport:
    """Check ``a_k <= 2 a_{k+p}`` (each subsequence decays no faster than 2^-j)."""
    if p < 1:
        raise ValueError("period must be positive")
    _check_window(seq, n_lo, n_hi, p)
    terms = eval_terms(seq, n_lo, n_hi, ctx)
    violations = []
    margin = None
    for i in range(len(terms) - p):
        d = 2 * terms[i + p] - terms[i]
        if margin is None or d < margin:
            margin = d
        if d < 0:
            violations.append((n_lo + i, terms[i], terms[i + p]))
    return ZReport("slow_decay", p, (n_lo, n_hi), not violations, tuple(violations), margin)


def check_sign_pattern(seq, omega, n_lo, n_hi, ctx) -> SignPatternReport:
    """Check ``sign(a_k) = -sign(a_{k+omega})`` for k in ``[n_lo, n_hi - omega]``.

    Raises :class:`DomainError` on a zero term, since the pattern is only
    defined for non-vanishing terms.
    """
    if omega < 1:
        raise ValueError("omega must be positive")
    _check_window(seq, n_lo, n_hi, omega)
    signs = []
    for n in range(n_lo, n_hi + 1):
        # eval_term rejects zeros only in explicit mode; the pattern needs them gone everywhere
        if not eval_terms(seq, n, n, ctx)[0]:
            raise DomainError(f"zero term at n={n}; sign pattern undefined")
        signs.append(sign_at(seq, n, ctx))
    violations = tuple(n_lo + i for i in range(len(signs) - omega) if signs[i] == signs[i + omega])
    return SignPatternReport(omega, (n_lo, n_hi), not violations, violations)
