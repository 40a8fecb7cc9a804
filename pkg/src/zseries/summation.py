"""Partial sums, adaptive certified summation and the subsequence
decomposition used as an independent regrouping check."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import bounds as B
from .errors import PreconditionError
from .series import INHERIT, PrecisionContext, Strided, TermSequence, eval_term, sign_at, signed_term

DEFAULT_MAX_INDEX = 10**7

_ALIASES = {
    "leibniz": "leibniz",
    "z": "z_simple",
    "proof": "z_simple",
    "z_simple": "z_simple",
    "z_proof": "z_simple",
    "stated": "z_stated",
    "z_stated": "z_stated",
    "improved": "z_improved",
    "z_improved": "z_improved",
    "half": "half_upper",
    "half_upper": "half_upper",
    "delta": "delta_upper",
    "delta_upper": "delta_upper",
    "delta_slow": "delta_slow_upper",
    "delta_slow_upper": "delta_slow_upper",
}

SUM_METHODS = tuple(sorted(set(_ALIASES)))


def normalize_method(method: str) -> str:
    try:
        return _ALIASES[method.replace("-", "_")]
    except KeyError:
        raise ValueError(f"unknown bound method {method!r}; choose from {', '.join(SUM_METHODS)}") from None


def partial_sum(seq: TermSequence, m: int, ctx: PrecisionContext):
    """``S_m``, summed in increasing index order with guard bits."""
    if m < seq.start:
        raise ValueError(f"m={m} is before the sequence start {seq.start}")
    acc = ctx.guard.zero
    for n in range(seq.start, m + 1):
        acc += signed_term(seq, n, ctx)
    return ctx.mp.mpf(acc)


def iter_partial_sums(seq, ctx, m_hi, m_lo=None):
    """Yield ``(m, S_m)`` for ``m_lo <= m <= m_hi``, reusing the running sum."""
    m_lo = seq.start if m_lo is None else m_lo
    acc = ctx.guard.zero
    for n in range(seq.start, m_hi + 1):
        acc += signed_term(seq, n, ctx)
        if n >= m_lo:
            yield n, ctx.mp.mpf(acc)


@dataclass(frozen=True)
class SummationResult:
    sum: object
    m: int
    bound: B.RemainderBound
    tolerance: object
    certified: bool
    terms_evaluated: int
    assumed_limit_zero: bool
    method: str = ""
    omega: int = 1
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.certified:
            assert self.bound.valid and self.bound.value <= self.tolerance


# --------------------------------------------------------------------------
# adaptive summation


def _real_bound(method, seq, m, omega, ctx, window):
    step = B.strand_step(seq, omega)
    if method == "leibniz":
        return B.leibniz_bound(seq, m, ctx, window=window)
    if method == "z_simple":
        return B.z_bound(seq, m, omega, ctx, "proof", window=window)
    if method == "z_stated":
        return B.z_bound(seq, m, omega, ctx, "stated", window=window)
    if method == "z_improved":
        return B.z_bound_improved(seq, m, omega, ctx, window=window)
    if method == "half_upper":
        return B.half_bounds(seq, m, ctx, window=window)[1]
    slow = method == "delta_slow_upper"
    return B.delta_bounds(seq, m, step, ctx, slow_decay=slow, window=window)[1]


class _Condition:
    """One local inequality at index k that needs terms up to ``k + span``."""

    def __init__(self, span, ok):
        self.span = span
        self.ok = ok
        self.bad = deque()

    def feed(self, buf, k):
        if not self.ok(buf, k):
            self.bad.append(k)

    def clean_on(self, lo, hi):
        while self.bad and self.bad[0] < lo:
            self.bad.popleft()
        return not self.bad or self.bad[0] > hi - self.span


class _Scanner:
    """Term buffer plus incrementally tracked precondition violations."""

    def __init__(self, seq, ctx, method, step, window):
        self.seq, self.ctx = seq, ctx
        self.a = {}
        self.loaded = seq.start - 1
        self.evaluated = 0
        mp = ctx.mp
        a = self.a
        span = 1 if method == "half_upper" else step
        conds = [_Condition(span, lambda b, k, s=span: b[k + s] <= b[k])]
        if method in ("half_upper", "delta_upper", "delta_slow_upper"):
            c = 1 if method == "half_upper" else step

            def convex(b, k, c=c):
                d = mp.fsub(mp.fadd(b[k], b[k + 2 * c], exact=True), mp.ldexp(b[k + c], 1), exact=True)
                return d >= 0

            conds.append(_Condition(2 * c, convex))
        if method == "delta_slow_upper":
            conds.append(_Condition(step, lambda b, k: b[k] <= 2 * b[k + step]))
        if seq.explicit_sign:
            sgn = self.s
            conds.append(_Condition(span, lambda b, k: sgn(k) != sgn(k + span)))
        self.conds = conds
        self.a = a

    def s(self, n):
        return sign_at(self.seq, n, self.ctx)

    def get(self, n):
        return self.a[n]

    def load_to(self, hi):
        while self.loaded < hi:
            n = self.loaded + 1
            self.a[n] = eval_term(self.seq, n, self.ctx)
            self.evaluated += 1
            self.loaded = n
            for c in self.conds:
                k = n - c.span
                if k >= self.seq.start:
                    c.feed(self.a, k)

    def evict_below(self, n):
        for k in [k for k in self.a if k < n]:
            del self.a[k]

    def clean(self, lo, hi):
        return all(c.clean_on(lo, hi) for c in self.conds)


def _window_of(method, m, step, window):
    if method == "half_upper":
        lo = m
        span = 2
    elif method in ("delta_upper", "delta_slow_upper"):
        lo = m + 1 - step if method == "delta_slow_upper" else m + 1
        span = 2 * step
    else:
        lo = m + 1
        span = step
    return lo, B._tail_hi(lo, span, window)


def _initial_reports(method, seq, n0, step, ctx, window):
    if method == "half_upper":
        return B.half_reports(seq, n0, ctx, window)
    if method in ("delta_upper", "delta_slow_upper"):
        m = n0 - 1 + (step if method == "delta_slow_upper" else 0)
        return B.delta_reports(seq, m, step, ctx, method == "delta_slow_upper", window)
    return B.z_reports(seq, n0 - 1, step, ctx, window)


def sum_to_tolerance(
    seq: TermSequence,
    omega: int,
    tol,
    method: str,
    ctx: PrecisionContext,
    limit_zero_asserted: bool,
    *,
    n0: int | None = None,
    max_index: int = DEFAULT_MAX_INDEX,
    window: int = B.DEFAULT_WINDOW,
) -> SummationResult:
    """Advance partial sums until the selected bound certifies ``|R_m| <= tol``.

    The stopping index is scanned in steps of one, so the result is the
    smallest certifiable ``m`` (bounds fluctuate with the subsequence
    period). ``n0`` is the index from which the caller claims the tail
    hypotheses; they are checked on an initial window there and
    :class:`PreconditionError` is raised if they fail. ``lim a_n = 0`` cannot
    be verified numerically: the caller must assert it and the assertion is
    recorded in the result.

    Reaching ``max_index`` is not an error; the result is returned with
    ``certified=False``.
    """
    if not limit_zero_asserted:
        raise PreconditionError("the caller must assert lim a_n = 0 (limit_zero_asserted=True)")
    mp = ctx.mp
    tol = mp.mpf(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    method = normalize_method(method)
    step = 1 if method == "leibniz" else B.strand_step(seq, omega)
    n0 = seq.start if n0 is None else max(n0, seq.start)
    pre = _initial_reports(method, seq, n0, step, ctx, window)
    if not all(r.holds for r in pre):
        failed = next(r for r in pre if not r.holds)
        raise PreconditionError(
            f"{failed.to_dict(ctx)['kind']} fails on the initial window {failed.window}", failed
        )

    first_m = seq.start + (step if method == "delta_slow_upper" else 0)
    scan = _Scanner(seq, ctx, method, step, window)
    a, s = scan.get, scan.s
    slack = 1 + mp.ldexp(1, -20)
    acc = ctx.guard.zero
    notes = ["lim a_n = 0 asserted by caller, not verified"]
    m = seq.start - 1
    for m in range(seq.start, max_index + 1):
        lo, hi = _window_of(method, m, step, window)
        scan.load_to(hi)
        acc += a(m) if s(m) > 0 else -a(m)
        if m % 4096 == 0:
            scan.evict_below(m - 2 * step - 2)
        if m < first_m:
            continue
        # cheap rounded estimate first; certify only near the threshold
        if method == "half_upper":
            rough = a(m) / 2
        elif method in ("delta_upper", "delta_slow_upper"):
            rough = None
        elif method == "z_improved":
            rough = None
        else:
            rough = sum(a(n) for n in range(m + 1, m + step + 1 + (method == "z_stated")))
        if rough is not None and rough > tol * slack:
            continue
        if not scan.clean(lo, hi):
            continue
        if method == "half_upper":
            value = B.half_values(ctx, a, m)[1]
        elif method in ("delta_upper", "delta_slow_upper"):
            value = B.delta_values(ctx, a, s, m, step, method == "delta_slow_upper")[1]
        elif method == "z_improved":
            value = B.improved_value(ctx, a, s, m, step)
        else:
            value = B.z_value(ctx, a, m, step if method != "leibniz" else 1, method == "z_stated")
        if value > tol:
            continue
        bound = _real_bound(method, seq, m, omega, ctx, window)
        if bound.valid and bound.value <= tol:
            return SummationResult(
                mp.mpf(acc), m, bound, tol, True, scan.evaluated, True, method, omega, tuple(notes)
            )
    bound = _real_bound(method, seq, m, omega, ctx, window)
    notes.append(f"maximum index {max_index} reached without certification")
    return SummationResult(
        mp.mpf(acc), m, bound, tol, False, scan.evaluated, True, method, omega, tuple(notes)
    )


# --------------------------------------------------------------------------
# subsequence decomposition


@dataclass(frozen=True)
class SubseriesDecomposition:
    """The series split into ``step`` interleaved subsequences.

    Component ``k`` (1-based) holds the parent terms at indices
    ``start + k - 1 + j*step`` for ``j >= 0``; its own index starts at 0.
    """

    parent: TermSequence
    omega: int
    step: int
    components: tuple[TermSequence, ...]

    def parent_index(self, k: int, j: int) -> int:
        return self.parent.start + k - 1 + j * self.step

    def count_upto(self, k: int, q: int) -> int:
        """Number of component-k terms with parent index <= q."""
        first = self.parent_index(k, 0)
        return 0 if q < first else (q - first) // self.step + 1

    def component_partial_sum(self, k: int, q: int, ctx):
        """``sigma_{q,k}``: the component's terms with parent index <= q."""
        count = self.count_upto(k, q)
        if count == 0:
            return ctx.mp.zero
        return partial_sum(self.components[k - 1], count - 1, ctx)

    def partial_sums(self, q: int, ctx) -> list:
        return [self.component_partial_sum(k, q, ctx) for k in range(1, self.step + 1)]

    def first_rejected(self, k: int, q: int) -> int:
        """Parent index of the first component-k term beyond the cut q."""
        return self.parent_index(k, self.count_upto(k, q))


def decompose(seq: TermSequence, omega: int) -> SubseriesDecomposition:
    step = B.strand_step(seq, omega)
    comps = tuple(
        TermSequence(0, Strided(seq, seq.start + k - 1, step), INHERIT, f"{seq.name}[{k}]")
        for k in range(1, step + 1)
    )
    return SubseriesDecomposition(seq, omega, step, comps)


@dataclass(frozen=True)
class CrossCheck:
    m: int
    direct: object
    recombined: object
    difference: object
    component_bounds: tuple
    max_component_bound: object
    tolerance: object

    @property
    def consistent(self) -> bool:
        return abs(self.difference) <= self.tolerance


def cross_check(seq, omega, m, ctx) -> CrossCheck:
    """Compare ``S_m`` with the sum of the component partial sums at cut m.

    ``max_component_bound`` adds the first rejected term of every component,
    i.e. the sum of the per-component Leibniz bounds.
    """
    dec = decompose(seq, omega)
    direct = partial_sum(seq, m, ctx)
    acc = ctx.guard.zero
    for sigma in dec.partial_sums(m, ctx):
        acc += sigma
    recombined = ctx.mp.mpf(acc)
    comp = tuple(eval_term(seq, dec.first_rejected(k, m), ctx) for k in range(1, dec.step + 1))
    total = B.certify(ctx, [(1, v) for v in comp], True)
    tol = ctx.mp.ldexp(1, -(ctx.bits - 10))
    return CrossCheck(m, direct, recombined, direct - recombined, comp, total, tol)
