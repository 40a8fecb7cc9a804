"""High-precision reference sums and remainders used to test the bounds.

The oracle always works at twice the caller's precision (at least). Known
closed forms are preferred; otherwise the series is summed far out until the
improved Z bound certifies the requested accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .bounds import RemainderBound
from .errors import OracleError, PreconditionError
from .series import PrecisionContext, TermSequence
from .summation import DEFAULT_MAX_INDEX, iter_partial_sums, partial_sum, sum_to_tolerance

CLOSED_FORM = "closed_form"
FAR_SUMMATION = "far_summation"


@dataclass(frozen=True)
class ReferenceSum:
    """The sum S at ``precision_bits``.

    For far summation ``|value - S| <= residual_bound.value`` (plus rounding
    at the oracle precision); closed forms carry only rounding error.
    """

    value: object
    source: str
    far_index: int | None
    residual_bound: RemainderBound | None
    precision_bits: int
    tolerance: object

    def __post_init__(self):
        if self.source == FAR_SUMMATION:
            assert self.residual_bound.valid and self.residual_bound.value < self.tolerance

    @property
    def error(self):
        """Upper bound on ``|value - S|`` ignoring final rounding."""
        return self.residual_bound.value if self.residual_bound is not None else 0


def oracle_context(ctx: PrecisionContext) -> PrecisionContext:
    return ctx.doubled()


def _lookup_closed_form(seq):
    from .corpus import closed_sum_for

    return closed_sum_for(seq)


@lru_cache(maxsize=256)
def _reference_sum(seq, omega, tol_text, bits, closed_sum, mode, n0, max_index):
    octx = PrecisionContext(bits)
    tol = octx.mp.mpf(tol_text)
    if mode != FAR_SUMMATION:
        closed = closed_sum if closed_sum is not None else _lookup_closed_form(seq)
        if closed is not None:
            return ReferenceSum(+closed(octx.mp), CLOSED_FORM, None, None, bits, tol)
        if mode == CLOSED_FORM:
            raise OracleError(f"no closed form registered for {seq.name or 'this series'}")
    try:
        res = sum_to_tolerance(seq, omega, tol, "z_improved", octx, True, n0=n0, max_index=max_index)
    except PreconditionError as exc:
        raise OracleError(f"far summation impossible: {exc}") from exc
    if not res.certified or not res.bound.value < tol:
        raise OracleError(f"oracle tolerance {tol_text} not reached by index {max_index}")
    return ReferenceSum(res.sum, FAR_SUMMATION, res.m, res.bound, bits, tol)


def reference_sum(
    seq: TermSequence,
    omega: int,
    oracle_tol,
    ctx: PrecisionContext,
    *,
    closed_sum=None,
    mode: str = "auto",
    n0: int | None = None,
    max_index: int = DEFAULT_MAX_INDEX,
) -> ReferenceSum:
    """Reference value of the full sum at ``2 * ctx.bits``.

    ``closed_sum`` is a callable ``mp -> value``; when omitted the corpus
    registry is searched for an entry with an equal sequence. ``mode`` forces
    ``"closed_form"`` or ``"far_summation"``. Results are cached.
    """
    if mode not in ("auto", CLOSED_FORM, FAR_SUMMATION):
        raise ValueError(f"unknown oracle mode {mode!r}")
    octx = oracle_context(ctx)
    return _reference_sum(seq, omega, str(oracle_tol), octx.bits, closed_sum, mode, n0, max_index)


def reference_remainder(seq, m, omega, oracle_tol, ctx, **kwargs):
    """``R_m = S - S_m`` at oracle precision."""
    ref = reference_sum(seq, omega, oracle_tol, ctx, **kwargs)
    if m < seq.start:
        return ref.value
    octx = PrecisionContext(ref.precision_bits)
    return ref.value - partial_sum(seq, m, octx)


def reference_remainders(seq, ms, omega, oracle_tol, ctx, **kwargs) -> dict:
    """``{m: R_m}`` for every m in ``ms``, sharing one pass of partial sums."""
    ms = sorted(set(ms))
    if not ms:
        return {}
    ref = reference_sum(seq, omega, oracle_tol, ctx, **kwargs)
    octx = PrecisionContext(ref.precision_bits)
    wanted = set(ms)
    out = {m: ref.value for m in ms if m < seq.start}
    if ms[-1] < seq.start:
        return out
    for m, s in iter_partial_sums(seq, octx, ms[-1], max(ms[0], seq.start)):
        if m in wanted:
            out[m] = ref.value - s
    return out
