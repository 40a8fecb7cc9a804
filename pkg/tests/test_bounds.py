import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zseries.bounds import (
    all_bounds,
    certify,
    delta_bounds,
    half_bounds,
    leibniz_bound,
    remainder_enclosure,
    strand_step,
    z_bound,
    z_bound_improved,
)
from zseries.corpus import get, make_random_z_entry
from zseries.oracle import reference_remainder, reference_remainders
from zseries.series import ALTERNATING_MINUS, PrecisionContext, TermSequence


def close(ctx, x, y, rel=None):
    rel = ctx.mp.ldexp(1, -(ctx.bits - 12)) if rel is None else rel
    return abs(x - y) <= rel * max(abs(y), 1e-300)


def test_leibniz_first_omitted_term(ctx, ln2):
    b = leibniz_bound(ln2, 10, ctx)
    assert b.valid and b.value >= ctx.mp.mpf(1) / 11
    assert close(ctx, b.value, ctx.mp.mpf(1) / 11)


def test_leibniz_on_rd2(ctx, rd2):
    for n in (10, 25):
        assert close(ctx, leibniz_bound(rd2, 2 * n, ctx).value, ctx.mp.mpf(1) / (n + 1))
        # a_{2n} = 1/n - 2^-n
        expected = ctx.mp.mpf(1) / n - ctx.mp.ldexp(1, -n)
        assert close(ctx, leibniz_bound(rd2, 2 * n - 1, ctx).value, expected)


def test_leibniz_invalid_before_rd2_is_monotone(ctx, rd2):
    b = leibniz_bound(rd2, 3, ctx)
    assert not b.valid
    assert not b.preconditions[0].holds
    assert leibniz_bound(rd2, 8, ctx).valid


def test_z_bound_variants(ctx, ln2, z3):
    mp = ctx.mp
    assert close(ctx, z_bound(ln2, 10, 1, ctx).value, mp.mpf(1) / 11)
    stated = z_bound(ln2, 10, 1, ctx, "stated")
    assert close(ctx, stated.value, mp.mpf(1) / 11 + mp.mpf(1) / 12)
    assert stated.notes
    expected = 2 * (mp.mpf(1) / 3 + mp.mpf(1) / 8) + mp.mpf(1) / 1000
    b = z_bound(z3, 12, 2, ctx)
    assert b.valid and b.method == "z_simple" and close(ctx, b.value, expected)
    with pytest.raises(ValueError):
        z_bound(z3, 12, 2, ctx, "other")
    with pytest.raises(ValueError):
        z_bound(z3, 12, 0, ctx)


def test_cut_below_start(ctx, ln2):
    with pytest.raises(ValueError):
        leibniz_bound(ln2, -1, ctx)
    assert close(ctx, leibniz_bound(ln2, 0, ctx).value, 1)
    with pytest.raises(ValueError):
        half_bounds(ln2, 0, ctx)


def test_improved_reduces_to_leibniz(ctx, ln2):
    assert z_bound_improved(ln2, 10, 1, ctx).value == leibniz_bound(ln2, 10, ctx).value


def test_improved_tracks_example_two_asymptotics(ctx, z3):
    k = 100
    b = z_bound_improved(z3, 6 * k + 3, 2, ctx).value
    r = reference_remainder(z3, 6 * k + 3, 2, "1e-30", ctx)
    assert 1 <= b / abs(r) < 1.01


def test_enclosure_sign_bookkeeping(ctx):
    mp = ctx.mp
    minus = TermSequence.from_expr("1/n", sign=ALTERNATING_MINUS)
    # (-1)^n with m even: the first omitted term a_{m+1} is negative
    e = remainder_enclosure(minus, 10, 1, ctx)
    assert e.hi == 0 and close(ctx, -e.lo, mp.mpf(1) / 11)
    e = remainder_enclosure(minus, 10, 2, ctx)
    assert close(ctx, e.hi, mp.mpf(1) / 12)
    assert close(ctx, -e.lo, mp.mpf(1) / 11 + mp.mpf(1) / 13)
    plus = TermSequence.from_expr("1/n")
    e = remainder_enclosure(plus, 10, 2, ctx)
    assert close(ctx, e.hi, mp.mpf(1) / 11 + mp.mpf(1) / 13) and close(ctx, -e.lo, mp.mpf(1) / 12)


def test_enclosure_contains_remainder(ctx, z3):
    rs = reference_remainders(z3, range(0, 80), 2, "1e-40", ctx)
    for m, r in rs.items():
        e = remainder_enclosure(z3, m, 2, ctx)
        assert e.lo <= r <= e.hi


def test_half_bounds_on_harmonic(ctx, ln2):
    mp = ctx.mp
    lo, hi = half_bounds(ln2, 50, ctx)
    assert lo.valid and hi.valid
    assert close(ctx, lo.value, mp.mpf(1) / 102) and close(ctx, hi.value, mp.mpf(1) / 100)
    r = abs(reference_remainder(ln2, 50, 1, "1e-40", ctx))
    assert lo.value <= r <= hi.value


def test_half_bounds_geometric(ctx):
    geo = TermSequence.from_expr("2^(-n)")
    for m in (1, 5, 30):
        lo, hi = half_bounds(geo, m, ctx)
        exact = ctx.mp.ldexp(1, -m) / 3
        assert lo.valid and lo.value <= exact <= hi.value


def test_half_bounds_need_convexity(ctx):
    lo, hi = half_bounds(TermSequence.table(["1", "0.9", "0.1"]), 1, ctx)
    assert not lo.valid and not hi.valid


def test_half_width(ctx, ln2):
    lo, hi = half_bounds(ln2, 20, ctx)
    width = (ctx.mp.mpf(1) / 20 - ctx.mp.mpf(1) / 21) / 2
    assert close(ctx, hi.value - lo.value, width, rel=ctx.mp.ldexp(1, -200))


def test_delta_collapses_to_half_sandwich(ctx, ln2):
    lo, hi = delta_bounds(ln2, 30, 1, ctx)
    assert close(ctx, hi.value, ctx.mp.mpf(1) / 31)
    assert close(ctx, lo.value, ctx.mp.mpf(1) / 62)


def test_delta_lower_floored_at_zero(ctx):
    # a heavy middle strand makes the one-sided combination negative
    entry = make_random_z_entry(3, 11, "harmonic", scales=(1, 3, 1))
    seq = entry.sequence
    lows = [delta_bounds(seq, m, 3, ctx)[0] for m in range(30, 60)]
    floored = [b for b in lows if b.value == 0]
    assert floored and all(b.raw < 0 and b.notes for b in floored)
    assert all(b.value >= 0 for b in lows)


def test_delta_slow_decay_on_cos_shift(ctx, cos_shift):
    m = 2000
    lo, hi = delta_bounds(cos_shift, m, 5, ctx, slow_decay=True)
    # the stride-5 strands of 1/(n + 2cos n) wobble, so convexity fails
    kinds = {r.kind: r.holds for r in hi.preconditions}
    assert kinds == {"z_monotone": True, "convexity": False, "slow_decay": True}
    assert not hi.valid
    assert hi.value < 1.0 / m


def test_delta_slow_needs_room_before_cut(ctx, ln2):
    with pytest.raises(ValueError):
        delta_bounds(ln2, 2, 3, ctx, slow_decay=True)
    with pytest.raises(ValueError):
        delta_bounds(ln2, 20, 2, ctx)


def test_delta_sound_on_convex_random_series(ctx):
    entry = make_random_z_entry(3, 7, "harmonic")
    seq = entry.sequence
    rs = reference_remainders(seq, range(10, 60), 2, "1e-40", ctx, closed_sum=entry.closed_sum)
    for m, r in rs.items():
        lo, hi = delta_bounds(seq, m, 3, ctx)
        assert lo.valid and lo.value <= abs(r) <= hi.value
        lo, hi = delta_bounds(seq, m, 3, ctx, slow_decay=True)
        if hi.valid:
            assert lo.value <= abs(r) <= hi.value


def test_failed_preconditions_do_not_raise(ctx, z3):
    b = leibniz_bound(z3, 10, ctx)
    assert not b.valid and b.value > 0
    data = b.to_dict(ctx)
    assert data["valid"] is False and data["preconditions"][0]["holds"] is False


def test_certify_rounds_outward(ctx):
    third = ctx.mp.mpf(1) / 3
    up = certify(ctx, [(1, third), (-0.5, third)], True)
    down = certify(ctx, [(1, third), (-0.5, third)], False)
    exact = ctx.guard.mpf(third) / 2
    assert down < exact < up


def test_strand_step(ln2):
    assert strand_step(ln2, 3) == 5
    assert strand_step(TermSequence.from_expr("1/n", sign="cos(n)"), 3) == 3


def test_soundness_over_corpus(ctx):
    for entry_id, ms in (("z3_sum2", range(6, 61)), ("ln2", range(1, 60)), ("rd2", range(9, 80))):
        entry = get(entry_id)
        rs = reference_remainders(entry.sequence, ms, entry.omega, "1e-40", ctx)
        for m, r in rs.items():
            for name, b in all_bounds(entry.sequence, m, entry.omega, ctx, window=64).items():
                if not b.valid:
                    continue
                if name == "enclosure":
                    assert b.lo <= r <= b.hi
                elif b.is_upper:
                    assert abs(r) <= b.value, (entry_id, m, name)
                else:
                    assert abs(r) >= b.value, (entry_id, m, name)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([1, 3, 5, 7]), st.integers(0, 10**6), st.integers(0, 200))
def test_ordering_and_leibniz_identity(p, seed, m):
    ctx = PrecisionContext(128)
    entry = make_random_z_entry(p, seed)
    seq, omega = entry.sequence, entry.omega
    imp = z_bound_improved(seq, m, omega, ctx, window=32)
    proof = z_bound(seq, m, omega, ctx, window=32)
    stated = z_bound(seq, m, omega, ctx, "stated", window=32)
    assert imp.value <= proof.value <= stated.value
    assert remainder_enclosure(seq, m, omega, ctx, window=32).value == imp.value
    assert leibniz_bound(seq, m, ctx, window=32).value == z_bound(seq, m, 1, ctx, window=32).value
