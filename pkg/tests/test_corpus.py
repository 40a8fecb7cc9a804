import pytest

from zseries import corpus
from zseries.envelope import Grid, bound_parameter, verify_envelope
from zseries.expression import compile_expression, parse_expression
from zseries.monotonicity import check_z_monotone
from zseries.oracle import reference_remainders
from zseries.series import PrecisionContext, eval_term
from zseries.series import series_from_dict
from zseries.summation import iter_partial_sums


def test_ids_are_stable():
    assert corpus.list_ids() == ["div_z2", "z3_sum2", "ln2", "rd2", "cos_shift"]
    with pytest.raises(KeyError):
        corpus.get("nope")


def test_metadata(ctx):
    assert corpus.get("z3_sum2").closed_sum(ctx.mp) == 2
    assert corpus.get("div_z2").closed_sum is None
    assert corpus.get("div_z2").divergence_threshold == (10, 10**5)
    assert corpus.get("ln2").omega == 1
    assert corpus.get("rd2").start_of_tail == 9
    assert dict(corpus.get("cos_shift").windows) == {"4": 5, "2pi": 7}


@pytest.mark.parametrize("entry_id", corpus.list_ids())
def test_expected_verdicts(ctx, entry_id):
    entry = corpus.get(entry_id)
    for exp in entry.expected:
        assert exp.run(entry.sequence, ctx) == exp.verdict, exp.name


def test_rd2_printed_closed_form_matches_cases(ctx, rd2):
    f = compile_expression(parse_expression(corpus.RD2_CLOSED_PRINT), ctx.mp)
    for n in range(1, 41):
        assert f(n) == eval_term(rd2, n, ctx)


@pytest.mark.parametrize("entry_id, ms", [("z3_sum2", range(0, 400)), ("ln2", range(1, 200)), ("rd2", range(0, 200))])
def test_remainder_formulas_match_the_oracle(ctx, entry_id, ms):
    entry = corpus.get(entry_id)
    mp = PrecisionContext(512).mp
    rs = reference_remainders(entry.sequence, ms, entry.omega, "1e-50", ctx)
    for m, r in rs.items():
        assert abs(r - entry.remainder_formula(mp, m)) < mp.mpf(10) ** -140


def test_cos_shift_envelopes(ctx):
    entry = corpus.get("cos_shift")
    pairs = corpus.envelope_pairs(entry)
    assert len(pairs) == 2
    for pair, f in pairs:
        grid = Grid(pair.domain_start, 300, "0.5")
        assert verify_envelope(pair, f, grid, ctx).holds
        assert bound_parameter(pair, grid, ctx).window == entry.windows["4"]


def test_export_round_trip():
    for entry_id in corpus.list_ids():
        entry = corpus.get(entry_id)
        assert series_from_dict(entry.to_dict()) == entry.sequence
    assert len(corpus.get("cos_shift").to_dict()["envelopes"]) == 2


def test_random_series_construction(ctx):
    seq = corpus.make_random_z_series(3, 42, "mixed")
    assert check_z_monotone(seq, 3, 1, 3000, ctx).holds
    geo = corpus.make_random_z_series(1, 0, "geometric")
    assert check_z_monotone(geo, 1, 1, 300, ctx).holds
    bumpy = corpus.make_random_z_series(3, 42, "harmonic", scales=(1, 0.01, 1))
    assert not check_z_monotone(bumpy, 1, 1, 300, ctx).holds
    assert check_z_monotone(bumpy, 3, 1, 300, ctx).holds


def test_random_series_is_deterministic():
    assert corpus.make_random_z_series(5, 9) == corpus.make_random_z_series(5, 9)
    assert corpus.make_random_z_series(5, 9) != corpus.make_random_z_series(5, 10)


def test_random_series_arguments():
    with pytest.raises(ValueError):
        corpus.make_random_z_series(2, 0)
    with pytest.raises(ValueError):
        corpus.make_random_z_series(3, 0, "cubic")
    with pytest.raises(ValueError):
        corpus.make_random_z_series(3, 0, scales=(1, 1))


def test_random_closed_sums_against_partial_sums(ctx):
    for p, profile in ((1, "geometric"), (3, "harmonic"), (5, "mixed"), (7, "mixed")):
        entry = corpus.make_random_z_entry(p, 123, profile, start=2)
        total = entry.closed_sum(ctx.mp)
        m, s = list(iter_partial_sums(entry.sequence, ctx, 4000, 4000))[0]
        # the tail is smaller than the sum of one term per strand
        tail = sum(eval_term(entry.sequence, n, ctx) for n in range(m + 1, m + p + 1))
        assert abs(total - s) <= tail


@pytest.mark.slow
def test_divergent_example_crosses_ten_late(ctx):
    # the partial sums grow like (ln m)/2, so the first crossing of 10 lies
    # beyond 10^5 terms
    seq = corpus.get("div_z2").sequence
    crossing = None
    for m, s in iter_partial_sums(seq, PrecisionContext(64), 140000):
        if s > 10:
            crossing = m
            break
    assert crossing == 128136
