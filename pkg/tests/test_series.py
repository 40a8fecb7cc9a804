import json

import pytest

from zseries.errors import DomainError, NegativeMagnitudeError, SeriesError
from zseries.expression import parse_expression
from zseries.series import (
    ALTERNATING_MINUS,
    PrecisionContext,
    TermSequence,
    eval_term,
    eval_terms,
    load_series,
    series_from_dict,
    series_to_dict,
    sign_at,
    signed_term,
)


def test_example_two_terms(ctx, z3):
    assert eval_term(z3, 1, ctx) == ctx.mp.mpf(3) / 2
    assert eval_term(z3, 2, ctx) == ctx.mp.mpf(1) / 10
    # k = 2 block: a_7 = 1/2 + 1/4, a_12 = 1/2
    assert eval_term(z3, 7, ctx) == ctx.mp.mpf("0.75")
    assert eval_term(z3, 12, ctx) == ctx.mp.mpf("0.5")


def test_simple_magnitude(ctx, ln2):
    assert eval_term(ln2, 7, ctx) == ctx.mp.mpf(1) / 7


def test_signed_terms(ctx, ln2):
    assert signed_term(ln2, 1, ctx) == 1
    assert signed_term(ln2, 2, ctx) == -ctx.mp.mpf(1) / 2
    minus = TermSequence.from_expr("1/n", sign=ALTERNATING_MINUS)
    assert signed_term(minus, 2, ctx) == ctx.mp.mpf(1) / 2


def test_explicit_sign(ctx):
    seq = TermSequence.from_expr("1/n", sign="(-1)^floor((n-1)/2)")
    assert [sign_at(seq, n, ctx) for n in range(1, 9)] == [1, 1, -1, -1, 1, 1, -1, -1]
    assert seq.explicit_sign


def test_index_before_start(ctx, ln2):
    with pytest.raises(DomainError):
        eval_term(ln2, 0, ctx)


def test_negative_magnitude(ctx):
    seq = TermSequence.from_expr("1/n - 1/3")
    with pytest.raises(NegativeMagnitudeError):
        eval_term(seq, 5, ctx)


def test_zero_term_rejected_only_with_explicit_signs(ctx):
    assert eval_term(TermSequence.table([1, 0]), 2, ctx) == 0
    seq = TermSequence.table([1, 0], sign="1")
    with pytest.raises(DomainError):
        eval_term(seq, 2, ctx)


def test_table_is_zero_past_its_end(ctx):
    seq = TermSequence.table(["1", "0.9", "0.1"])
    assert eval_terms(seq, 1, 5, ctx) == [1, ctx.mp.mpf("0.9"), ctx.mp.mpf("0.1"), 0, 0]


def test_piecewise_coverage_is_validated():
    with pytest.raises(SeriesError):
        TermSequence.piecewise([(2, 1, "(n+1)/2", "1/k")])
    with pytest.raises(SeriesError):
        TermSequence.piecewise([(2, 1, "(n+1)/2", "1/k"), (2, 0, "n/2", "1/k"), (4, 0, "n/4", "1/k")])
    with pytest.raises(SeriesError):
        TermSequence.piecewise([(2, 1, "n/2", "1/k"), (2, 0, "n/2", "1/k")])
    with pytest.raises(ValueError):
        TermSequence.piecewise([(2, 1, "n*n", "1/k"), (2, 0, "n/2", "1/k")])


def test_piecewise_period(z3):
    assert z3.magnitude.period == 6


def test_name_does_not_affect_equality():
    assert TermSequence.from_expr("1/n", name="a") == TermSequence.from_expr("1/n", name="b")


def test_precision_context():
    with pytest.raises(ValueError):
        PrecisionContext(32)
    ctx = PrecisionContext(128)
    third = ctx.guard.mpf(1) / 3
    assert ctx.round_down(third) < third < ctx.round_up(third)
    assert ctx.doubled().bits == 256


def test_precision_from_environment(monkeypatch):
    monkeypatch.setenv("ZSERIES_PRECISION_BITS", "512")
    assert PrecisionContext.from_env().bits == 512
    monkeypatch.delenv("ZSERIES_PRECISION_BITS")
    assert PrecisionContext.from_env().bits == 256


def test_contexts_are_independent():
    lo, hi = PrecisionContext(64), PrecisionContext(512)
    assert lo.mp.prec == 64 and hi.mp.prec == 512
    assert lo.mp.mpf(1) / 3 != hi.mp.mpf(1) / 3


def test_json_round_trip(tmp_path, z3):
    data = series_to_dict(z3)
    path = tmp_path / "z3.json"
    path.write_text(json.dumps(data))
    seq, raw = load_series(path)
    assert seq == z3
    assert raw["name"] == "z3_sum2"


def test_json_explicit_sign_round_trip():
    seq = TermSequence.from_expr("1/n", sign="cos(n)", name="s")
    assert series_from_dict(series_to_dict(seq)) == seq
    assert seq.sign == parse_expression("cos(n)")


@pytest.mark.parametrize(
    "data",
    [
        {"start": 1},
        {"start": -1, "magnitude": {"expr": "1/n"}},
        {"start": 1, "magnitude": {"expr": "1/n"}, "sign": "plus"},
        {"start": 1, "magnitude": {"expr": "1/n"}, "colour": "red"},
        {"start": 1, "magnitude": {"pieces": []}},
    ],
)
def test_schema_rejects_bad_definitions(data):
    with pytest.raises(SeriesError):
        series_from_dict(data)


def test_bad_expression_in_definition():
    with pytest.raises(SeriesError):
        series_from_dict({"start": 1, "magnitude": {"expr": "2^-n"}})
