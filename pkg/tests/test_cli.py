import json

import pytest

from zseries import cli
from zseries.errors import SeriesError
from zseries.schema import validate_report


def run_json(capsys, *argv):
    code = cli.main([*argv, "--json"])
    out = capsys.readouterr().out
    data = json.loads(out)
    validate_report(data)
    assert data["exit_code"] == code
    return code, data


def test_check_holds(capsys):
    code, data = run_json(capsys, "check", "--corpus", "z3_sum2", "--p", "3", "--from", "1", "--to", "600")
    assert code == 0 and data["outputs"]["checks"][0]["holds"] is True


def test_check_fails(capsys):
    code, data = run_json(capsys, "check", "--corpus", "z3_sum2", "--p", "1", "--from", "1", "--to", "600")
    assert code == 1
    check = data["outputs"]["checks"][0]
    assert check["violations"][0][0] == 2 and len(check["violations"]) == 10


def test_check_infers_period(capsys):
    code, data = run_json(capsys, "check", "--corpus", "cos_shift", "--infer", "9", "--to", "3000")
    assert code == 0 and data["outputs"]["min_odd_period"] == 5


def test_check_other_properties(capsys):
    code, data = run_json(capsys, "check", "--corpus", "ln2", "--convexity", "--slow-decay", "1", "--sign-pattern", "1")
    assert code == 0 and [c["kind"] for c in data["outputs"]["checks"]] == ["convexity", "slow_decay", "sign_pattern"]


def test_missing_file(capsys):
    assert cli.main(["check", "--series", "missing.json"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_bad_definition(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"start": 1, "magnitude": {"expr": "2^-n"}}))
    assert cli.main(["check", "--series", str(path), "--p", "1"]) == 2
    path.write_text("{not json")
    assert cli.main(["check", "--series", str(path), "--p", "1"]) == 2


def test_series_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"name": "h", "start": 1, "magnitude": {"expr": "1/n"}}))
    code, data = run_json(capsys, "sum", "--series", str(path), "--tol", "1e-3", "--assume-limit-zero")
    assert code == 0 and data["inputs"]["series"] == "h"
    assert any("inferred" in w for w in data["warnings"])


def test_sum_ln2(capsys):
    code, data = run_json(capsys, "sum", "--corpus", "ln2", "--tol", "1e-4", "--method", "half", "--assume-limit-zero")
    assert code == 0 and data["outputs"]["certified"]
    assert abs(float(data["outputs"]["sum"]) - 0.6931471805599453) < 1e-4
    assert cli.LIMIT_ZERO_WARNING in data["warnings"]


def test_sum_requires_limit_assertion(capsys):
    assert cli.main(["sum", "--corpus", "ln2", "--tol", "1e-6"]) == 2


def test_sum_uncertified_exit_code(capsys):
    code, data = run_json(
        capsys, "sum", "--corpus", "rd2", "--tol", "1e-8", "--method", "leibniz", "--assume-limit-zero",
        "--max-index", "5000",
    )
    assert code == 3 and data["outputs"]["certified"] is False
    assert abs(float(data["outputs"]["sum"]) - 1) < 1e-8


def test_sum_precondition_failure(capsys):
    code, data = run_json(capsys, "sum", "--corpus", "z3_sum2", "--tol", "1e-3", "--method", "half", "--assume-limit-zero")
    assert code == 1 and data["outputs"]["failed_check"]["holds"] is False


def test_sum_stated_variant_warns(capsys):
    code, data = run_json(capsys, "sum", "--corpus", "z3_sum2", "--tol", "1e-2", "--method", "z_stated", "--assume-limit-zero")
    assert code == 0 and any("2*omega" in w for w in data["warnings"])


def test_bounds_example_two(capsys):
    code, data = run_json(capsys, "bounds", "--corpus", "z3_sum2", "--omega", "2", "--m", "6..60")
    assert code == 0 and data["outputs"]["unsound_cells"] == 0
    cells = [c for row in data["outputs"]["rows"] for c in row["bounds"].values() if c["valid"]]
    assert cells and all(c["sound"] for c in cells)


def test_bounds_half_on_ln2(capsys):
    code, data = run_json(capsys, "bounds", "--corpus", "ln2", "--m", "10..20", "--method", "half")
    assert code == 0
    for row in data["outputs"]["rows"]:
        assert set(row["bounds"]) == {"half_lower", "half_upper"}
        r = abs(float(row["oracle_remainder"]))
        assert float(row["bounds"]["half_lower"]["value"]) <= r <= float(row["bounds"]["half_upper"]["value"])


def test_bounds_rd2_fluctuation(capsys):
    code, data = run_json(capsys, "bounds", "--corpus", "rd2", "--m", "20")
    row = data["outputs"]["rows"][0]
    assert float(row["oracle_remainder"]) == 2**-10
    assert abs(float(row["bounds"]["leibniz"]["value"]) - 1 / 11) < 1e-15
    assert float(row["oracle_remainder"]) / (1 / 11) < 0.02


def test_bounds_without_closed_form_warns(capsys):
    code, data = run_json(capsys, "bounds", "--corpus", "cos_shift", "--m", "10")
    assert code == 0 and any("oracle unavailable" in w for w in data["warnings"])


def test_bad_range(capsys):
    assert cli.main(["bounds", "--corpus", "ln2", "--m", "9..3"]) == 2


def test_zv_cos_shift(capsys):
    code, data = run_json(capsys, "zv", "--corpus", "cos_shift", "--pair", "0")
    cert = data["outputs"]["pairs"][0]["certificate"]
    assert code == 0 and 4 <= float(cert["T"]) <= 4.01 and cert["window"] == 5


def test_zv_identical_and_infeasible(tmp_path, capsys):
    path = tmp_path / "e.json"
    base = {"name": "lin", "start": 1, "magnitude": {"expr": "1/n"}}
    path.write_text(json.dumps({**base, "envelopes": {"lower": "x", "upper": "x", "from": 1, "direction": "inc", "function": "x"}}))
    code, data = run_json(capsys, "zv", "--series", str(path), "--grid-end", "100")
    assert code == 0 and data["outputs"]["pairs"][0]["certificate"]["window"] == 1
    bad = {"lower": "1 - 1/x", "upper": "x", "from": 1, "direction": "inc", "function": "1"}
    path.write_text(json.dumps({**base, "envelopes": [bad]}))
    code, data = run_json(capsys, "zv", "--series", str(path), "--grid-end", "100")
    assert code == 1


def test_zv_without_envelopes(capsys):
    assert cli.main(["zv", "--corpus", "ln2"]) == 2


def test_corpus_commands(tmp_path, capsys):
    assert cli.main(["corpus", "list"]) == 0
    assert "z3_sum2" in capsys.readouterr().out
    out = tmp_path / "rd2.json"
    assert cli.main(["corpus", "export", "rd2", "-o", str(out)]) == 0
    capsys.readouterr()
    code, data = run_json(capsys, "check", "--series", str(out), "--p", "1", "--from", "9", "--to", "500")
    assert code == 0
    assert cli.main(["corpus", "export"]) == 2


def test_precision_flag_and_environment(monkeypatch, capsys):
    _, data = run_json(capsys, "check", "--corpus", "ln2", "--p", "1", "--precision", "128")
    assert data["inputs"]["precision"] == 128
    monkeypatch.setenv("ZSERIES_PRECISION_BITS", "320")
    _, data = run_json(capsys, "check", "--corpus", "ln2", "--p", "1")
    assert data["inputs"]["precision"] == 320
    assert cli.main(["check", "--corpus", "ln2", "--p", "1", "--precision", "16"]) == 2


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["check"])
    assert info.value.code == 2
    assert cli.main(["check", "--corpus", "unknown"]) == 2


def test_report_round_trip():
    report = cli.RunReport(["check"], {"series": "ln2", "precision": 256}, {"x": 1}, ["w"], 0)
    data = report.to_dict()
    assert cli.RunReport.from_dict(data) == report
    data["exit_code"] = 7
    with pytest.raises(SeriesError):
        cli.RunReport.from_dict(data)


def test_text_output(capsys):
    assert cli.main(["check", "--corpus", "z3_sum2", "--p", "3", "--to", "600"]) == 0
    assert "holds" in capsys.readouterr().out
