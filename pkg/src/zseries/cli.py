"""Command-line front end.

Exit codes: 0 success, 1 a checked property or certificate is false,
2 usage or input error, 3 summation stopped without certification.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import corpus
from .bounds import DEFAULT_WINDOW, STATED_NOTE, all_bounds
from .envelope import EnvelopePair, Grid, bound_parameter, parameter_to_window, verify_envelope
from .errors import NoCertificateError, OracleError, PreconditionError, SeriesError
from .expression import Expression, Var, substitute, to_text
from .monotonicity import (
    check_convexity,
    check_sign_pattern,
    check_slow_decay,
    check_z_monotone,
    infer_min_odd_period,
)
from .oracle import reference_remainders, reference_sum
from .schema import validate_report
from .series import PrecisionContext, load_series
from .summation import DEFAULT_MAX_INDEX, SUM_METHODS, sum_to_tolerance

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_UNCERTIFIED = 0, 1, 2, 3

LIMIT_ZERO_WARNING = "lim a_n = 0 is assumed (--assume-limit-zero), not verified"
INFER_P_MAX = 15
INFER_SPAN = 2000


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: list
    inputs: dict
    outputs: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        data = {
            "command": list(self.command),
            "inputs": dict(self.inputs),
            "outputs": self.outputs,
            "warnings": list(self.warnings),
            "exit_code": self.exit_code,
        }
        validate_report(data)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        validate_report(data)
        return cls(data["command"], data["inputs"], data["outputs"], data["warnings"], data["exit_code"])


# --------------------------------------------------------------------------
# input handling


@dataclass
class _Input:
    name: str
    seq: object
    entry: object = None
    raw: dict | None = None

    @property
    def omega(self):
        return self.entry.omega if self.entry is not None else None

    @property
    def n0(self):
        return self.entry.n0 if self.entry is not None else None

    @property
    def envelopes(self):
        if self.entry is not None:
            return list(self.entry.envelopes)
        env = (self.raw or {}).get("envelopes", [])
        return [env] if isinstance(env, dict) else list(env)


def _load(args) -> _Input:
    if args.corpus:
        try:
            entry = corpus.get(args.corpus)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        return _Input(entry.id, entry.sequence, entry)
    try:
        seq, raw = load_series(args.series)
    except OSError as exc:
        raise UsageError(f"cannot read {args.series}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.series} is not valid JSON: {exc}") from None
    return _Input(seq.name or args.series, seq, None, raw)


def _ctx(args) -> PrecisionContext:
    try:
        return PrecisionContext(args.precision) if args.precision else PrecisionContext.from_env()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _nstr(ctx, x, digits=20):
    return None if x is None else ctx.mp.nstr(x, digits)


def _parse_range(text) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"bad index range {text!r}; use M or LO..HI") from None


def _resolve_omega(args, inp, ctx, report) -> int:
    if args.omega is not None:
        if args.omega < 1:
            raise UsageError("--omega must be positive")
        return args.omega
    if inp.omega is not None:
        return inp.omega
    if inp.seq.explicit_sign:
        raise UsageError("--omega is required for explicit-sign series")
    n0 = inp.n0 or inp.seq.start
    p = infer_min_odd_period(inp.seq, n0, n0 + INFER_SPAN, INFER_P_MAX, ctx)
    if p is None:
        raise PreconditionError(f"no odd period <= {INFER_P_MAX} on [{n0}, {n0 + INFER_SPAN}]")
    report.warnings.append(f"omega inferred from Z({p}) on [{n0}, {n0 + INFER_SPAN}] (empirical)")
    return (p + 1) // 2


# --------------------------------------------------------------------------
# commands


def cmd_check(args, inp, ctx, report):
    seq = inp.seq
    lo = args.from_ if args.from_ is not None else seq.start
    hi = args.to if args.to is not None else lo + 1000
    checks = []
    if args.p is not None:
        checks.append(check_z_monotone(seq, args.p, lo, hi, ctx))
    if args.convexity is not None:
        checks.append(check_convexity(seq, lo, hi, ctx, step=args.convexity))
    if args.slow_decay is not None:
        checks.append(check_slow_decay(seq, args.slow_decay, lo, hi, ctx))
    if args.sign_pattern is not None:
        checks.append(check_sign_pattern(seq, args.sign_pattern, lo, hi, ctx))
    outputs = {"checks": [c.to_dict(ctx) for c in checks]}
    ok = all(c.holds for c in checks)
    if args.infer is not None or not checks:
        p_max = args.infer if args.infer is not None else INFER_P_MAX
        if p_max % 2 == 0:
            raise UsageError("--infer needs an odd maximum period")
        p = infer_min_odd_period(seq, lo, hi, p_max, ctx)
        outputs["min_odd_period"] = p
        ok = ok and p is not None
    report.outputs = outputs
    report.exit_code = EXIT_OK if ok else EXIT_FALSE
    lines = [f"{c['kind']}(p={c['p']}) on [{c['window'][0]}, {c['window'][1]}]: "
             f"{'holds' if c['holds'] else 'fails'}"
             + (f" ({c['violation_count']} violations, first at {c['violations'][0]})" if not c["holds"] else "")
             for c in outputs["checks"]]
    if "min_odd_period" in outputs:
        lines.append(f"smallest odd Z period on [{lo}, {hi}]: {outputs['min_odd_period']}")
    return lines


def cmd_sum(args, inp, ctx, report):
    if not args.assume_limit_zero:
        raise UsageError("sum requires --assume-limit-zero: lim a_n = 0 cannot be checked numerically")
    report.warnings.append(LIMIT_ZERO_WARNING)
    omega = _resolve_omega(args, inp, ctx, report)
    report.inputs.update(omega=omega, tolerance=args.tol, method=args.method)
    if args.method in ("stated", "z_stated"):
        report.warnings.append(STATED_NOTE)
    res = sum_to_tolerance(
        inp.seq,
        omega,
        args.tol,
        args.method,
        ctx,
        True,
        n0=args.n0 if args.n0 is not None else inp.n0,
        max_index=args.max_index,
        window=args.window,
    )
    report.outputs = {
        "sum": _nstr(ctx, res.sum, args.digits),
        "m": res.m,
        "bound": res.bound.to_dict(ctx),
        "certified": res.certified,
        "terms_evaluated": res.terms_evaluated,
        "method": res.method,
    }
    report.exit_code = EXIT_OK if res.certified else EXIT_UNCERTIFIED
    status = "certified" if res.certified else "NOT certified"
    return [
        f"S ~ {_nstr(ctx, res.sum, args.digits)}",
        f"stopped at m = {res.m} ({status}; {res.method} bound {_nstr(ctx, res.bound.value, 6)} "
        f"vs tolerance {args.tol})",
    ]


def cmd_bounds(args, inp, ctx, report):
    omega = _resolve_omega(args, inp, ctx, report)
    report.inputs.update(omega=omega, method=args.method)
    report.warnings.append(STATED_NOTE)
    ms = _parse_range(args.m)
    seq = inp.seq
    if ms[0] < seq.start - 1:
        raise UsageError(f"m must be >= {seq.start - 1}")
    remainders, ref = {}, None
    if args.oracle != "none":
        kwargs = {"mode": "far_summation"} if args.oracle == "far" else {}
        try:
            if args.oracle == "auto" and corpus.closed_sum_for(seq) is None:
                raise OracleError("no closed form registered; use --oracle far")
            ref = reference_sum(seq, omega, args.oracle_tol, ctx, n0=inp.n0, **kwargs)
            remainders = reference_remainders(seq, ms, omega, args.oracle_tol, ctx, n0=inp.n0, **kwargs)
        except (OracleError, PreconditionError) as exc:
            report.warnings.append(f"oracle unavailable: {exc}")
    wanted = None
    if args.method:
        wanted = {args.method, f"{args.method}_upper", f"{args.method}_lower"}
    rows, lines, unsound = [], [], 0
    for m in ms:
        table = all_bounds(seq, m, omega, ctx, window=args.window)
        r = remainders.get(m)
        err = ref.error if ref is not None else 0
        row = {"m": m, "oracle_remainder": _nstr(ctx, r), "bounds": {}}
        parts = [f"m={m}"]
        if r is not None:
            parts.append(f"|R|={_nstr(ctx, abs(r), 8)}")
        for name, b in table.items():
            if wanted and name not in wanted:
                continue
            sound = None
            if r is not None and b.valid:
                sound = bool(abs(r) <= b.value + err) if b.is_upper else bool(abs(r) + err >= b.value)
                if name == "enclosure":
                    sound = bool(b.lo - err <= r <= b.hi + err)
                unsound += not sound
            cell = {"value": _nstr(ctx, b.value), "valid": b.valid, "sound": sound}
            if b.lo is not None:
                cell.update(lo=_nstr(ctx, b.lo), hi=_nstr(ctx, b.hi))
            row["bounds"][name] = cell
            flag = "" if b.valid else "(invalid)"
            flag += "" if sound in (None, True) else "(UNSOUND)"
            parts.append(f"{name}={_nstr(ctx, b.value, 8)}{flag}")
        rows.append(row)
        lines.append("  ".join(parts))
    report.outputs = {"omega": omega, "rows": rows, "unsound_cells": unsound}
    report.exit_code = EXIT_FALSE if unsound else EXIT_OK
    return lines


def _function_for(pair_dict, inp):
    if "function" in pair_dict:
        return pair_dict["function"]
    mag = inp.seq.magnitude
    if not isinstance(mag, Expression):
        raise UsageError("envelope has no 'function' and the magnitude is not a single expression")
    return to_text(substitute(mag, Var("x")))


def cmd_zv(args, inp, ctx, report):
    envs = inp.envelopes
    if not envs:
        raise UsageError(f"{inp.name} defines no envelopes")
    if args.pair is not None:
        if not 0 <= args.pair < len(envs):
            raise UsageError(f"--pair must be in [0, {len(envs) - 1}]")
        envs = [envs[args.pair]]
    results, lines, ok = [], [], True
    for d in envs:
        pair = EnvelopePair.from_dict(d)
        start = args.grid_start if args.grid_start is not None else d["from"]
        end = args.grid_end if args.grid_end is not None else start + 1000
        grid = Grid(start, end, args.grid_step)
        f = _function_for(d, inp)
        rep = verify_envelope(pair, f, grid, ctx)
        out = {"envelope": pair.to_dict(), "function": f, "verification": rep.to_dict(ctx)}
        label = f"{to_text(pair.lower)} <= {f} <= {to_text(pair.upper)} ({pair.direction})"
        if not rep.holds or not rep.monotone:
            ok = False
            lines.append(f"{label}: envelope check failed")
        else:
            try:
                cert = bound_parameter(pair, grid, ctx, t_max=args.t_max, tol=args.t_tol)
            except NoCertificateError as exc:
                ok = False
                out["error"] = str(exc)
                lines.append(f"{label}: {exc}")
            else:
                out["certificate"] = cert.to_dict(ctx)
                lines.append(
                    f"{label}: Par_Zv <= T = {_nstr(ctx, cert.T, 10)}, window {cert.window} "
                    f"(grid-empirical, margin {_nstr(ctx, cert.margin, 6)})"
                )
        results.append(out)
    report.outputs = {"pairs": results}
    report.warnings.append("envelope certificates are checked on a finite grid only")
    report.exit_code = EXIT_OK if ok else EXIT_FALSE
    return lines


def cmd_corpus(args, report):
    if args.action == "list":
        report.outputs = {"ids": corpus.list_ids()}
        return [f"{i}: {corpus.get(i).notes}" for i in corpus.list_ids()]
    try:
        entry = corpus.get(args.id)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    data = entry.to_dict()
    text = json.dumps(data, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    report.outputs = {"definition": data}
    return [] if not args.output else [f"wrote {args.output}"]


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", metavar="ID", help="built-in series id")
    src.add_argument("--series", metavar="FILE", help="series-definition JSON file")
    common.add_argument("--precision", type=int, metavar="BITS",
                        help="working precision (default $ZSERIES_PRECISION_BITS or 256)")
    common.add_argument("--json", action="store_true", help="print a JSON run report")
    common.add_argument("--window", type=int, default=DEFAULT_WINDOW,
                        help="indices scanned when checking bound hypotheses")

    parser = argparse.ArgumentParser(prog="zseries", description="Remainder bounds for Z-monotone alternating series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check monotonicity-type properties on a window")
    p.add_argument("--p", type=int, help="check Z(P)-monotone decrease")
    p.add_argument("--from", dest="from_", type=int, help="first index (default: series start)")
    p.add_argument("--to", type=int, help="last index (default: first + 1000)")
    p.add_argument("--infer", type=int, metavar="P_MAX", help="find the smallest odd Z period <= P_MAX")
    p.add_argument("--convexity", type=int, nargs="?", const=1, metavar="STEP", help="check convexity")
    p.add_argument("--slow-decay", type=int, metavar="P", help="check a_k <= 2 a_{k+P}")
    p.add_argument("--sign-pattern", type=int, metavar="OMEGA", help="check sign(a_k) = -sign(a_{k+OMEGA})")

    p = sub.add_parser("sum", parents=[common], help="sum until a bound certifies the tolerance")
    p.add_argument("--tol", required=True, help="target bound on |R_m|")
    p.add_argument("--method", default="z_simple", choices=SUM_METHODS)
    p.add_argument("--omega", type=int, help="window parameter (default: corpus value or inferred)")
    p.add_argument("--n0", type=int, help="index from which the hypotheses hold")
    p.add_argument("--max-index", type=int, default=DEFAULT_MAX_INDEX)
    p.add_argument("--digits", type=int, default=30, help="digits printed for the sum")
    p.add_argument("--assume-limit-zero", action="store_true", help="assert that the terms tend to zero")

    p = sub.add_parser("bounds", parents=[common], help="tabulate remainder bounds against the oracle")
    p.add_argument("--m", required=True, help="cut index M or range LO..HI")
    p.add_argument("--omega", type=int)
    p.add_argument("--method", help="only show this bound family (e.g. half, z_proof, delta)")
    p.add_argument("--oracle", choices=("auto", "far", "none"), default="auto",
                   help="auto: closed form when registered; far: certified far summation")
    p.add_argument("--oracle-tol", default="1e-30")

    p = sub.add_parser("zv", parents=[common], help="certify Par_Zv from envelope pairs")
    p.add_argument("--pair", type=int, help="use only the envelope pair with this index")
    p.add_argument("--grid-start", type=float)
    p.add_argument("--grid-end", type=float)
    p.add_argument("--grid-step", default="0.25")
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--t-tol", default="1e-6")

    p = sub.add_parser("corpus", help="list or export built-in series")
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("id", nargs="?")
    p.add_argument("-o", "--output", help="write the definition to this file")
    p.add_argument("--json", action="store_true")
    return parser


def run(argv=None) -> tuple[RunReport, list[str]]:
    """Execute a command; return the report and the human-readable lines."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    report = RunReport(argv, {"series": "", "precision": 256})
    try:
        if args.command == "corpus":
            if args.action == "export" and not args.id:
                raise UsageError("corpus export needs an id")
            report.inputs["series"] = args.id or ""
            return report, cmd_corpus(args, report)
        ctx = _ctx(args)
        report.inputs.update(series=args.corpus or args.series, precision=ctx.bits)
        inp = _load(args)
        report.inputs["series"] = inp.name
        handler = {"check": cmd_check, "sum": cmd_sum, "bounds": cmd_bounds, "zv": cmd_zv}[args.command]
        lines = handler(args, inp, ctx, report)
    except UsageError as exc:
        report.exit_code = EXIT_INPUT
        report.outputs = {"error": str(exc)}
        lines = [f"error: {exc}"]
    except PreconditionError as exc:
        report.exit_code = EXIT_FALSE
        report.outputs = {"error": str(exc)}
        if exc.report is not None:
            report.outputs["failed_check"] = exc.report.to_dict(_ctx(args))
        lines = [f"precondition failed: {exc}"]
    except SeriesError as exc:
        report.exit_code = EXIT_INPUT
        report.outputs = {"error": str(exc)}
        lines = [f"error: {exc}"]
    except ValueError as exc:
        report.exit_code = EXIT_INPUT
        report.outputs = {"error": str(exc)}
        lines = [f"error: {exc}"]
    return report, lines


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    report, lines = run(argv)
    if "--json" in argv:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        stream = sys.stdout if report.exit_code in (EXIT_OK, EXIT_FALSE, EXIT_UNCERTIFIED) else sys.stderr
        for line in lines:
            print(line, file=stream)
        if report.exit_code == EXIT_OK and not lines and "definition" in report.outputs:
            print(json.dumps(report.outputs["definition"], indent=2))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
