"""Registry of worked series and generators of random Z(p)-monotone series."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .envelope import EnvelopePair
from .monotonicity import check_convexity, check_z_monotone, infer_min_odd_period
from .series import ALTERNATING_MINUS, ALTERNATING_PLUS, TermSequence, series_to_dict


@dataclass(frozen=True)
class Expectation:
    """A check with a known verdict.

    ``kind`` is ``z_monotone``, ``convexity`` or ``min_odd_period``; for the
    last one ``verdict`` is the expected period rather than a boolean.
    """

    kind: str
    p: int
    lo: int
    hi: int
    verdict: object

    @property
    def name(self) -> str:
        return f"{self.kind}(p={self.p})[{self.lo},{self.hi}]"

    def run(self, seq, ctx):
        if self.kind == "z_monotone":
            return check_z_monotone(seq, self.p, self.lo, self.hi, ctx).holds
        if self.kind == "convexity":
            return check_convexity(seq, self.lo, self.hi, ctx, step=self.p).holds
        if self.kind == "min_odd_period":
            return infer_min_odd_period(seq, self.lo, self.hi, self.p, ctx)
        raise ValueError(f"unknown check {self.kind!r}")


@dataclass(frozen=True)
class CorpusEntry:
    """A series with everything known about it.

    ``omega`` is the window parameter of the Z(2*omega-1) bounds (``None``
    when no odd period applies); ``period`` is the smallest Z period.
    ``closed_sum`` and ``remainder_formula`` take an mpmath context
    (and an index for the latter). ``windows`` maps an envelope-derived
    parameter label to its odd window.
    """

    id: str
    sequence: TermSequence
    omega: int | None
    period: int
    closed_sum: object = None
    remainder_formula: object = None
    expected: tuple[Expectation, ...] = ()
    notes: str = ""
    n0: int | None = None
    windows: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))
    envelopes: tuple = ()
    divergence_threshold: tuple[int, int] | None = None

    @property
    def start_of_tail(self) -> int:
        """First index from which the bound hypotheses hold."""
        return self.n0 if self.n0 is not None else self.sequence.start

    @property
    def expected_map(self) -> dict:
        return {e.name: e.verdict for e in self.expected}

    def to_dict(self) -> dict:
        data = series_to_dict(self.sequence)
        if self.envelopes:
            data["envelopes"] = [dict(env) for env in self.envelopes]
        return data


# --------------------------------------------------------------------------
# the worked series


def _z3_remainder(mp, m):
    k, r = divmod(m, 6)
    A = mp.mpf(1) / (k + 1) + mp.ldexp(1, -(k + 1))
    B = mp.mpf(10) ** (-(k + 1))
    C = mp.mpf(1) / (k + 1)
    partial = 2 - mp.ldexp(1, 1 - k) + [0, A, A - B, 2 * A - B, 2 * A - B - C, 2 * A - C][r]
    return 2 - partial


def _ln2_remainder(mp, m):
    # sum_{n>m} (-1)^(n+1)/n via digamma
    tail = (mp.digamma(mp.mpf(m + 2) / 2) - mp.digamma(mp.mpf(m + 1) / 2)) / 2
    return tail if m % 2 == 0 else -tail


def _rd2_remainder(mp, m):
    if m == 0:
        return mp.one
    k = (m + 1) // 2
    if m % 2 == 0:
        return mp.ldexp(1, -k)
    return mp.ldexp(1, 1 - k) - mp.one / k


# Printed closed form of the rd2 magnitudes; equivalent to the piece rules.
RD2_CLOSED_PRINT = "1/floor((n+1)/2) - (1 + (-1)^n)/2^(n/2 + 1)"


def _two(mp):
    return mp.mpf(2)


def _one(mp):
    return mp.one


def _ln2(mp):
    return mp.ln2


_COS_ENVELOPES = (
    {"lower": "x - 2", "upper": "x + 2", "from": 1, "direction": "inc", "function": "x + 2*cos(x)"},
    {"lower": "1/(x + 2)", "upper": "1/(x - 2)", "from": 3, "direction": "dec", "function": "1/(x + 2*cos(x))"},
)


def _build():
    entries = [
        CorpusEntry(
            "div_z2",
            TermSequence.piecewise(
                [(2, 1, "(n+1)/2", "1/k^2"), (2, 0, "n/2", "1/k")], 1, ALTERNATING_MINUS, "div_z2"
            ),
            omega=None,
            period=2,
            expected=(
                Expectation("z_monotone", 2, 1, 2000, True),
                Expectation("z_monotone", 1, 1, 2000, False),
            ),
            notes="Z(2)-monotone with terms tending to zero, yet the alternating sum diverges to +inf",
            divergence_threshold=(10, 10**5),
        ),
        CorpusEntry(
            "z3_sum2",
            TermSequence.piecewise(
                [
                    (6, 1, "(n+5)/6", "1/k + 2^(-k)"),
                    (6, 2, "(n+4)/6", "10^(-k)"),
                    (6, 3, "(n+3)/6", "1/k + 2^(-k)"),
                    (6, 4, "(n+2)/6", "1/k"),
                    (6, 5, "(n+1)/6", "10^(-k)"),
                    (6, 0, "n/6", "1/k"),
                ],
                1,
                ALTERNATING_PLUS,
                "z3_sum2",
            ),
            omega=2,
            period=3,
            closed_sum=_two,
            remainder_formula=_z3_remainder,
            expected=(
                Expectation("z_monotone", 3, 1, 600, True),
                Expectation("z_monotone", 1, 1, 600, False),
                Expectation("min_odd_period", 9, 1, 600, 3),
            ),
            notes="Z(3)-monotone but not monotone; converges to 2",
        ),
        CorpusEntry(
            "ln2",
            TermSequence.from_expr("1/n", 1, ALTERNATING_PLUS, "ln2"),
            omega=1,
            period=1,
            closed_sum=_ln2,
            remainder_formula=_ln2_remainder,
            expected=(
                Expectation("z_monotone", 1, 1, 10000, True),
                Expectation("convexity", 1, 1, 10000, True),
            ),
            notes="alternating harmonic series; |R_m| ~ 1/(2m)",
        ),
        CorpusEntry(
            "rd2",
            TermSequence.piecewise(
                [(2, 1, "(n+1)/2", "1/k"), (2, 0, "n/2", "1/k - 2^(-k)")], 1, ALTERNATING_PLUS, "rd2"
            ),
            omega=1,
            period=1,
            closed_sum=_one,
            remainder_formula=_rd2_remainder,
            expected=(
                Expectation("z_monotone", 1, 1, 2000, False),
                Expectation("z_monotone", 1, 9, 2000, True),
                Expectation("convexity", 1, 9, 2000, False),
            ),
            notes="monotone from n = 9; the Leibniz bound fluctuates wildly in accuracy",
            n0=9,
        ),
        CorpusEntry(
            "cos_shift",
            TermSequence.from_expr("1/(n + 2*cos(n))", 1, ALTERNATING_PLUS, "cos_shift"),
            omega=3,
            period=5,
            expected=(
                Expectation("min_odd_period", 9, 1, 5000, 5),
                Expectation("z_monotone", 5, 1, 5000, True),
                Expectation("z_monotone", 3, 1, 5000, False),
            ),
            notes="envelopes x-2 <= x+2cos(x) <= x+2 give Par_Zv <= 4, hence Z(5)",
            windows=MappingProxyType({"4": 5, "2pi": 7}),
            envelopes=_COS_ENVELOPES,
        ),
    ]
    return MappingProxyType({e.id: e for e in entries})


_REGISTRY = _build()


def get(entry_id: str) -> CorpusEntry:
    try:
        return _REGISTRY[entry_id]
    except KeyError:
        raise KeyError(f"unknown corpus id {entry_id!r}; known: {', '.join(_REGISTRY)}") from None


def list_ids() -> list[str]:
    return list(_REGISTRY)


def closed_sum_for(seq: TermSequence):
    """Closed-form sum of a registered series equal to ``seq``, else None."""
    for entry in _REGISTRY.values():
        if entry.closed_sum is not None and entry.sequence == seq:
            return entry.closed_sum
    return None


def envelope_pairs(entry: CorpusEntry) -> list[tuple[EnvelopePair, str]]:
    """The entry's envelope pairs with the function each one sandwiches."""
    return [(EnvelopePair.from_dict(d), d["function"]) for d in entry.envelopes]


# --------------------------------------------------------------------------
# random Z(p)-monotone series

PROFILES = ("harmonic", "geometric", "mixed")
_ALPHAS = ("0.5", "0.75", "1", "1.5", "2")


@dataclass(frozen=True)
class Strand:
    """Decreasing magnitudes ``b_k = c/(k+d)^alpha + g*r^k`` (either part optional)."""

    c: str = "0"
    d: str = "0"
    alpha: str = "1"
    g: str = "0"
    r: str = "0.5"

    def expression(self) -> str:
        parts = []
        if self.c != "0":
            parts.append(f"{self.c}/(k + {self.d})^{self.alpha}")
        if self.g != "0":
            parts.append(f"{self.g}*{self.r}^k")
        return " + ".join(parts)

    def alternating_sum(self, mp):
        """``sum_{k>=1} (-1)^(k-1) b_k``."""
        total = mp.zero
        if self.c != "0":
            c, d, a = mp.mpf(self.c), mp.mpf(self.d), mp.mpf(self.alpha)
            if a == 1:
                total += c * (mp.digamma((2 + d) / 2) - mp.digamma((1 + d) / 2)) / 2
            else:
                total += c * mp.power(2, -a) * (mp.zeta(a, (1 + d) / 2) - mp.zeta(a, (2 + d) / 2))
        if self.g != "0":
            g, r = mp.mpf(self.g), mp.mpf(self.r)
            total += g * r / (1 + r)
        return total


@dataclass(frozen=True)
class InterleavedSum:
    """Closed-form sum of an alternating series whose strands have closed sums."""

    start: int
    sign: str
    strands: tuple[Strand, ...]

    def __call__(self, mp):
        total = mp.zero
        for s, strand in enumerate(self.strands):
            n = self.start + s
            first = 1 if n % 2 else -1
            if self.sign == ALTERNATING_MINUS:
                first = -first
            # the stride is odd, so signs alternate along each strand
            total += first * strand.alternating_sum(mp)
        return total


def _fmt(x, digits=3):
    return f"{x:.{digits}f}"


def _random_strand(rng, kind, scale):
    if kind == "harmonic":
        return Strand(c=_fmt(rng.uniform(0.5, 2) * scale, 5), d=_fmt(rng.uniform(0, 3)), alpha=str(rng.choice(_ALPHAS)))
    if kind == "geometric":
        return Strand(g=_fmt(rng.uniform(0.5, 2) * scale, 5), r=_fmt(rng.uniform(0.3, 0.95)))
    return Strand(
        c=_fmt(rng.uniform(0.5, 2) * scale, 5),
        d=_fmt(rng.uniform(0, 3)),
        alpha=str(rng.choice(_ALPHAS)),
        g=_fmt(rng.uniform(0.1, 1) * scale, 5),
        r=_fmt(rng.uniform(0.3, 0.95)),
    )


def make_random_z_entry(p: int, seed: int, profile: str = "mixed", *, start: int = 1, scales=None) -> CorpusEntry:
    """Random Z(p)-monotone series built from p interleaved decreasing strands.

    Strand s occupies the indices ``start + s + j*p``. With ``profile="mixed"``
    each strand independently picks a harmonic-like, geometric or combined
    decay. ``scales`` multiplies strand magnitudes, e.g. ``(1, 0.01, 1)``
    makes neighbouring terms incomparable so the series is not monotone.
    The entry carries the exact sum, computed from the strands' closed forms.
    """
    if p < 1 or p % 2 == 0:
        raise ValueError("p must be a positive odd integer")
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    scales = tuple(scales) if scales is not None else (1,) * p
    if len(scales) != p:
        raise ValueError("need one scale per strand")
    rng = np.random.default_rng(seed)
    strands = []
    for s in range(p):
        kind = profile if profile != "mixed" else str(rng.choice(["harmonic", "geometric", "both"]))
        strands.append(_random_strand(rng, kind, scales[s]))
    pieces = []
    for s, strand in enumerate(strands):
        first = start + s
        pieces.append((p, first % p, f"(n - {first})/{p} + 1", strand.expression()))
    name = f"random_p{p}_{profile}_{seed}"
    seq = TermSequence.piecewise(pieces, start, ALTERNATING_PLUS, name)
    return CorpusEntry(
        name,
        seq,
        omega=(p + 1) // 2,
        period=p,
        closed_sum=InterleavedSum(start, ALTERNATING_PLUS, tuple(strands)),
        notes=f"{profile} strands, seed {seed}",
    )


def make_random_z_series(p: int, seed: int, profile: str = "mixed", **kwargs) -> TermSequence:
    """The sequence of :func:`make_random_z_entry`."""
    return make_random_z_entry(p, seed, profile, **kwargs).sequence
