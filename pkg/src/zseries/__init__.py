"""Certified remainder bounds and summation for alternating series whose
terms decrease only along a stride (Z-monotone sequences)."""

from .bounds import (
    RemainderBound,
    all_bounds,
    delta_bounds,
    half_bounds,
    leibniz_bound,
    remainder_enclosure,
    z_bound,
    z_bound_improved,
)
from .envelope import EnvelopePair, Grid, ZvCertificate, bound_parameter, parameter_to_window, verify_envelope
from .errors import (
    DomainError,
    NegativeMagnitudeError,
    NoCertificateError,
    OracleError,
    ParseError,
    PreconditionError,
    SeriesError,
    WindowError,
)
from .expression import parse_expression
from .monotonicity import (
    check_convexity,
    check_sign_pattern,
    check_slow_decay,
    check_z_monotone,
    infer_min_odd_period,
)
from .series import PrecisionContext, TermSequence, eval_term, load_series, series_from_dict
from .summation import SummationResult, cross_check, decompose, partial_sum, sum_to_tolerance

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EnvelopePair",
    "Grid",
    "NegativeMagnitudeError",
    "NoCertificateError",
    "OracleError",
    "ParseError",
    "PrecisionContext",
    "PreconditionError",
    "RemainderBound",
    "SeriesError",
    "SummationResult",
    "TermSequence",
    "WindowError",
    "ZvCertificate",
    "all_bounds",
    "bound_parameter",
    "check_convexity",
    "check_sign_pattern",
    "check_slow_decay",
    "check_z_monotone",
    "cross_check",
    "decompose",
    "delta_bounds",
    "eval_term",
    "half_bounds",
    "infer_min_odd_period",
    "leibniz_bound",
    "load_series",
    "parameter_to_window",
    "parse_expression",
    "partial_sum",
    "remainder_enclosure",
    "series_from_dict",
    "sum_to_tolerance",
    "verify_envelope",
    "z_bound",
    "z_bound_improved",
]
