"""Exact arithmetic kernel: rationals, parameter polynomials, Laurent series."""

from fractions import Fraction

from .poly import (
    DEFAULT_PAIRS,
    ExactError,
    ExactRatio,
    ParamPoly,
    PhasePoly,
    as_fraction,
    phase_vars,
    poisson_bracket,
    poly,
)
from .quadratic import ExponentPair, QuadExpr, squarefree_split
from .series import (
    InversionError,
    LaurentPoly,
    LaurentSeries,
    TruncationError,
    wp_coefficients,
    wp_series,
)

Rational = Fraction

__all__ = [
    "DEFAULT_PAIRS",
    "ExactError",
    "ExactRatio",
    "ExponentPair",
    "Fraction",
    "InversionError",
    "LaurentPoly",
    "LaurentSeries",
    "ParamPoly",
    "PhasePoly",
    "QuadExpr",
    "Rational",
    "TruncationError",
    "as_fraction",
    "phase_vars",
    "poisson_bracket",
    "poly",
    "squarefree_split",
    "wp_coefficients",
    "wp_series",
]
