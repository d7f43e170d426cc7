"""Exact and numeric engine for Weil-Petersson volumes, intersection numbers,
large-genus expansion diagnostics and trace-formula coefficients."""

from .errors import CacheError, DomainError, NumericsError, PrecisionExhausted
from .exact import (
    Interval,
    PiPoly,
    a_coeff,
    bernoulli,
    compare,
    eval_interval,
    pi_bounds,
    zeta_even,
)
from .intersection import TauIndex, base_table, intersection_number
from .store import MemoStore
from .volumes import VolumePolynomial, closed_volume, volume_at, volume_polynomial

__version__ = "0.1.0"

__all__ = [
    "CacheError",
    "DomainError",
    "NumericsError",
    "PrecisionExhausted",
    "Interval",
    "PiPoly",
    "a_coeff",
    "bernoulli",
    "compare",
    "eval_interval",
    "pi_bounds",
    "zeta_even",
    "TauIndex",
    "base_table",
    "intersection_number",
    "MemoStore",
    "VolumePolynomial",
    "closed_volume",
    "volume_at",
    "volume_polynomial",
    "__version__",
]
