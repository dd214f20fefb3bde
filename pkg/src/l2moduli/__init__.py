"""Numerical geometry of the L2 metric on moduli spaces of harmonic maps S2 -> S2 and RP2 -> RP2."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccuracyError,
    ChartBoundaryError,
    DegeneracyError,
    DivergenceError,
    EscapeError,
    InvalidInputError,
    L2ModuliError,
    NoFixedPointsError,
    ProfileError,
)
from .profiles import CoefficientProfile, FubiniStudyProfile, L2Profile, get_profile  # noqa: E402
from .rational_maps import MoebiusPolar, RationalMap, polar_decompose  # noqa: E402

__all__ = [
    "__version__",
    "AccuracyError",
    "ChartBoundaryError",
    "CoefficientProfile",
    "DegeneracyError",
    "DivergenceError",
    "EscapeError",
    "FubiniStudyProfile",
    "InvalidInputError",
    "L2ModuliError",
    "L2Profile",
    "MoebiusPolar",
    "NoFixedPointsError",
    "ProfileError",
    "RationalMap",
    "get_profile",
    "polar_decompose",
]
