"""Exception hierarchy shared by the library and the command line."""


class L2ModuliError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InvalidInputError(L2ModuliError, ValueError):
    exit_code = 2


class DegeneracyError(L2ModuliError):
    """Map is on (or numerically too close to) the degree-drop variety."""


class NoFixedPointsError(L2ModuliError):
    """Requested an RP^2 fixed-set map of even degree."""


class AccuracyError(L2ModuliError):
    """A quadrature or finite-difference estimate failed its self-consistency check."""

    exit_code = 3


class DivergenceError(AccuracyError):
    """An improper integral does not converge."""


class ProfileError(L2ModuliError):
    """Coefficient profile violates positivity or regularity requirements."""


class ChartBoundaryError(L2ModuliError):
    """Euler-angle coordinates are too close to a gimbal singularity."""


class EscapeError(L2ModuliError):
    """A geodesic runs off to lambda -> infinity (finite length, finite time)."""

    exit_code = 3
