"""Generator functions A(lambda) for G-invariant Kaehler metrics on M_1.

Every profile is evaluated internally in the variable ``s = log mu = 2 asinh(lambda)``,
so that ``lambda = sinh(s/2)``, ``Lambda = cosh(s/2)``, ``1 + 2 lambda^2 = cosh s`` and
``2 lambda Lambda = sinh s``.  In this variable the companion function

    B = (1 + 2 lambda^2) A / 4 + (lambda + lambda^3) A' / 4 = (1/4) d/ds (sinh(s) A)

is a plain derivative, which avoids the cancellation between its two terms at
large lambda.  Profiles return truncated Taylor jets in ``s`` (see :mod:`jets`);
derivatives with respect to lambda come from composing with ``s(lambda)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly

from . import jets
from .errors import InvalidInputError, ProfileError
from .jets import Jet

SERIES_SWITCH = 1.0
_SERIES_TERMS = 14


def mu_of_lambda(lam):
    """mu = (sqrt(1 + lambda^2) + lambda)^2, the dilation factor of W_lambda."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise InvalidInputError("lambda must be non-negative")
    out = (np.sqrt(1 + lam * lam) + lam) ** 2
    return float(out) if out.ndim == 0 else out


def lambda_of_mu(mu):
    mu = np.asarray(mu, dtype=float)
    return (mu - 1) / (2 * np.sqrt(mu))


def s_of_lambda(lam):
    return 2 * np.arcsinh(np.asarray(lam, dtype=float))


def _series(coeff: Callable[[int], float], start: int = 0):
    return [coeff(k) for k in range(start, start + _SERIES_TERMS)]


# power series in u = s^2 of the entire functions used by the L^2 profile
_SINHC = _series(lambda k: 1 / math.factorial(2 * k + 1))  # sinh(s)/s
_A_NUM = _series(lambda k: 2 ** (2 * k + 3) / math.factorial(2 * k + 3))  # (sinh 2s - 2s)/s^3
_B_NUM = _series(lambda k: (2 * k + 2) / math.factorial(2 * k + 3))  # (s cosh s - sinh s)/s^3


def _branches(s: Jet, near, far) -> Jet:
    """Series branch for |s| < SERIES_SWITCH, closed form elsewhere (each only if needed)."""
    mask = np.abs(s.value) < SERIES_SWITCH
    with np.errstate(all="ignore"):
        if np.all(mask):
            return near(s)
        if not np.any(mask):
            return far(s)
        return Jet(np.where(mask, near(s).c, far(s).c))


def _l2_A_near(s):
    return np.pi * jets.polyval_even(_A_NUM, s) / jets.polyval_even(_SINHC, s) ** 3


def _l2_A_far(s):
    e = jets.exp(-2 * s)
    return 4 * np.pi * jets.exp(-s) * (1 - 4 * s * e - e * e) / (1 - e) ** 3


def _l2_B_near(s):
    return np.pi * jets.polyval_even(_B_NUM, s) / jets.polyval_even(_SINHC, s) ** 3


def _l2_B_far(s):
    e = jets.exp(-2 * s)
    return 4 * np.pi * e * ((1 + e) * s - 1 + e) / (1 - e) ** 3


def l2_A_jet(s: Jet) -> Jet:
    """A(s) = pi (sinh 2s - 2s) / sinh^3 s, with a positive-term series for s < 1."""
    return _branches(s, _l2_A_near, _l2_A_far)


def l2_B_jet(s: Jet) -> Jet:
    """B(s) = pi (s cosh s - sinh s) / sinh^3 s, with the same series branch."""
    return _branches(s, _l2_B_near, _l2_B_far)


class CoefficientProfile:
    """Base class.  Subclasses implement :meth:`a_jet` (a jet in ``s``)."""

    name = "profile"
    provenance = "user"

    def a_jet(self, s: Jet) -> Jet:
        raise NotImplementedError

    def b_jet(self, s: Jet) -> Jet:
        """B as a jet in s.  Generic route: (1/4) d/ds (sinh(s) A)."""
        base = np.asarray(s.value)
        k = s.order
        t = Jet.variable(base, k + 1)
        b = (jets.sinh(t) * self.a_jet(t)).differentiate() / 4
        return jets.compose(b.derivatives(), s)

    # -- convenience evaluations in lambda ---------------------------------
    def taylor_s(self, lam, order: int, which: str = "A") -> Jet:
        s = Jet.variable(s_of_lambda(lam), order)
        return self.a_jet(s) if which == "A" else self.b_jet(s)

    def lambda_jet(self, lam, order: int, which: str = "A") -> Jet:
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0):
            raise InvalidInputError("lambda must be non-negative")
        s = 2 * jets.asinh(Jet.variable(lam, order))
        return self.a_jet(s) if which == "A" else self.b_jet(s)

    def A(self, lam):
        return self.lambda_jet(lam, 0).value

    def dA(self, lam):
        return self.lambda_jet(lam, 1).derivative(1)

    def d2A(self, lam):
        return self.lambda_jet(lam, 2).derivative(2)

    def B(self, lam):
        return self.lambda_jet(lam, 0, "B").value

    def derivatives(self, lam, order: int = 2, which: str = "A") -> list:
        """[F, F', F'', ...] with respect to lambda for F = A or B."""
        return self.lambda_jet(lam, order, which).derivatives()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


class L2Profile(CoefficientProfile):
    """The L^2 metric: A = 4 pi mu (mu^4 - 4 mu^2 log mu - 1) / (mu^2 - 1)^3."""

    name = "l2"
    provenance = "L2"

    def a_jet(self, s: Jet) -> Jet:
        return l2_A_jet(s)

    def b_jet(self, s: Jet) -> Jet:
        return l2_B_jet(s)


class FubiniStudyProfile(CoefficientProfile):
    """A_FS = 2 mu / (1 + mu^2) = 1 / cosh(s)."""

    name = "fs"
    provenance = "Fubini-Study"

    def a_jet(self, s: Jet) -> Jet:
        return 1.0 / jets.cosh(s)

    def b_jet(self, s: Jet) -> Jet:
        c = jets.cosh(s)
        return 0.25 / (c * c)


class LambdaProfile(CoefficientProfile):
    """Profile specified through lambda-derivatives of A (subclasses give ``lambda_derivs``)."""

    def lambda_derivs(self, lam: np.ndarray, order: int) -> list:
        raise NotImplementedError

    def a_jet(self, s: Jet) -> Jet:
        lam = jets.sinh(s / 2.0)
        return jets.compose(self.lambda_derivs(lam.value, s.order), lam)


class FunctionProfile(LambdaProfile):
    """A given as a function acting on lambda jets, e.g. ``lambda x: 1 / (1 + x * x)``."""

    provenance = "user"

    def __init__(self, func: Callable[[Jet], Jet], name: str = "function"):
        self.func = func
        self.name = name

    def lambda_derivs(self, lam, order):
        return self.func(Jet.variable(lam, order)).derivatives()


class ScaledProfile(CoefficientProfile):
    """c * A for a base profile (used for the scaling laws of global integrals)."""

    def __init__(self, base: CoefficientProfile, factor: float):
        if factor <= 0:
            raise InvalidInputError("scale factor must be positive")
        self.base = base
        self.factor = float(factor)
        self.name = f"{factor:g}*{base.name}"
        self.provenance = base.provenance

    def a_jet(self, s):
        return self.base.a_jet(s) * self.factor

    def b_jet(self, s):
        return self.base.b_jet(s) * self.factor


class TabulatedProfile(LambdaProfile):
    """Piecewise quintic Hermite interpolant of tabulated (lambda, A, A', A'')."""

    provenance = "tabulated"

    def __init__(self, lam, A, dA, d2A, name: str = "tabulated"):
        lam = np.asarray(lam, dtype=float)
        if lam.ndim != 1 or lam.size < 2 or np.any(np.diff(lam) <= 0):
            raise InvalidInputError("tabulated lambda values must be strictly increasing")
        if lam[0] != 0.0:
            raise InvalidInputError("tabulated profiles must start at lambda = 0")
        if abs(dA[0]) > 1e-12 * max(1.0, abs(A[0])):
            raise ProfileError("A'(0) must vanish for a smooth metric at the identity")
        if np.any(np.asarray(A) <= 0):
            raise ProfileError("A must be positive")
        data = np.column_stack([A, dA, d2A])
        self.poly = BPoly.from_derivatives(lam, data)
        self.lam_max = float(lam[-1])
        self.name = name

    @classmethod
    def from_csv(cls, path, name: str | None = None) -> "TabulatedProfile":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append([float(x) for x in row[:4]])
                except ValueError:
                    continue  # header row
        if not rows:
            raise InvalidInputError(f"no numeric rows in {path}")
        data = np.array(rows)
        if data.shape[1] != 4:
            raise InvalidInputError("profile CSV needs columns lambda, A, dA, d2A")
        return cls(*data.T, name=name or str(path))

    def lambda_derivs(self, lam, order):
        lam = np.asarray(lam, dtype=float)
        if np.any(lam > self.lam_max * (1 + 1e-12)):
            raise InvalidInputError(f"lambda beyond the tabulated range [0, {self.lam_max}]")
        return [self.poly(lam, nu=k) for k in range(order + 1)]


PROFILES = {"l2": L2Profile, "fs": FubiniStudyProfile}


def get_profile(spec) -> CoefficientProfile:
    """Profile by name ("l2", "fs"), by CSV path, or pass an existing profile through."""
    if isinstance(spec, CoefficientProfile):
        return spec
    if spec in PROFILES:
        return PROFILES[spec]()
    if isinstance(spec, str) and spec.endswith(".csv"):
        return TabulatedProfile.from_csv(spec)
    raise InvalidInputError(f"unknown profile {spec!r}; expected one of {sorted(PROFILES)} or a CSV file")


def A_l2(lam):
    return L2Profile().A(lam)


def B_l2(lam):
    return L2Profile().B(lam)


def A_fs(lam):
    return FubiniStudyProfile().A(lam)


@dataclass(frozen=True)
class Coefficients:
    lam: float
    A1: float
    A2: float
    A3: float
    A4: float
    A5: float

    def as_tuple(self):
        return (self.A1, self.A2, self.A3, self.A4, self.A5)


def coefficients_from_A(profile, lam, tol: float = 1e-10) -> Coefficients:
    """A1..A5 in terms of A; the lambda = 0 quotients use their limits."""
    profile = get_profile(profile)
    lam = float(lam)
    a, a1, a2 = (float(x) for x in profile.derivatives(lam, 2))
    if lam == 0.0:
        if abs(a1) > tol * max(1.0, abs(a)):
            raise ProfileError(f"A'(0) = {a1} != 0: A_2 and A_4 are singular at the identity")
        A2 = a + a2
        A4 = a2 / 4
    else:
        A2 = a / (1 + lam * lam) + a1 / lam
        A4 = (1 + lam * lam) * a1 / (4 * lam)
    return Coefficients(lam, a, A2, (1 + 2 * lam * lam) * a / 4, A4, a)


def B_from_A(profile, lam):
    """B via the two-term formula in A and A' (for comparison with closed forms)."""
    profile = get_profile(profile)
    a, a1 = profile.derivatives(lam, 1)
    lam = np.asarray(lam, dtype=float)
    return (1 + 2 * lam * lam) * a / 4 + (lam + lam**3) * a1 / 4
