"""Curvature of G-invariant Kaehler metrics on M_1 as functions of lambda.

All quantities are evaluated from Taylor jets of A and B in ``s = log mu``.  In
that variable the curvature functions take forms free of the large-lambda
cancellations present in their rational expressions in A, A', A'':

    Hol(e_3) = -(log B)_ss / (2B)
    Hol(e_1) = (1 + cosh(s) r - 2 r^2) / (2 B sinh(s)^2),   r = 4B/A
    Abar     = -2 D / sinh(s),   Bbar = -D_s / 2,           D = (log B A^2)_s
    kappa    = 4 Abar / A + 2 Bbar / B

The rational expressions themselves are provided (``*_rational``) and agree
with these to rounding error wherever both are well conditioned.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import InvalidInputError
from .jets import Jet
from .profiles import CoefficientProfile, get_profile, s_of_lambda

SMALL_S = 1e-3
_ORDER = 4


def _grid(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise InvalidInputError("lambda must be finite and non-negative")
    return lam


def _s_jets(profile: CoefficientProfile, s0, order: int = _ORDER):
    s = Jet.variable(np.asarray(s0, dtype=float), order)
    return s, profile.a_jet(s), profile.b_jet(s)


def _out(values, lam):
    return float(values) if np.ndim(lam) == 0 else values


def hol_e3(profile, lam):
    """Holomorphic sectional curvature of e_3 = d/dlam_3 / |d/dlam_3|."""
    profile = get_profile(profile)
    lam = _grid(lam)
    _, _, B = _s_jets(profile, s_of_lambda(lam))
    return _out(-jets.log(B).derivative(2) / (2 * B.value), lam)


def _hol_e1_parts(profile, s0, order):
    s, A, B = _s_jets(profile, s0, order)
    r = 4 * B / A
    num = 1 + jets.cosh(s) * r - 2 * r * r
    sh = jets.sinh(s)
    den = 2 * B * sh * sh
    return num, den


def hol_e1(profile, lam):
    """Holomorphic sectional curvature of e_1 = d/dlam_1 / |d/dlam_1|.

    Numerator and denominator both vanish to second order at lambda = 0; for
    s < ``SMALL_S`` their Taylor series about s = 0 are divided instead.
    """
    profile = get_profile(profile)
    lam = _grid(lam)
    s0 = np.atleast_1d(s_of_lambda(lam))
    out = np.empty_like(s0)
    small = s0 < SMALL_S
    if np.any(~small):
        num, den = _hol_e1_parts(profile, s0[~small], 0)
        out[~small] = num.value / den.value
    if np.any(small):
        num, den = _hol_e1_parts(profile, np.zeros(1), 6)
        x = s0[small]
        top = num.c[2, 0] + num.c[3, 0] * x + num.c[4, 0] * x * x
        bot = den.c[2, 0] + den.c[3, 0] * x + den.c[4, 0] * x * x
        out[small] = top / bot
    return _out(out.reshape(np.shape(lam)), lam)


def _ricci_jets(profile, s0):
    s, A, B = _s_jets(profile, s0, _ORDER)
    D = (jets.log(B) + 2 * jets.log(A)).differentiate()
    return s, A, B, D


def ricci_generators(profile, lam):
    """(Abar, Bbar): the Ricci tensor's generator and its theta_3 component.

    Abar' enters Bbar; here it is exact (Taylor jets), not a finite difference.
    """
    profile = get_profile(profile)
    lam = _grid(lam)
    s0 = s_of_lambda(lam)
    _, _, _, D = _ricci_jets(profile, s0)
    with np.errstate(invalid="ignore", divide="ignore"):
        abar = np.where(s0 == 0, -2 * D.c[1], -2 * D.c[0] / np.sinh(s0))
    bbar = -D.c[1] / 2
    return _out(abar, lam), _out(bbar, lam)


def abar_derivative(profile, lam):
    """dAbar/dlambda (exact), needed by the frame form of kappa."""
    profile = get_profile(profile)
    lam = _grid(lam)
    s0 = s_of_lambda(lam)
    s, _, _, D = _ricci_jets(profile, s0)
    with np.errstate(invalid="ignore", divide="ignore"):
        abar_s = (-2 * D / jets.sinh(s.truncate(D.order))).derivative(1)
    abar_s = np.where(s0 == 0, 0.0, abar_s)
    return _out(abar_s * 2 / np.sqrt(1 + lam * lam), lam)


def scalar_curvature(profile, lam):
    """kappa = 4 Abar/A + 2 Bbar/B."""
    profile = get_profile(profile)
    lam = _grid(lam)
    s0 = s_of_lambda(lam)
    abar, bbar = ricci_generators(profile, lam)
    _, A, B = _s_jets(profile, s0, 0)
    return _out(4 * abar / A.value + 2 * bbar / B.value, lam)


def scalar_curvature_frame(profile, lam):
    """kappa = 2 [2 Abar_1/A_1 + (Abar_1 + l^2 Abar_2)/(A_1 + l^2 A_2)] (unitary-frame trace)."""
    profile = get_profile(profile)
    lam = _grid(lam)
    L2 = 1 + lam * lam
    a, a1 = profile.derivatives(lam, 1)
    abar, _ = ricci_generators(profile, lam)
    abar1 = abar_derivative(profile, lam)
    radial = a + lam * lam * a / L2 + lam * a1
    radial_bar = abar + lam * lam * abar / L2 + lam * abar1
    return _out(2 * (2 * abar / a + radial_bar / radial), lam)


# -- the rational expressions in A, A', A'' -----------------------------------
def hol_e3_rational(profile, lam):
    profile = get_profile(profile)
    lam = _grid(lam)
    b, b1, b2 = profile.derivatives(lam, 2, "B")
    L2 = 1 + lam * lam
    return _out(L2 / (8 * b * b) * ((b1 / b - lam / L2) * b1 - b2), lam)


def hol_e1_rational(profile, lam):
    profile = get_profile(profile)
    lam = _grid(lam)
    a, a1, _ = profile.derivatives(lam, 2)
    L2 = 1 + lam * lam
    first = (lam * a + 0.5 * L2 * a1) / ((L2 + lam * lam) * a + lam * L2 * a1)
    brace = first * (lam * a / L2 + a1) - (2 + lam * lam) / L2 * a - (3 + 2 * lam * lam) / (2 * lam) * a1
    return _out(brace / (a * a * L2), lam)


def abar_rational(profile, lam):
    profile = get_profile(profile)
    lam = _grid(lam)
    a, a1, a2 = profile.derivatives(lam, 2)
    l2 = lam * lam
    num = 2 * lam * (1 + l2) * a1**2 + (9 * l2 + 4) * a * a1 + lam * (1 + l2) * a * a2 + 4 * a * a * lam
    den = 2 * lam * a * (a + 2 * l2 * a + lam * a1 + lam**3 * a1)
    return _out(-num / den, lam)


def bbar_finite_difference(profile, lam, step: float = 1e-3):
    """Bbar from Abar with a Richardson-extrapolated central difference for Abar'."""
    profile = get_profile(profile)
    lam = _grid(lam)

    def central(h):
        up, _ = ricci_generators(profile, lam + h)
        dn, _ = ricci_generators(profile, lam - h)
        return (np.asarray(up) - np.asarray(dn)) / (2 * h)

    d = (4 * central(step / 2) - central(step)) / 3
    abar, _ = ricci_generators(profile, lam)
    return _out((1 + 2 * lam * lam) * np.asarray(abar) / 4 + (lam + lam**3) * d / 4, lam)


# -- scans and reports -----------------------------------------------------------
@dataclass(frozen=True)
class PositivityScan:
    """Pointwise sign check of Abar, Bbar and kappa.

    Positive values on a grid support, but do not prove, the conjectured
    positivity of the Ricci tensor of the L^2 metric.
    """

    points: int
    abar_min: float
    bbar_min: float
    kappa_min: float
    failures: tuple
    label: str = "numerical support for a conjecture, not a proof"

    @property
    def ricci_positive(self) -> bool:
        return self.abar_min > 0 and self.bbar_min > 0

    @property
    def passed(self) -> bool:
        return self.ricci_positive and self.kappa_min > 0


def positivity_scan(profile, lams) -> PositivityScan:
    profile = get_profile(profile)
    lams = _grid(np.atleast_1d(lams))
    if lams.size == 0:
        raise InvalidInputError("empty lambda grid")
    abar, bbar = ricci_generators(profile, lams)
    kappa = scalar_curvature(profile, lams)
    bad = (abar <= 0) | (bbar <= 0) | (kappa <= 0) | ~np.isfinite(kappa)
    return PositivityScan(
        int(lams.size),
        float(np.min(abar)),
        float(np.min(bbar)),
        float(np.min(kappa)),
        tuple(float(x) for x in lams[bad][:10]),
    )


REPORT_COLUMNS = ("lambda", "A", "B", "Hol_e1", "Hol_e3", "Abar", "Bbar", "kappa")
DIAGNOSTIC_COLUMNS = ("lam2_Abar", "log2_Bbar", "log3_kappa_over_lam4", "log3_Hol_e3_over_lam4")


@dataclass(frozen=True)
class CurvatureReport:
    profile: str
    lam: np.ndarray
    columns: dict
    metadata: dict = field(default_factory=dict)

    @classmethod
    def compute(cls, profile, lams) -> "CurvatureReport":
        profile = get_profile(profile)
        lam = _grid(np.atleast_1d(lams))
        if lam.size == 0:
            raise InvalidInputError("empty lambda grid")
        abar, bbar = ricci_generators(profile, lam)
        cols = {
            "lambda": lam,
            "A": profile.A(lam),
            "B": profile.B(lam),
            "Hol_e1": hol_e1(profile, lam),
            "Hol_e3": hol_e3(profile, lam),
            "Abar": abar,
            "Bbar": bbar,
            "kappa": scalar_curvature(profile, lam),
        }
        with np.errstate(divide="ignore", invalid="ignore"):
            log = np.log(lam)
            cols["lam2_Abar"] = lam**2 * abar
            cols["log2_Bbar"] = log**2 * bbar
            cols["log3_kappa_over_lam4"] = log**3 * cols["kappa"] / lam**4
            cols["log3_Hol_e3_over_lam4"] = log**3 * cols["Hol_e3"] / lam**4
        meta = {"profile": profile.name, "abar_derivative": "exact (Taylor jets in log mu)"}
        return cls(profile.name, lam, cols, meta)

    @property
    def finite(self) -> bool:
        return all(np.all(np.isfinite(self.columns[c])) for c in REPORT_COLUMNS)

    def to_csv(self, header_lines=(), diagnostics: bool = False) -> str:
        names = list(REPORT_COLUMNS) + (list(DIAGNOSTIC_COLUMNS) if diagnostics else [])
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}: {value}\n")
        for line in header_lines:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for i in range(self.lam.size):
            writer.writerow([repr(float(self.columns[n][i])) for n in names])
        return buf.getvalue()
