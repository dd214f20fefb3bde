"""Invariant Kaehler metrics on M_1 at the base points W_lambda of the curve Gamma.

Tangent vectors at W_lambda are expressed in the ordered frame

    (d/dlam_1, d/dlam_2, d/dlam_3, theta_1, theta_2, theta_3)

where theta_a are dual to the left-invariant coframe sigma_a (d sigma_1 = sigma_2 ^ sigma_3).
The metric A1 dl.dl + A2 (l.dl)^2 + A3 s.s + A4 (l.s)^2 + A5 l.(s x dl) is assembled at
l = (0, 0, lambda) as a 6x6 Gram matrix; general points are reached through the
isometric group action, never by re-deriving the coefficients off the curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ProfileError
from .profiles import (
    Coefficients,
    CoefficientProfile,
    coefficients_from_A,
    get_profile,
    mu_of_lambda,
)

FRAME_LABELS = ("dlam1", "dlam2", "dlam3", "theta1", "theta2", "theta3")

# Orientation of the A5 cross term.  With this sign the Gram matrix is Hermitian
# for the complex structure below; the opposite sign is not.
A5_ORIENTATION = 1.0


def gram_from_coefficients(lam: float, c: Coefficients | tuple) -> np.ndarray:
    A1, A2, A3, A4, A5 = c.as_tuple() if isinstance(c, Coefficients) else c
    G = np.zeros((6, 6))
    G[0, 0] = G[1, 1] = A1
    G[2, 2] = A1 + lam * lam * A2
    G[3, 3] = G[4, 4] = A3
    G[5, 5] = A3 + lam * lam * A4
    # l.(sigma x dl) = lam (sigma_1 dl_2 - sigma_2 dl_1), symmetrized
    half = A5_ORIENTATION * lam * A5 / 2
    G[1, 3] = G[3, 1] = half
    G[0, 4] = G[4, 0] = -half
    return G


def complex_structure(lam: float) -> np.ndarray:
    """Matrix of J in the frame; column k is the image of frame vector k."""
    L = np.sqrt(1 + lam * lam)
    Jm = np.zeros((6, 6))
    Jm[1, 0], Jm[3, 0] = -lam / L, 2 / L
    Jm[0, 1], Jm[4, 1] = lam / L, 2 / L
    Jm[5, 2] = 2 / L
    Jm[0, 3], Jm[4, 3] = -1 / (2 * L), lam / L
    Jm[1, 4], Jm[3, 4] = -1 / (2 * L), -lam / L
    Jm[2, 5] = -L / 2
    return Jm


def kaehler_form(gram: np.ndarray, Jm: np.ndarray) -> np.ndarray:
    """Omega(X, Y) = gamma(JX, Y) as a matrix."""
    return Jm.T @ gram


def hat_coefficients(omega: np.ndarray, lam: float) -> tuple[float, float, float, float]:
    """Read (Ahat_1..Ahat_4) off the Kaehler-form matrix at l = (0, 0, lambda)."""
    h1 = omega[0, 3]
    h2 = (omega[2, 5] - h1) / (lam * lam) if lam > 0 else np.nan
    h3 = omega[3, 4] / lam if lam > 0 else np.nan
    h4 = omega[0, 1] / lam if lam > 0 else 0.0
    return float(h1), float(h2), float(h3), float(h4)


def hat_coefficients_closed(c: Coefficients) -> tuple[float, float, float, float]:
    """The closed form of Ahat_1..Ahat_4 in terms of A_1..A_5."""
    L = np.sqrt(1 + c.lam**2)
    return (L * c.A1 / 2, L * c.A2 / 2, (c.A1 + 4 * c.A3) / (4 * L), c.lam * (c.A5 - c.A1) / L)


@dataclass(frozen=True)
class FrameGeometry:
    lam: float
    coefficients: Coefficients
    gram: np.ndarray
    J: np.ndarray
    omega: np.ndarray

    @property
    def hat(self) -> tuple[float, float, float, float]:
        return hat_coefficients(self.omega, self.lam)

    @property
    def B(self) -> float:
        return float(self.gram[5, 5])

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.gram @ np.asarray(y))


def frame_geometry(profile, lam: float, check: bool = True) -> FrameGeometry:
    profile = get_profile(profile)
    lam = float(lam)
    if lam < 0:
        raise InvalidInputError("lambda must be non-negative")
    c = coefficients_from_A(profile, lam)
    G = gram_from_coefficients(lam, c)
    if check:
        # the B entry is evaluated from the profile's own (cancellation-free) formula
        G[5, 5] = float(profile.B(lam))
        if np.linalg.eigvalsh(G)[0] <= 0:
            raise ProfileError(f"profile {profile.name} is not positive definite at lambda={lam}")
    Jm = complex_structure(lam)
    return FrameGeometry(lam, c, G, Jm, kaehler_form(G, Jm))


def _grid(lams):
    arr = np.atleast_1d(np.asarray(lams, dtype=float))
    if arr.size == 0:
        raise InvalidInputError("empty lambda grid")
    return arr


def verify_hermiticity(profile, lams, perturb: dict | None = None) -> float:
    """Max violation of the two Hermiticity identities among A_1..A_5.

    ``perturb`` maps coefficient names ("A1".."A5") to multiplicative factors so
    that deliberately broken coefficient sets can be checked.
    """
    profile = get_profile(profile)
    worst = 0.0
    for lam in _grid(lams):
        c = coefficients_from_A(profile, lam)
        vals = dict(zip(("A1", "A2", "A3", "A4", "A5"), c.as_tuple()))
        for key, factor in (perturb or {}).items():
            vals[key] *= factor
        l2 = lam * lam
        r1 = vals["A3"] - (vals["A1"] / 4 + l2 * vals["A5"] / 2)
        r2 = vals["A1"] + l2 * vals["A2"] - 4 * (vals["A3"] + l2 * vals["A4"]) / (1 + l2)
        worst = max(worst, abs(r1), abs(r2))
    return worst


def gram_hermiticity_residual(geom: FrameGeometry) -> float:
    return float(np.max(np.abs(geom.J.T @ geom.gram @ geom.J - geom.gram)))


def _hat1(profile, lam):
    return hat_coefficients(frame_geometry(profile, lam, check=False).omega, lam)[0]


def verify_closure(profile, lams, step: float = 1e-3) -> float:
    """Max violation of Ahat_1 = Ahat_3, Ahat_1' = lam Ahat_2 and Ahat_4 = 0.

    The coefficients are read off Omega = gamma(J., .); Ahat_1' is a fourth-order
    central difference.  Grid points must satisfy lambda > 2 * step.
    """
    profile = get_profile(profile)
    worst = 0.0
    for lam in _grid(lams):
        if lam <= 2 * step:
            raise InvalidInputError("closure check needs lambda > 2*step")
        h1, h2, h3, h4 = hat_coefficients(frame_geometry(profile, lam, check=False).omega, lam)
        f = [_hat1(profile, lam + k * step) for k in (-2, -1, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * step)
        worst = max(worst, abs(h1 - h3), abs(d1 - lam * h2), abs(h4))
    return worst


@dataclass(frozen=True)
class PositivityResult:
    passed: bool
    first_failure: float | None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def positivity_check(profile, lams) -> PositivityResult:
    """A > 0, A'/A > -(1+2l^2)/(l+l^3), and for l > 1 the integrated bound."""
    profile = get_profile(profile)
    lams = np.sort(_grid(lams))
    a, a1 = profile.derivatives(lams, 1)
    a_one = float(profile.A(1.0))
    for lam, av, dv in zip(lams, a, a1):
        if av <= 0:
            return PositivityResult(False, float(lam), "A <= 0")
        if lam > 0 and dv / av <= -(1 + 2 * lam * lam) / (lam + lam**3):
            return PositivityResult(False, float(lam), "logarithmic derivative bound")
        if lam > 1 and av <= np.sqrt(2) * a_one / (lam * np.sqrt(1 + lam * lam)):
            return PositivityResult(False, float(lam), "integrated decay bound")
    return PositivityResult(True, None)


# ---------------------------------------------------------------------------
# Fubini-Study metric in the inhomogeneous chart
# ---------------------------------------------------------------------------
def fs_metric_b(b, x, y) -> float:
    """Fubini-Study inner product of b-chart tangent vectors x, y at b.

    The form is ((1+|b|^2)<x,y> - <x,b><b,y>) / (1+|b|^2)^2, real part taken.
    """
    b = np.asarray(b, dtype=complex)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n2 = 1 + np.vdot(b, b).real
    h = (n2 * np.vdot(y, x) - np.vdot(b, x) * np.vdot(y, b)) / n2**2
    return float(h.real)


def fs_gram_chart(lam: float) -> np.ndarray:
    """6x6 Gram of the frame at W_lambda under the chart formula for the FS metric."""
    from .quadrature import frame_tangents_at_Wlambda

    T = frame_tangents_at_Wlambda(lam)
    b = np.array([0, 0, 1 / mu_of_lambda(lam)], dtype=complex)
    return np.array([[fs_metric_b(b, T[i], T[j]) for j in range(6)] for i in range(6)])


# ---------------------------------------------------------------------------
# Character integrals for the count of invariant tensors
# ---------------------------------------------------------------------------
def isotropy_matrix(psi: float) -> np.ndarray:
    """Action of the SO(2) isotropy group on the six frame vectors."""
    c, s = np.cos(psi), np.sin(psi)
    R2 = np.array([[c, s], [-s, c]])
    R = np.eye(6)
    R[0:2, 0:2] = R2
    R[3:5, 3:5] = R2
    return R


def induced_characters(psi: float) -> tuple[float, float]:
    """(chi_+, chi_-) on symmetric and antisymmetric bilinear forms."""
    R = isotropy_matrix(psi)
    t, t2 = np.trace(R), np.trace(R @ R)
    return (t * t + t2) / 2, (t * t - t2) / 2


def character_integrals(nodes: int = 64) -> tuple[float, float, float, float]:
    """Multiplicity of the trivial representation in V+ and V-, for SO(2) and SO(3).

    Integrands are trigonometric polynomials, so the periodic trapezoid rule on
    ``nodes`` points is exact once nodes exceeds their degree.
    """
    psi = 2 * np.pi * np.arange(nodes) / nodes
    chi = np.array([induced_characters(p) for p in psi])
    so2 = chi.mean(axis=0)
    haar3 = np.sin(psi / 2) ** 2 / np.pi * 2 * np.pi  # (1/pi) sin^2(psi/2) dpsi, times 2 pi / nodes
    so3 = (chi * haar3[:, None]).mean(axis=0)
    return float(so2[0]), float(so2[1]), float(so3[0]), float(so3[1])


def trivial_character_norms(nodes: int = 64) -> tuple[float, float]:
    psi = 2 * np.pi * np.arange(nodes) / nodes
    return 1.0, float(np.mean(2 * np.sin(psi / 2) ** 2))


__all__ = [
    "CoefficientProfile",
    "FrameGeometry",
    "FRAME_LABELS",
    "character_integrals",
    "complex_structure",
    "frame_geometry",
    "fs_gram_chart",
    "fs_metric_b",
    "gram_from_coefficients",
    "gram_hermiticity_residual",
    "hat_coefficients",
    "hat_coefficients_closed",
    "positivity_check",
    "verify_closure",
    "verify_hermiticity",
]
