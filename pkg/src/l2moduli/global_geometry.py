"""Global integrals over M_1: volume, length of the radial curve Gamma, diameter bound.

The improper radial integrals are split at mu = 2.  The head [1, 2] is integrated in
mu and the tail in t = 1/mu on dyadic panels [2^-(k+1), 2^-k]; the sequence of panel
contributions doubles as the divergence detector (it must decay geometrically).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import DivergenceError, InvalidInputError
from .profiles import coefficients_from_A, get_profile, lambda_of_mu

TAIL_PANELS = 80
HEAD_PANELS = 4
ROUNDOFF = 64 * np.finfo(float).eps


# ---------------------------------------------------------------------------
# SO(3)
# ---------------------------------------------------------------------------
def _rz(a):
    c, s = np.cos(a), np.sin(a)
    z, o = np.zeros_like(a), np.ones_like(a)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def _ry(a):
    c, s = np.cos(a), np.sin(a)
    z, o = np.zeros_like(a), np.ones_like(a)
    return np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)


_GENERATORS = np.array(
    [
        [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
    ],
    dtype=float,
)


def euler_zyz(phi, theta, psi) -> np.ndarray:
    """R = Rz(phi) Ry(theta) Rz(psi)."""
    return _rz(np.asarray(phi, float)) @ _ry(np.asarray(theta, float)) @ _rz(np.asarray(psi, float))


def _vee(X):
    return np.stack([X[..., 2, 1], X[..., 0, 2], X[..., 1, 0]], axis=-1)


def left_coframe_matrix(phi, theta, psi) -> np.ndarray:
    """sigma_a(d/dx_i) for Euler coordinates x = (phi, theta, psi), from R^T dR.

    Returns an array indexed [..., a, i].
    """
    phi, theta, psi = (np.asarray(v, dtype=float) for v in (phi, theta, psi))
    Yt, Zs = _ry(theta), _rz(psi)
    Rt = np.swapaxes
    inner_t = Rt(Zs, -1, -2) @ _GENERATORS[1] @ Zs
    inner_p = Rt(Zs, -1, -2) @ Rt(Yt, -1, -2) @ _GENERATORS[2] @ Yt @ Zs
    cols = [_vee(inner_p), _vee(inner_t), _vee(np.broadcast_to(_GENERATORS[2], inner_t.shape))]
    return np.stack(cols, axis=-1)


def so3_volume(order: int = 32, scale: float = 1.0) -> float:
    """Volume of SO(3) for the coframe scale * sigma (d sigma_1 = sigma_2 ^ sigma_3).

    Euler-angle quadrature: Gauss-Legendre in theta, periodic trapezoid in phi, psi,
    of the determinant of the left-invariant coframe.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    theta = (x + 1) * np.pi / 2
    wt = w * np.pi / 2
    ang = 2 * np.pi * np.arange(order) / order
    P, T, S = np.meshgrid(ang, theta, ang, indexing="ij")
    W = np.broadcast_to(wt[None, :, None], P.shape) * (2 * np.pi / order) ** 2
    det = np.abs(np.linalg.det(left_coframe_matrix(P.ravel(), T.ravel(), S.ravel())))
    return float(scale**3 * np.sum(W.ravel() * det))


def rotation_distance(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Bi-invariant (sigma.sigma) distance: the angle of the relative rotation."""
    rel = Rotation.from_matrix(np.einsum("...ji,...jk->...ik", r1, r2))
    return np.linalg.norm(rel.as_rotvec(), axis=-1)


def so3_diameter(samples: int = 20000, seed: int = 0) -> float:
    """Sampled diameter of SO(3) with the unit bi-invariant metric sigma.sigma.

    Distances along one-parameter subgroups; by bi-invariance it suffices to
    measure from the identity.  The closed-form expectation is pi.
    """
    rng = np.random.default_rng(seed)
    rots = Rotation.random(samples, random_state=rng).as_matrix()
    return float(np.max(rotation_distance(np.eye(3)[None], rots)))


# ---------------------------------------------------------------------------
# radial integrals
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RefinedIntegral:
    """Values of one integral under successive refinement (GL order doubling)."""

    orders: tuple
    values: tuple
    ratios: tuple
    panels: int

    @property
    def value(self) -> float:
        return self.values[-1]

    @property
    def converged(self) -> bool:
        return all(r < 0.5 for r in self.ratios)


def _cauchy_ratios(values) -> tuple:
    """|I_{k+2}-I_{k+1}| / |I_{k+1}-I_k|; differences at rounding level count as zero."""
    v = np.asarray(values)
    floor = ROUNDOFF * max(1.0, float(np.max(np.abs(v))))
    d = np.abs(np.diff(v))
    d = np.where(d <= floor, 0.0, d)
    ratios = []
    for a, b in zip(d[:-1], d[1:]):
        if b == 0.0:
            ratios.append(0.0)
        elif a == 0.0:
            ratios.append(np.inf)
        else:
            ratios.append(float(b / a))
    return tuple(ratios)


def _panel_rule(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (b - a) / 2 * x[None, :] + (a + b) / 2
    weights = (b - a) / 2 * w[None, :]
    return nodes, weights


def _mu_integral(f_of_mu, order: int, tail_panels: int = TAIL_PANELS, check_tail: bool = True):
    """int_1^inf f(mu) dmu; returns (value, tail panel contributions)."""
    head_edges = np.linspace(1.0, 2.0, HEAD_PANELS + 1)
    xh, wh = _panel_rule(head_edges, order)
    head = np.sum(wh * f_of_mu(xh))
    tail_edges = 2.0 ** -np.arange(1, tail_panels + 2, dtype=float)[::-1]
    xt, wt = _panel_rule(tail_edges, order)
    with np.errstate(over="ignore", invalid="ignore"):
        contrib = np.sum(wt * f_of_mu(1 / xt) / xt**2, axis=1)[::-1]  # outermost panel first
    if check_tail:
        _check_tail(contrib)
    return float(head + np.sum(contrib)), contrib


def _check_tail(contrib: np.ndarray):
    if not np.all(np.isfinite(contrib)):
        raise DivergenceError("integrand is not finite on the tail t = 1/mu -> 0")
    total = np.abs(contrib).sum()
    last = np.abs(contrib[-8:])
    # a convergent tail has panel contributions decaying at least geometrically
    growing = np.all(last[1:] >= 0.9 * last[:-1]) and last[-1] > ROUNDOFF * total
    if growing or last[-1] > 1e-10 * max(total, 1e-300):
        raise DivergenceError(
            f"tail contributions do not decay (last panels {last[-3:]}); the integral diverges"
        )


def _refine(f_of_mu, orders=(4, 8, 16, 32)) -> RefinedIntegral:
    vals = [_mu_integral(f_of_mu, m)[0] for m in orders]
    return RefinedIntegral(tuple(orders), tuple(vals), _cauchy_ratios(vals), HEAD_PANELS + TAIL_PANELS)


def volume_density_mu(profile):
    """Integrand in mu of the radial volume factor: (1/mu)(mu - 1/mu)^2 B A^2 / 64."""
    profile = get_profile(profile)

    def f(mu):
        lam = lambda_of_mu(mu)
        return (mu - 1 / mu) ** 2 * profile.B(lam) * profile.A(lam) ** 2 / (64 * mu)

    return f


def radial_volume_integral(profile, orders=(4, 8, 16, 32)) -> RefinedIntegral:
    """int_0^inf lambda^2 (Lambda/2) B A^2 dlambda."""
    return _refine(volume_density_mu(profile), orders)


def total_volume(profile, orders=(4, 8, 16, 32), so3_order: int = 32) -> RefinedIntegral:
    """Vol(M_1) = 4 pi Vol(SO(3)) int_0^inf lambda^2 (Lambda/2) B A^2 dlambda."""
    r = radial_volume_integral(profile, orders)
    c = 4 * np.pi * so3_volume(so3_order)
    return RefinedIntegral(r.orders, tuple(c * v for v in r.values), r.ratios, r.panels)


def gamma_length(profile, orders=(4, 8, 16, 32)) -> RefinedIntegral:
    """Length of Gamma: int_1^inf (dmu/mu) sqrt(B)."""
    profile = get_profile(profile)

    def f(mu):
        return np.sqrt(profile.B(lambda_of_mu(mu))) / mu

    return _refine(f, orders)


def gamma_length_lambda(profile, lam_max: float, order: int = 32, panels: int = 64) -> float:
    """int_0^lam_max sqrt(A_1 + lam^2 A_2) dlambda, directly in lambda.

    A_1 + lam^2 A_2 = A + lam^2 A / Lambda^2 + lam A' cancels to relative order
    log(lam)/lam^4 at large lambda, so this form is only used on a finite range.
    """
    profile = get_profile(profile)
    edges = np.concatenate([[0.0], np.geomspace(1e-3, lam_max, panels)])
    x, w = _panel_rule(edges, order)
    a, a1 = profile.derivatives(x, 1)
    integrand = np.sqrt(a + x * x * a / (1 + x * x) + x * a1)
    return float(np.sum(w * integrand))


def gamma_length_mu(profile, mu_max: float, order: int = 32, panels: int = 64) -> float:
    """int_1^mu_max (dmu/mu) sqrt(B) on a finite range (companion of the lambda form)."""
    profile = get_profile(profile)
    edges = np.geomspace(1.0, mu_max, panels + 1)
    x, w = _panel_rule(edges, order)
    return float(np.sum(w * np.sqrt(profile.B(lambda_of_mu(x))) / x))


def so3_factor_diameter(profile, samples: int = 20000, seed: int = 0) -> float:
    """Diameter of (SO(3), A_3(0) sigma.sigma), sampled."""
    a3 = coefficients_from_A(get_profile(profile), 0.0).A3
    return float(np.sqrt(a3) * so3_diameter(samples, seed))


def diameter_upper_bound(profile, samples: int = 20000, seed: int = 0) -> float:
    """2 (length(Gamma) + diam(SO(3), A_3(0) sigma.sigma))."""
    return 2 * (gamma_length(profile).value + so3_factor_diameter(profile, samples, seed))


@dataclass(frozen=True)
class FibreRow:
    lam: float
    B: float
    asymptote: float
    ratio: float
    min_other_norm2: float


def fibre_collapse_diagnostic(lams, profile="l2") -> list[FibreRow]:
    """|theta_3|^2 = B against pi log(lam) / (2 lam^4), plus the smallest squared norm
    among the other orbit directions theta_1, theta_2, lam d/dlam_1, lam d/dlam_2."""
    profile = get_profile(profile)
    rows = []
    for lam in np.atleast_1d(np.asarray(lams, dtype=float)):
        if lam <= 1:
            raise InvalidInputError("the asymptotic comparison needs lambda > 1")
        c = coefficients_from_A(profile, lam)
        b = float(profile.B(lam))
        asym = np.pi * np.log(lam) / (2 * lam**4)
        rows.append(FibreRow(float(lam), b, float(asym), float(b / asym), float(min(c.A3, lam * lam * c.A1))))
    return rows


def fibre_table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "B", "asymptote", "ratio", "min_other_norm2"])
    for r in rows:
        w.writerow([repr(r.lam), repr(r.B), repr(r.asymptote), repr(r.ratio), repr(r.min_other_norm2)])
    return buf.getvalue()


@dataclass(frozen=True)
class GlobalReport:
    profile: str
    so3_volume: float
    radial_integral: float
    total_volume: float
    volume_ratios: tuple
    gamma_length: float
    length_ratios: tuple
    so3_diameter: float
    so3_diameter_expected: float
    diameter_upper_bound: float
    fibre: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def compute(cls, profile, samples: int = 20000, seed: int = 0, fibre_lams=(1e1, 1e2, 1e3, 1e4, 1e5)):
        profile = get_profile(profile)
        vol3 = so3_volume()
        radial = radial_volume_integral(profile)
        length = gamma_length(profile)
        so3d = so3_factor_diameter(profile, samples, seed)
        a3 = coefficients_from_A(profile, 0.0).A3
        fibre = [asdict(r) for r in fibre_collapse_diagnostic(fibre_lams, profile)]
        return cls(
            profile.name,
            vol3,
            radial.value,
            4 * np.pi * vol3 * radial.value,
            radial.ratios,
            length.value,
            length.ratios,
            so3d,
            float(np.pi * np.sqrt(a3)),
            2 * (length.value + so3d),
            fibre,
            {
                "gl_orders": list(radial.orders),
                "panels": radial.panels,
                "so3_samples": samples,
                "seed": seed,
                "so3_diameter_note": "sampled; closed-form expectation recorded, not asserted",
            },
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=float)
