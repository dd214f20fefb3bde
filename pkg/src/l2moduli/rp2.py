"""Harmonic maps RP^2 -> RP^2 as the fixed set of the antipodal involution on M_n.

A degree-n rational map descends to RP^2 exactly when W(-1/conj z) = -1/conj W(z).
For odd n such maps are parametrized by their poles w_1..w_n and a phase: the zeros
are the antipodes -1/conj(w_i) and |mu| = |w_1 ... w_n|.  Even n has no such maps.

The incompleteness curve

    W_rho(z) = rho z^(n-2) (z + 1)(z - 1/rho) / ((z - 1)(z + rho)),   rho in [1/2, 1),

leaves every compact set as rho -> 1 (a pole and a zero collide), yet has finite
length.  Its metric coefficient f(rho) grows only logarithmically; the integrand
concentrates in small disks around z = +1 and z = -1, which are integrated on
graded local polar meshes; the exterior of the two disks is a strip in bipolar
coordinates, on which the integrand is smooth.

Near rho = 1 each disk contributes (pi/4) log(1/(1 - rho)) + O(1), so
f(rho) / log(1/(1 - rho)) -> pi/2.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammaincc

from .errors import AccuracyError, DegeneracyError, InvalidInputError, NoFixedPointsError
from .profiles import get_profile
from .quadrature import (
    MEASURE_CONSTANT,
    SphereQuadrature,
    energy_density,
    frame_gram_quadrature,
    inner_products,
)
from .rational_maps import RationalMap, check_rp2_equivariance, homogeneous_resultant, sample_grid

COLLISION_TOL = 1e-10
DISK_RADIUS = 0.5
GRADING_EXPONENT = 2


# ---------------------------------------------------------------------------
# the fixed-set chart
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FixedSetChart:
    """Poles w_1..w_n (odd n) and the phase arg(mu) of an RP^2-equivariant map."""

    poles: tuple
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(complex(w) for w in self.poles))
        object.__setattr__(self, "phase", float(self.phase) % (2 * np.pi))

    @property
    def degree(self) -> int:
        return len(self.poles)

    @property
    def zeros(self) -> tuple:
        return tuple(-1 / np.conj(w) for w in self.poles)

    @property
    def mu(self) -> complex:
        return abs(np.prod(self.poles)) * np.exp(1j * self.phase)

    def parameters(self) -> np.ndarray:
        """The 2n+1 real chart coordinates (Re w, Im w, ..., arg mu)."""
        w = np.asarray(self.poles)
        return np.concatenate([np.column_stack([w.real, w.imag]).ravel(), [self.phase]])

    @classmethod
    def from_parameters(cls, x) -> "FixedSetChart":
        x = np.asarray(x, dtype=float)
        if x.size % 2 != 1:
            raise InvalidInputError("a fixed-set chart has an odd number 2n+1 of parameters")
        w = x[:-1].reshape(-1, 2)
        return cls(tuple(w[:, 0] + 1j * w[:, 1]), x[-1])

    def to_json(self) -> str:
        return json.dumps(
            {"degree": self.degree, "poles": [[w.real, w.imag] for w in self.poles], "phase": self.phase}
        )

    @classmethod
    def from_json(cls, text) -> "FixedSetChart":
        data = json.loads(text) if isinstance(text, str) else text
        return cls(tuple(complex(re, im) for re, im in data["poles"]), data.get("phase", 0.0))


def build_fixed_map(chart: FixedSetChart) -> RationalMap:
    """W(z) = mu prod(z - z_i) / prod(z - w_i) with z_i = -1/conj(w_i), |mu| = |prod w_i|."""
    n = chart.degree
    if n < 1:
        raise InvalidInputError("at least one pole is required")
    if n % 2 == 0:
        raise NoFixedPointsError(f"no degree-{n} map descends to RP^2 -> RP^2 (degree must be odd)")
    w = np.asarray(chart.poles)
    if not np.all(np.isfinite(w)) or np.any(w == 0):
        raise InvalidInputError("poles must be finite and nonzero")
    z = np.asarray(chart.zeros)
    gap = np.abs(w[:, None] - z[None, :]) / (1 + np.abs(w[:, None]))
    if np.min(gap) < COLLISION_TOL:
        raise DegeneracyError("a pole coincides with an antipodal zero: the degree drops")
    poly = np.polynomial.polynomial
    num = chart.mu * poly.polyfromroots(z)
    den = poly.polyfromroots(w)
    return RationalMap.from_polynomials(num, den, n)


def _check_rho(n: int, rho: float):
    if n < 3 or n % 2 == 0:
        raise InvalidInputError("the curve W_rho needs odd n >= 3")
    if not 0.5 <= rho < 1:
        raise InvalidInputError(f"rho must lie in [1/2, 1), got {rho}")


def w_rho_coefficients(n: int, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient vector of W_rho and its derivative in rho (analytic)."""
    _check_rho(n, rho)
    c = np.zeros(2 * n + 2, dtype=complex)
    d = np.zeros(2 * n + 2, dtype=complex)
    # numerator z^(n-2) (rho z^2 + (rho - 1) z - 1), denominator z^2 + (rho - 1) z - rho
    c[n - 2 : n + 1] = [-1, rho - 1, rho]
    c[n + 1 : n + 4] = [-rho, rho - 1, 1]
    d[n - 2 : n + 1] = [0, 1, 1]
    d[n + 1 : n + 4] = [-1, 1, 0]
    return c, d


def w_rho(n: int, rho: float) -> RationalMap:
    c, _ = w_rho_coefficients(n, rho)
    return RationalMap(n, c)


def w_rho_resultant(n: int, rho: float) -> float:
    """|Res(P, Q)| of W_rho; it tends to zero as rho -> 1 (the curve leaves M_n)."""
    m = w_rho(n, rho)
    return float(abs(homogeneous_resultant(m.numerator, m.denominator)))


def _winding(values) -> int:
    phase = np.unwrap(np.angle(values))
    return int(round((phase[-1] - phase[0]) / (2 * np.pi)))


def winding_degree(rmap: RationalMap, samples: int = 4096) -> int:
    """Degree as max(deg P, deg Q), each read off as a winding number on a large circle.

    (The winding of W itself there counts zeros minus poles, not the degree.)
    """
    poly = np.polynomial.polynomial
    roots = np.concatenate([poly.polyroots(c) for c in (rmap.numerator, rmap.denominator) if np.any(c[1:])] + [[0]])
    radius = 2 * (1 + np.max(np.abs(roots)))
    t = 2 * np.pi * np.arange(samples + 1) / samples
    z = radius * np.exp(1j * t)
    return max(_winding(poly.polyval(z, c)) for c in (rmap.numerator, rmap.denominator))


# ---------------------------------------------------------------------------
# f(rho) on graded meshes
# ---------------------------------------------------------------------------
def _pullback_density(coeffs, direction, n, z):
    """|dP Q - P dQ|^2 / (|P|^2 + |Q|^2)^2 at z, evaluated in homogeneous form.

    The expression is invariant under rescaling (u, v), so |z| > 1 uses (1, 1/z)
    and infinite z is allowed.
    """
    z = np.asarray(z, dtype=complex)
    big = ~(np.abs(z) <= 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(np.isfinite(z), 1 / np.where(big, z, 1), 0)
    u = np.where(big, 1, z)
    v = np.where(big, inv, 1)
    k = np.arange(n + 1)
    mon = u[..., None] ** k * v[..., None] ** (n - k)
    P, Q = mon @ coeffs[: n + 1], mon @ coeffs[n + 1 :]
    dP, dQ = mon @ direction[: n + 1], mon @ direction[n + 1 :]
    return np.abs(dP * Q - P * dQ) ** 2 / (np.abs(P) ** 2 + np.abs(Q) ** 2) ** 2


def _graded_disk(order: int, delta: float, radius: float = DISK_RADIUS):
    """Polar rule on |z - c| < radius with radius r = radius * s^2 (grading exponent 2).

    The s-interval is cut into geometric panels down to s ~ sqrt(delta)/10 so that
    the local scale r ~ delta is resolved; returns offsets and area weights.
    """
    q = max(order // 4, 4)
    x, w = np.polynomial.legendre.leggauss(q)
    s_min = max(np.sqrt(delta / radius) / 10, 1e-12)
    edges = [0.0]
    s = s_min
    while s < 1:
        edges.append(s)
        s *= 2
    edges.append(1.0)
    edges = np.array(edges)
    a, b = edges[:-1, None], edges[1:, None]
    s_nodes = ((b - a) / 2 * x + (a + b) / 2).ravel()
    s_w = ((b - a) / 2 * w).ravel()
    r = radius * s_nodes**GRADING_EXPONENT
    dr = radius * GRADING_EXPONENT * s_nodes ** (GRADING_EXPONENT - 1) * s_w
    nt = order
    theta = 2 * np.pi * (np.arange(nt) + 0.5) / nt
    offsets = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    area = ((r * dr)[:, None] * np.full(nt, 2 * np.pi / nt)).ravel()
    return offsets, area


@dataclass(frozen=True)
class FRhoResult:
    n: int
    rho: float
    value: float
    parts: dict
    order: int
    refinement_change: float


def _exterior_rule(order: int, radius: float = DISK_RADIUS):
    """Points and sphere-area weights on the complement of the disks |z -+ 1| < radius.

    Bipolar coordinates z = i a cot((sigma + i tau) / 2) with foci +-a, a = sqrt(1 - radius^2),
    turn the complement into the strip |tau| < tau_0 = acosh(1/radius) (sigma periodic).
    The map is conformal onto the sphere, so the integrand is smooth there, including
    at z = infinity (sigma = tau = 0).
    """
    a = np.sqrt(1 - radius**2)
    tau0 = np.arccosh(1 / radius)
    q = max(order // 4, 4)
    x, w = np.polynomial.legendre.leggauss(q)
    edges = np.linspace(-tau0, tau0, 5)
    lo, hi = edges[:-1, None], edges[1:, None]
    tau = ((hi - lo) / 2 * x + (hi + lo) / 2).ravel()
    wt = ((hi - lo) / 2 * w).ravel()
    sigma = 2 * np.pi * (np.arange(order) + 0.5) / order - np.pi
    W = sigma[:, None] + 1j * tau[None, :]
    half = W / 2
    z = 1j * a * np.cos(half) / np.sin(half)
    jac = np.abs(a / (2 * np.sin(half) ** 2)) ** 2
    # sphere area form dA / (1 + |z|^2)^2, written to stay finite near z = infinity
    sph = jac / (1 + np.abs(z) ** 2) ** 2
    weights = sph * wt[None, :] * (2 * np.pi / order)
    return z.ravel(), weights.ravel()


def _f_rho_once(n: int, rho: float, order: int) -> tuple[float, dict]:
    coeffs, direction = w_rho_coefficients(n, rho)
    delta = 1 - rho
    parts = {}
    offsets, area = _graded_disk(order, delta)
    for label, centre in (("disk_plus", 1.0), ("disk_minus", -1.0)):
        z = centre + offsets
        dens = _pullback_density(coeffs, direction, n, z) / (1 + np.abs(z) ** 2) ** 2
        parts[label] = MEASURE_CONSTANT * float(np.sum(area * dens))
    z, weights = _exterior_rule(order)
    parts["exterior"] = MEASURE_CONSTANT * float(np.sum(weights * _pullback_density(coeffs, direction, n, z)))
    return sum(parts.values()), parts


MAX_ORDER = 1024


def f_rho_detailed(n: int, rho: float, order: int = 64, tol: float = 1e-8) -> FRhoResult:
    """f(rho) with adaptive refinement: the order is doubled until two successive
    values agree to ``tol`` (relative).  Raises AccuracyError past ``MAX_ORDER``."""
    _check_rho(n, rho)
    value, _ = _f_rho_once(n, rho, order)
    change = float("inf")
    while True:
        if 2 * order > MAX_ORDER:
            raise AccuracyError(
                f"f(rho) quadrature not converged at rho={rho} by order {order} "
                f"(last relative change {change:.2e}); raise MAX_ORDER or loosen tol"
            )
        order *= 2
        finer, parts = _f_rho_once(n, rho, order)
        change = abs(finer - value) / abs(finer)
        value = finer
        if change <= tol:
            return FRhoResult(n, float(rho), value, parts, order, change)


def f_rho(n: int, rho: float, order: int = 64, tol: float = 1e-8) -> float:
    """Metric coefficient f(rho) of the curve W_rho: gamma = f(rho) d rho^2."""
    return f_rho_detailed(n, rho, order, tol).value


def f_rho_plain(n: int, rho: float, quad: SphereQuadrature | None = None) -> float:
    """f(rho) from the global sphere rule alone (no local refinement)."""
    coeffs, direction = w_rho_coefficients(n, rho)
    return float(inner_products(RationalMap(n, coeffs), direction[None, :], quad)[0, 0].real)


def log_bound(rho):
    """1 + log(1/(1 - rho)), the growth rate bounding f(rho)."""
    return 1 + np.log(1 / (1 - np.asarray(rho, dtype=float)))


@dataclass(frozen=True)
class FRhoTable:
    n: int
    rho: np.ndarray
    f: np.ndarray
    order: int  # highest refinement order reached

    @property
    def ratio(self) -> np.ndarray:
        return self.f / log_bound(self.rho)

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        buf.write(f"# n: {self.n}\n# max_refined_order: {self.order}\n")
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rho", "f", "log_bound", "ratio"])
        for r, f, b, q in zip(self.rho, self.f, log_bound(self.rho), self.ratio):
            w.writerow([repr(float(r)), repr(float(f)), repr(float(b)), repr(float(q))])
        return buf.getvalue()


def f_rho_table(n: int, rhos, order: int = 64, tol: float = 1e-8) -> FRhoTable:
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    if rhos.size == 0:
        raise InvalidInputError("empty rho grid")
    results = [f_rho_detailed(n, r, order, tol) for r in rhos]
    return FRhoTable(n, rhos, np.array([r.value for r in results]), max(r.order for r in results))


def boundary_rhos(kmin: int = 2, kmax: int = 6) -> np.ndarray:
    """rho = 1 - 10^-k for k = kmin..kmax."""
    return 1 - 10.0 ** -np.arange(kmin, kmax + 1)


# ---------------------------------------------------------------------------
# the length of W_rho
# ---------------------------------------------------------------------------
def sqrt_log_tail(delta: float) -> float:
    """int_0^delta sqrt(1 + log(1/x)) dx, in closed form via the incomplete gamma function."""
    t = np.log(1 / delta)
    return float(np.e * gamma(1.5) * gammaincc(1.5, 1 + t))


@dataclass(frozen=True)
class IncompletenessResult:
    """Partial lengths of W_rho on [rho0, 1 - 10^-k] and their extrapolation to rho = 1."""

    n: int
    rho0: float
    rho_max: tuple
    partial: tuple
    differences: tuple
    extrapolated: float
    C: float
    upper_bound: float
    converged: bool
    order: int

    @property
    def inconclusive(self) -> bool:
        return not self.converged

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# n: {self.n}\n# rho0: {self.rho0}\n# order: {self.order}\n")
        buf.write(f"# extrapolated_length: {self.extrapolated!r}\n# C: {self.C!r}\n")
        buf.write(f"# upper_bound: {self.upper_bound!r}\n# converged: {self.converged}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rho_max", "partial_length"])
        for r, L in zip(self.rho_max, self.partial):
            w.writerow([repr(r), repr(L)])
        return buf.getvalue()


def incompleteness_length(
    n: int = 3, rho0: float = 0.5, kmax: int = 6, order: int = 64, nodes: int = 8
) -> IncompletenessResult:
    """Length int sqrt(f) d rho of W_rho up to rho_max = 1 - 10^-k, k = 2..kmax.

    The integral is taken in t = log(1/(1 - rho)), where sqrt(f) e^-t is smooth
    and decays; Gauss-Legendre panels end exactly at every t_k = k log 10.  The
    tail beyond the last rho_max is bounded by sqrt(C) int sqrt(1 + log(1/x)) dx
    with C the largest sampled value of f / (1 + log(1/(1 - rho))).
    """
    _check_rho(n, rho0)
    if kmax < 4:
        raise InvalidInputError("need at least three partial lengths (kmax >= 4)")
    t0 = np.log(1 / (1 - rho0))
    stops = [k * np.log(10) for k in range(2, kmax + 1)]
    if stops[0] <= t0:
        raise InvalidInputError("rho0 must be below 1 - 10^-2")
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = [t0]
    for s in stops:
        a = edges[-1]
        m = max(1, int(np.ceil((s - a) / 1.2)))
        edges.extend(np.linspace(a, s, m + 1)[1:])
    edges = np.array(edges)
    partial, running, ratio_max = [], 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        t = (b - a) / 2 * x + (a + b) / 2
        rho = 1 - np.exp(-t)
        f = np.array([f_rho(n, r, order) for r in rho])
        ratio_max = max(ratio_max, float(np.max(f / (1 + t))))
        running += float(np.sum((b - a) / 2 * w * np.sqrt(f) * np.exp(-t)))
        if np.any(np.isclose(b, stops, rtol=0, atol=1e-12)):
            partial.append(running)
    diffs = np.abs(np.diff(partial))
    converged = bool(np.all(diffs[1:] < 0.5 * diffs[:-1]))
    sC = np.sqrt(ratio_max)
    extrapolated = partial[-1] + sC * sqrt_log_tail(10.0**-kmax)
    bound = sC * (sqrt_log_tail(1 - rho0))
    return IncompletenessResult(
        n,
        float(rho0),
        tuple(float(1 - 10.0**-k) for k in range(2, kmax + 1)),
        tuple(partial),
        tuple(float(d) for d in diffs),
        float(extrapolated),
        float(ratio_max),
        float(bound),
        converged,
        order,
    )


# ---------------------------------------------------------------------------
# the n = 1 fixed set
# ---------------------------------------------------------------------------
def antipodal_matrix(m) -> np.ndarray:
    """The involution on Moebius matrices: [[a, b], [c, d]] -> [[-conj d, conj c], [conj b, -conj a]]."""
    m = np.asarray(m, dtype=complex)
    return np.array([[-np.conj(m[1, 1]), np.conj(m[1, 0])], [np.conj(m[0, 1]), -np.conj(m[0, 0])]])


def random_fixed_matrix(rng) -> np.ndarray:
    """A solution of the n = 1 fixed-point equations: M + P(M) for random M."""
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        fixed = m + antipodal_matrix(m)
        if abs(np.linalg.det(fixed)) > 1e-3:
            return fixed


def unitarity_residual(m) -> float:
    """|M M^dagger - c I| / c with c = tr(M M^dagger) / 2."""
    m = np.asarray(m, dtype=complex)
    x = m @ m.conj().T
    c = np.trace(x).real / 2
    return float(np.max(np.abs(x - c * np.eye(2))) / c)


@dataclass(frozen=True)
class UnitaryCheck:
    samples: int
    unitarity_residual: float
    equivariance_residual: float
    gram_residual: float
    energy_density_variance: float
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return (
            self.unitarity_residual < self.tol
            and self.equivariance_residual < self.tol
            and self.gram_residual < 1e-6
            and self.energy_density_variance < self.tol
        )

    def __bool__(self) -> bool:
        return self.passed


def n1_fixed_is_unitary(samples: int = 50, seed: int = 0, quad: SphereQuadrature | None = None) -> UnitaryCheck:
    """Fixed points of degree 1 are rotations, with induced metric A_3(0) sigma.sigma.

    The Gram matrix of theta_a at the identity is compared with A(0)/4, and the
    energy density of a fixed map (relative to the round area form) with a constant.
    """
    rng = np.random.default_rng(seed)
    quad = quad or SphereQuadrature()
    unit, equi = 0.0, 0.0
    last = None
    for _ in range(samples):
        m = random_fixed_matrix(rng)
        unit = max(unit, unitarity_residual(m))
        last = RationalMap.from_matrix(m)
        equi = max(equi, check_rp2_equivariance(last))
    a3 = float(get_profile("l2").A(0.0)) / 4
    gram = frame_gram_quadrature(0.0, quad)[3:, 3:]
    gram_res = float(np.max(np.abs(gram - a3 * np.eye(3))))
    dens = energy_density(last.normalized(), quad) * (1 + np.abs(quad.zeta) ** 2) ** 2
    return UnitaryCheck(samples, unit, equi, gram_res, float(np.var(dens)))


# ---------------------------------------------------------------------------
# dimension and Lagrangian checks
# ---------------------------------------------------------------------------
def chart_tangents(chart: FixedSetChart, step: float = 1e-6) -> tuple[RationalMap, np.ndarray]:
    """Coefficient-space derivatives of build_fixed_map along the 2n+1 chart parameters.

    Central differences of the coefficient vector; the overall complex scale of each
    perturbed vector is matched to the base map so that the differences are tangent
    to M_n rather than to the coefficient space.
    """
    base = build_fixed_map(chart)
    x0 = chart.parameters()
    out = []
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = step
        plus = build_fixed_map(FixedSetChart.from_parameters(x0 + e)).coeffs
        minus = build_fixed_map(FixedSetChart.from_parameters(x0 - e)).coeffs
        out.append((plus - minus) / (2 * step))
    return base, np.array(out)


def fixed_set_rank(chart: FixedSetChart, quad: SphereQuadrature | None = None, rel_tol: float = 1e-8):
    """(rank, eigenvalues) of the L^2 Gram matrix of the chart tangents."""
    base, dirs = chart_tangents(chart)
    G = inner_products(base, dirs, quad).real
    ev = np.linalg.eigvalsh(G)
    return int(np.sum(ev > rel_tol * ev[-1])), ev


def kaehler_form_on_tangents(chart: FixedSetChart, quad: SphereQuadrature | None = None) -> np.ndarray:
    """Omega(X, Y) = gamma(iX, Y) on the chart tangents, from the L^2 quadrature."""
    base, dirs = chart_tangents(chart)
    H = inner_products(base, np.concatenate([1j * dirs, dirs]), quad).real
    k = dirs.shape[0]
    return H[:k, k:]


def lagrangian_residual(chart: FixedSetChart, quad: SphereQuadrature | None = None) -> float:
    """max |Omega(X, Y)| / max |gamma(X, Y)| over fixed-set tangents."""
    base, dirs = chart_tangents(chart)
    scale = float(np.max(np.abs(inner_products(base, dirs, quad).real)))
    return float(np.max(np.abs(kaehler_form_on_tangents(chart, quad))) / scale)


def lagrangian_residual_frame(m, profile="l2") -> float:
    """The same check through the invariant frame: Omega restricted to the orbit directions.

    For n = 1 the fixed set through [M] is the rotation orbit, so its tangent space
    is spanned by theta_1..theta_3 at the shape lambda of M's polar data.
    """
    from .invariant_metrics import frame_geometry
    from .rational_maps import polar_decompose

    lam = polar_decompose(m).lam
    geom = frame_geometry(profile, lam)
    block = geom.omega[3:, 3:]
    return float(np.max(np.abs(block)) / np.max(np.abs(geom.gram)))


def random_chart(n: int, rng, spread: float = 1.5) -> FixedSetChart:
    """Random odd-degree chart with poles away from each other's antipodes."""
    while True:
        w = spread * (rng.normal(size=n) + 1j * rng.normal(size=n))
        z = -1 / np.conj(w)
        if np.min(np.abs(w[:, None] - z[None, :])) > 0.2 and np.min(np.abs(w)) > 0.1:
            return FixedSetChart(tuple(w), rng.uniform(0, 2 * np.pi))


def equivariance_grid(count: int = 200, seed: int = 0) -> np.ndarray:
    return sample_grid(count, seed)


__all__ = [
    "FixedSetChart",
    "build_fixed_map",
    "w_rho",
    "f_rho",
    "f_rho_detailed",
    "f_rho_table",
    "incompleteness_length",
    "n1_fixed_is_unitary",
    "fixed_set_rank",
    "lagrangian_residual",
    "lagrangian_residual_frame",
]
