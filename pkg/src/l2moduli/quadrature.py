"""Quadrature of L^2 inner products, energy and the metric matrix on M_n.

The domain sphere is covered by two charts, the unit disk |z| <= 1 and its image
under z -> 1/z.  Each chart uses Gauss-Legendre nodes on geometrically graded
radial panels and an equispaced (periodic trapezoid) angular rule.

Integrands are written in homogeneous form: with W = P/Q,

    |dW|^2 / (1 + |W|^2)^2 = |dP Q - P dQ|^2 / (|P|^2 + |Q|^2)^2,

which is finite at poles of W and identical in both charts.

Measure convention: the area element written ``dz dzbar`` in the defining
integral is taken to be ``2 dx dy`` (``MEASURE_CONSTANT``).  This is the unique
constant for which the quadrature reproduces A(0) = 4 pi / 3.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AccuracyError, DegeneracyError, InvalidInputError
from .rational_maps import PAULI, RationalMap, is_valid_degree, polar_decompose

MEASURE_CONSTANT = 2.0
ORDER_ENV = "L2MODULI_QUAD_ORDER"
DEFAULT_ORDER = 64
RADIAL_BREAKS = (0.0, 1e-3, 1e-2, 0.05, 0.2, 0.5, 1.0)


def default_order() -> int:
    value = os.environ.get(ORDER_ENV)
    if value is None:
        return DEFAULT_ORDER
    try:
        order = int(value)
    except ValueError as exc:
        raise InvalidInputError(f"{ORDER_ENV} must be an integer, got {value!r}") from exc
    if order < 4:
        raise InvalidInputError(f"{ORDER_ENV} must be at least 4")
    return order


@dataclass(frozen=True)
class SphereQuadrature:
    """Two-chart product rule; ``order`` angular nodes and order/4 GL nodes per radial panel."""

    order: int = field(default_factory=default_order)
    radial_breaks: tuple = RADIAL_BREAKS

    def refined(self) -> "SphereQuadrature":
        return SphereQuadrature(2 * self.order, self.radial_breaks)

    @cached_property
    def _disk(self):
        m = max(self.order // 4, 2)
        x, w = np.polynomial.legendre.leggauss(m)
        r_nodes, r_weights = [], []
        for a, b in zip(self.radial_breaks[:-1], self.radial_breaks[1:]):
            r_nodes.append((b - a) / 2 * x + (a + b) / 2)
            r_weights.append((b - a) / 2 * w)
        r = np.concatenate(r_nodes)
        wr = np.concatenate(r_weights)
        nt = self.order
        theta = 2 * np.pi * (np.arange(nt) + 0.5) / nt
        zeta = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
        area = (wr * r)[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]
        return zeta, area.ravel()

    @cached_property
    def zeta(self) -> np.ndarray:
        """Chart coordinate of every node (inner chart first)."""
        z, _ = self._disk
        return np.concatenate([z, z])

    @cached_property
    def outer(self) -> np.ndarray:
        z, _ = self._disk
        return np.concatenate([np.zeros(z.size, bool), np.ones(z.size, bool)])

    @cached_property
    def weights(self) -> np.ndarray:
        """dA / (1 + |zeta|^2)^2 in the chart coordinate (chart independent form)."""
        z, a = self._disk
        w = a / (1 + np.abs(z) ** 2) ** 2
        return np.concatenate([w, w])

    @cached_property
    def homogeneous(self):
        """(u, v) with z = u / v at every node."""
        one = np.ones_like(self.zeta)
        u = np.where(self.outer, one, self.zeta)
        v = np.where(self.outer, self.zeta, one)
        return u, v

    @property
    def size(self) -> int:
        return self.zeta.size

    def points(self) -> np.ndarray:
        """Domain points z (infinite at the outer chart centre)."""
        u, v = self.homogeneous
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v == 0, np.inf + 0j, u / np.where(v == 0, 1, v))

    def integrate(self, values) -> complex:
        """Integral of ``values`` against dA/(1+|z|^2)^2 over the whole plane."""
        return np.sum(self.weights * values)


def precompose_matrix(n: int, s) -> np.ndarray:
    """Linear map on coefficient vectors realizing W -> W o s for a 2x2 matrix s.

    Both binary forms are substituted, P(u, v) -> P(s (u, v)).  When s is
    unitary the substitution is an isometry of the domain sphere, so every L2
    integral is unchanged.
    """
    s = np.asarray(s, dtype=complex)
    poly = np.polynomial.polynomial
    lin_u = [s[0, 1], s[0, 0]]  # s00 z + s01 in ascending powers of z = u / v
    lin_v = [s[1, 1], s[1, 0]]
    block = np.zeros((n + 1, n + 1), dtype=complex)
    for k in range(n + 1):
        col = poly.polymul(poly.polypow(lin_u, k), poly.polypow(lin_v, n - k)) if n else [1.0]
        block[: len(col), k] = col
    out = np.zeros((2 * n + 2, 2 * n + 2), dtype=complex)
    out[: n + 1, : n + 1] = block
    out[n + 1 :, n + 1 :] = block
    return out


def centring_rotation(rmap: RationalMap) -> np.ndarray:
    """Domain rotation s with W o s concentrated at z = 0 or infinity.

    Only degree-1 maps have a canonical centre: with M = U H and H Hermitian,
    s diagonalizes H, so W o s = U s (Lambda + lambda tau_3) is a dilation up to
    a target rotation.  Higher degrees get the identity.
    """
    if rmap.degree != 1:
        return np.eye(2, dtype=complex)
    h = polar_decompose(rmap.to_matrix()).hermitian_factor()
    _, vecs = np.linalg.eigh(h)
    s = vecs[:, ::-1]  # larger eigenvalue first
    return s / np.sqrt(np.linalg.det(s))


def _centred(rmap: RationalMap, directions, centre: bool):
    if not centre or rmap.degree != 1:
        return rmap, directions
    C = precompose_matrix(1, centring_rotation(rmap))
    dirs = np.atleast_2d(np.asarray(directions, dtype=complex))
    return RationalMap(1, C @ rmap.coeffs), dirs @ C.T


def _forms(coeffs, n, u, v):
    k = np.arange(n + 1)
    mon = u[:, None] ** k * v[:, None] ** (n - k)
    return mon


def _binary(coeffs, mon, n):
    return mon @ coeffs[: n + 1], mon @ coeffs[n + 1 :]


def tangent_fields(rmap: RationalMap, directions, quad: SphereQuadrature):
    """Target tangent fields T_k = (dP_k Q - P dQ_k) / (|P|^2 + |Q|^2) at all nodes.

    ``directions`` is a (k, 2n+2) array of coefficient-space tangent vectors.
    Then |T_k|^2 is the pointwise squared norm of the variation of W in the
    (1+|W|^2)^-2 |dW|^2 target metric.
    """
    n = rmap.degree
    u, v = quad.homogeneous
    mon = _forms(rmap.coeffs, n, u, v)
    P, Q = _binary(rmap.coeffs, mon, n)
    D = np.atleast_2d(np.asarray(directions, dtype=complex))
    dP = mon @ D[:, : n + 1].T
    dQ = mon @ D[:, n + 1 :].T
    norm = np.abs(P) ** 2 + np.abs(Q) ** 2
    return (dP * Q[:, None] - P[:, None] * dQ) / norm[:, None]


def inner_products(
    rmap: RationalMap, directions, quad: SphereQuadrature | None = None, centre: bool = True
) -> np.ndarray:
    """Hermitian matrix H_kl = c * int T_k conj(T_l); the real metric is Re H.

    With ``centre`` a degree-1 map is first rotated in the domain so that its
    energy sits where the radial panels are graded (see :func:`centring_rotation`).
    """
    quad = quad or SphereQuadrature()
    rmap, directions = _centred(rmap, directions, centre)
    T = tangent_fields(rmap, directions, quad)
    wT = T * quad.weights[:, None]
    k = T.shape[1]
    H = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(i, k):
            H[i, j] = MEASURE_CONSTANT * np.sum(wT[:, i] * np.conj(T[:, j]))
            H[j, i] = np.conj(H[i, j])
        H[i, i] = H[i, i].real
    return H


def energy_density(rmap: RationalMap, quad: SphereQuadrature) -> np.ndarray:
    """|dW/dzeta|^2 / (1+|W|^2)^2 in chart coordinates."""
    n = rmap.degree
    u, v = quad.homogeneous
    k = np.arange(n + 1)
    mon = _forms(rmap.coeffs, n, u, v)
    P, Q = _binary(rmap.coeffs, mon, n)
    # derivative in the chart variable: d/du on the inner chart, d/dv on the outer
    with np.errstate(divide="ignore", invalid="ignore"):
        du = np.where(k > 0, k * u[:, None] ** np.maximum(k - 1, 0) * v[:, None] ** (n - k), 0)
        dv = np.where(
            n - k > 0, (n - k) * u[:, None] ** k * v[:, None] ** np.maximum(n - k - 1, 0), 0
        )
    dmon = np.where(quad.outer[:, None], dv, du)
    dP, dQ = _binary(rmap.coeffs, dmon, n)
    return np.abs(dP * Q - P * dQ) ** 2 / (np.abs(P) ** 2 + np.abs(Q) ** 2) ** 2


def _energy_once(rmap: RationalMap, quad: SphereQuadrature) -> float:
    z, a = quad._disk
    area = np.concatenate([a, a])
    # E = 1/2 int |d phi|^2 = 2 int |W'|^2/(1+|W|^2)^2 dx dy (identity map -> 2 pi)
    return float(2.0 * np.sum(area * energy_density(rmap, quad)))


def energy(
    rmap: RationalMap, quad: SphereQuadrature | None = None, tol: float | None = 1e-9, centre: bool = True
) -> float:
    """Harmonic map energy, normalized so that the identity map has energy 2 pi.

    With ``tol`` set, the value is compared with the doubled-order rule and an
    :class:`AccuracyError` is raised on disagreement.
    """
    quad = quad or SphereQuadrature()
    rmap, _ = _centred(rmap, np.zeros((1, 2 * rmap.degree + 2)), centre)
    e = _energy_once(rmap, quad)
    if tol is not None:
        e2 = _energy_once(rmap, quad.refined())
        if abs(e2 - e) > tol * max(1.0, abs(e2)):
            raise AccuracyError(
                f"energy quadrature not converged: {e} (order {quad.order}) vs {e2} "
                f"(order {2 * quad.order})"
            )
        e = e2
    return e


@dataclass(frozen=True)
class MetricMatrix:
    matrix: np.ndarray
    base: RationalMap
    order: int
    pivot: int
    measure_constant: float = MEASURE_CONSTANT

    def inner(self, xi, eta) -> float:
        """Real metric on tangent vectors given by their complex b-components."""
        xi = np.asarray(xi, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        return float(np.real(xi @ self.matrix @ np.conj(eta)))

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def to_json(self) -> dict:
        return {
            "degree": self.base.degree,
            "pivot": self.pivot,
            "quadrature_order": self.order,
            "measure_constant": self.measure_constant,
            "base_coefficients": [[c.real, c.imag] for c in self.base.coeffs],
            "real": self.matrix.real.tolist(),
            "imag": self.matrix.imag.tolist(),
        }


def _chart_directions(rmap: RationalMap, pivot: int) -> tuple[RationalMap, np.ndarray]:
    size = rmap.coeffs.size
    pivot = pivot % size
    a = rmap.coeffs
    if abs(a[pivot]) < 1e-12 * np.max(np.abs(a)):
        raise InvalidInputError(
            f"coefficient {pivot} vanishes; choose another pivot or rotate the target"
        )
    base = rmap.scaled(1.0 / a[pivot])
    others = [i for i in range(size) if i != pivot]
    return base, np.eye(size, dtype=complex)[others]


def l2_metric_matrix(
    rmap: RationalMap,
    quad: SphereQuadrature | None = None,
    pivot: int = -1,
    degeneracy_tol: float = 1e-10,
) -> MetricMatrix:
    """gamma_{alpha beta} in the inhomogeneous coordinates b = a / a[pivot]."""
    if not is_valid_degree(rmap, degeneracy_tol):
        raise DegeneracyError("base map is too close to the degeneracy set")
    quad = quad or SphereQuadrature()
    base, dirs = _chart_directions(rmap, pivot)
    H = inner_products(base, dirs, quad)
    return MetricMatrix(H, base, quad.order, pivot % rmap.coeffs.size)


def kaehler_symmetry_residual(
    rmap: RationalMap,
    step: float = 1e-4,
    quad: SphereQuadrature | None = None,
    pivot: int = -1,
) -> float:
    """Max violation of d_delta gamma_{alpha beta} = d_alpha gamma_{delta beta} (and conjugate).

    Partial derivatives are central differences of :func:`l2_metric_matrix`.
    """
    if step < 1e-7:
        raise AccuracyError("finite-difference step is below the quadrature noise floor")
    quad = quad or SphereQuadrature()
    metric = l2_metric_matrix(rmap, quad, pivot)
    base = metric.base
    p = metric.pivot
    others = [i for i in range(base.coeffs.size) if i != p]
    m = len(others)
    dz = np.empty((m, m, m), dtype=complex)  # [delta, alpha, beta]
    dzbar = np.empty((m, m, m), dtype=complex)
    for d, idx in enumerate(others):
        partial = []
        for e in (1.0, 1j):
            plus = base.coeffs.copy()
            minus = base.coeffs.copy()
            plus[idx] += e * step
            minus[idx] -= e * step
            gp = l2_metric_matrix(RationalMap(base.degree, plus), quad, p).matrix
            gm = l2_metric_matrix(RationalMap(base.degree, minus), quad, p).matrix
            partial.append((gp - gm) / (2 * step))
        dx, dy = partial
        dz[d] = (dx - 1j * dy) / 2
        dzbar[d] = (dx + 1j * dy) / 2
    # holomorphic condition: d_delta g_{a b} = d_a g_{delta b}
    r1 = np.abs(dz - np.transpose(dz, (1, 0, 2)))
    # antiholomorphic: d_{bar delta} g_{a b} = d_{bar b} g_{a delta}
    r2 = np.abs(dzbar - np.transpose(dzbar, (2, 1, 0)))
    return float(max(r1.max(), r2.max()))


# ---------------------------------------------------------------------------
# The moving frame at W_lambda
# ---------------------------------------------------------------------------
FRAME_LABELS = ("dlam1", "dlam2", "dlam3", "theta1", "theta2", "theta3")


def frame_matrix_tangents(lam: float, left=None, right=None) -> tuple[np.ndarray, np.ndarray]:
    """Base matrix M and the six matrix tangents of the frame at W_lambda.

    The frame is (d/dlam_a, theta_a): derivatives of lam_a -> [Lambda I + lam.tau]
    and of t -> [exp(i t tau_a / 2) M_lambda].  Optional (L, R) pushes both the
    base point and the tangents forward by M -> L M R.
    """
    lam = float(lam)
    if lam < 0:
        raise InvalidInputError("lambda must be non-negative")
    Lam = np.sqrt(1 + lam * lam)
    M = Lam * np.eye(2) + lam * PAULI[2]
    tangents = []
    lam_vec = np.array([0.0, 0.0, lam])
    for a in range(3):
        tangents.append(lam_vec[a] / Lam * np.eye(2) + PAULI[a])
    for a in range(3):
        tangents.append(0.5j * PAULI[a] @ M)
    T = np.array(tangents, dtype=complex)
    if left is not None or right is not None:
        L = np.eye(2) if left is None else np.asarray(left, dtype=complex)
        R = np.eye(2) if right is None else np.asarray(right, dtype=complex)
        M = L @ M @ R
        T = np.einsum("ij,kjl,lm->kim", L, T, R)
    return M, T


def _matrix_to_coeffs(m: np.ndarray) -> np.ndarray:
    """2x2 matrices (..., 2, 2) to coefficient vectors in the map ordering."""
    return np.stack([m[..., 0, 1], m[..., 0, 0], m[..., 1, 1], m[..., 1, 0]], axis=-1)


def frame_coefficient_directions(lam: float, left=None, right=None):
    M, T = frame_matrix_tangents(lam, left, right)
    return RationalMap.from_matrix(M), _matrix_to_coeffs(T)


def frame_tangents_at_Wlambda(lam: float) -> np.ndarray:
    """(6, 3) complex b-components of the frame, in the chart b = (a12, a21, a22) / a11."""
    M, T = frame_matrix_tangents(lam)
    a11 = M[0, 0]
    entries = [(0, 1), (1, 0), (1, 1)]
    out = np.empty((6, 3), dtype=complex)
    for k in range(6):
        for c, (i, j) in enumerate(entries):
            out[k, c] = (T[k, i, j] * a11 - M[i, j] * T[k, 0, 0]) / a11**2
    return out


def frame_gram_quadrature(lam: float, quad: SphereQuadrature | None = None, left=None, right=None) -> np.ndarray:
    """6x6 real Gram matrix of the frame at W_lambda (or its image under (L, R))."""
    base, dirs = frame_coefficient_directions(lam, left, right)
    return inner_products(base, dirs, quad).real
