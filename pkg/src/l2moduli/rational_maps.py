"""Rational maps S^2 -> S^2, the Moebius group and its polar decomposition.

A degree-n map is stored as its coefficient vector ``a`` of length 2n+2 in the
ordering

    W(z) = (a[0] + a[1] z + ... + a[n] z^n) / (a[n+1] + a[n+2] z + ... + a[2n+1] z^n),

which is a point of CP^{2n+1}.  Points of the Riemann sphere are Python/numpy
complex numbers with ``INFINITY`` standing for the point at infinity.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, InvalidInputError

INFINITY = complex(np.inf, 0.0)

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
IDENTITY2 = np.eye(2, dtype=complex)


# ---------------------------------------------------------------------------
# Riemann sphere helpers
# ---------------------------------------------------------------------------
def is_infinite(z) -> np.ndarray | bool:
    return np.isinf(np.real(z)) | np.isinf(np.imag(z))


def reciprocal(z):
    """1/z on the sphere (1/0 = inf, 1/inf = 0)."""
    z = np.asarray(z, dtype=complex)
    inf = is_infinite(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(z == 0, INFINITY, 1.0 / np.where(z == 0, 1.0, z))
    out = np.where(inf, 0.0, out)
    return out[()] if out.ndim == 0 else out


def antipode(z):
    """The antipodal map z -> -1/conj(z)."""
    return -np.conj(reciprocal(z))


def chordal_distance(w1, w2):
    """Chordal distance on the unit sphere; lies in [0, 2] and handles infinity."""
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    i1, i2 = is_infinite(w1), is_infinite(w2)
    a = np.where(i1, 0.0, w1)
    b = np.where(i2, 0.0, w2)
    finite = 2 * np.abs(a - b) / np.sqrt((1 + abs(a) ** 2) * (1 + abs(b) ** 2))
    one_inf = 2 / np.sqrt(1 + np.abs(np.where(i1, b, a)) ** 2)
    out = np.where(i1 & i2, 0.0, np.where(i1 | i2, one_inf, finite))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Rational maps
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RationalMap:
    degree: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=complex).reshape(-1)
        if self.degree < 1:
            raise InvalidInputError("degree must be a positive integer")
        if a.size != 2 * self.degree + 2:
            raise InvalidInputError(
                f"degree {self.degree} needs {2 * self.degree + 2} coefficients, got {a.size}"
            )
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("coefficients must be finite")
        if not np.any(a != 0):
            raise InvalidInputError("zero coefficient vector")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_polynomials(cls, numerator, denominator, degree: int | None = None) -> "RationalMap":
        """Build from ascending-power coefficient lists, zero padded to ``degree``."""
        num = list(numerator)
        den = list(denominator)
        n = degree if degree is not None else max(len(num), len(den)) - 1
        if len(num) > n + 1 or len(den) > n + 1:
            raise InvalidInputError("polynomial longer than declared degree")
        num += [0] * (n + 1 - len(num))
        den += [0] * (n + 1 - len(den))
        return cls(n, np.array(num + den, dtype=complex))

    @classmethod
    def identity(cls) -> "RationalMap":
        return cls(1, np.array([0, 1, 1, 0], dtype=complex))

    @classmethod
    def power(cls, n: int, scale: complex = 1.0) -> "RationalMap":
        """z -> scale * z^n."""
        a = np.zeros(2 * n + 2, dtype=complex)
        a[n] = scale
        a[n + 1] = 1.0
        return cls(n, a)

    @classmethod
    def from_matrix(cls, m) -> "RationalMap":
        """Moebius map z -> (m00 z + m01) / (m10 z + m11)."""
        m = np.asarray(m, dtype=complex)
        return cls(1, np.array([m[0, 1], m[0, 0], m[1, 1], m[1, 0]]))

    @classmethod
    def from_json(cls, text: str) -> "RationalMap":
        data = json.loads(text) if isinstance(text, str) else text
        coeffs = [complex(re, im) for re, im in data["coefficients"]]
        return cls(int(data["degree"]), np.array(coeffs))

    def to_json(self) -> str:
        return json.dumps(
            {
                "degree": self.degree,
                "coefficients": [[float(c.real), float(c.imag)] for c in self.coeffs],
            }
        )

    # -- accessors ---------------------------------------------------------
    @property
    def numerator(self) -> np.ndarray:
        return self.coeffs[: self.degree + 1]

    @property
    def denominator(self) -> np.ndarray:
        return self.coeffs[self.degree + 1 :]

    def to_matrix(self) -> np.ndarray:
        if self.degree != 1:
            raise InvalidInputError("only degree-1 maps have a Moebius matrix")
        a = self.coeffs
        return np.array([[a[1], a[0]], [a[3], a[2]]])

    def scaled(self, xi: complex) -> "RationalMap":
        return RationalMap(self.degree, xi * self.coeffs)

    def normalized(self) -> "RationalMap":
        """Representative with unit max-modulus coefficient."""
        return self.scaled(1.0 / np.max(np.abs(self.coeffs)))

    # -- evaluation --------------------------------------------------------
    def homogeneous(self, u, v):
        """Numerator and denominator as binary forms at (u : v)."""
        n = self.degree
        k = np.arange(n + 1)
        u = np.asarray(u, dtype=complex)[..., None]
        v = np.asarray(v, dtype=complex)[..., None]
        monomials = u**k * v ** (n - k)
        return monomials @ self.numerator, monomials @ self.denominator

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z):
        """dW/dz at finite z (infinite where W has a pole)."""
        z = np.asarray(z, dtype=complex)
        p = np.polynomial.polynomial
        P, Q = p.polyval(z, self.numerator), p.polyval(z, self.denominator)
        dP = p.polyval(z, p.polyder(self.numerator)) if self.degree else 0
        dQ = p.polyval(z, p.polyder(self.denominator))
        with np.errstate(divide="ignore", invalid="ignore"):
            return (dP * Q - P * dQ) / Q**2

    def equivalent(self, other: "RationalMap", tol: float = 1e-12, grid=None) -> bool:
        """Equality of maps (not of coefficient vectors), by chordal distance."""
        if self.degree != other.degree:
            return False
        return map_distance(self, other, grid) <= tol


def evaluate(rmap: RationalMap, z):
    """W(z) on the Riemann sphere; poles give INFINITY, z = INFINITY is allowed."""
    z = np.asarray(z, dtype=complex)
    inf = is_infinite(z)
    zz = np.where(inf, 0.0, z)
    P, Q = rmap.homogeneous(zz, np.ones_like(zz))
    # (1 : 0) is the point at infinity
    Pi, Qi = rmap.numerator[-1], rmap.denominator[-1]
    P = np.where(inf, Pi, P)
    Q = np.where(inf, Qi, Q)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(Q == 0, INFINITY, P / np.where(Q == 0, 1.0, Q))
    return w[()] if w.ndim == 0 else w


def sample_grid(count: int = 200, seed: int = 0) -> np.ndarray:
    """Deterministic sample points spread over the sphere (finite, nonzero)."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(count, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    # stereographic projection from the north pole
    return (x[:, 0] + 1j * x[:, 1]) / (1 - x[:, 2])


def map_distance(m1: RationalMap, m2: RationalMap, grid=None) -> float:
    grid = sample_grid() if grid is None else grid
    return float(np.max(chordal_distance(evaluate(m1, grid), evaluate(m2, grid))))


def homogeneous_resultant(f, g) -> complex:
    """Resultant of two binary forms of the same formal degree (Sylvester determinant).

    ``f`` and ``g`` are ascending-power coefficient lists of length n+1.  The value
    vanishes iff the forms share a root on CP^1, including the root at infinity.
    """
    n = len(f) - 1
    if n == 0:
        return complex(f[0] * 0 + 1)
    fd = np.asarray(f, dtype=complex)[::-1]
    gd = np.asarray(g, dtype=complex)[::-1]
    S = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        S[i, i : i + n + 1] = fd
        S[n + i, i : i + n + 1] = gd
    return complex(np.linalg.det(S))


def is_valid_degree(rmap: RationalMap, tol: float = 1e-10) -> bool:
    """True iff the map has true degree n at the scale-free threshold ``tol``."""
    a = rmap.normalized().coeffs
    n = rmap.degree
    if abs(a[n]) < tol and abs(a[-1]) < tol:
        return False
    return abs(homogeneous_resultant(a[: n + 1], a[n + 1 :])) > tol


def require_valid(rmap: RationalMap, tol: float = 1e-10) -> None:
    if not is_valid_degree(rmap, tol):
        raise DegeneracyError("map is numerically degenerate (numerator and denominator share a root)")


# ---------------------------------------------------------------------------
# Moebius group and polar decomposition
# ---------------------------------------------------------------------------
def _canonical_sign(u: np.ndarray) -> np.ndarray:
    """Choose the representative of {U, -U} fixed by the documented tie-break."""
    for entry in (u[0, 0], u[0, 1]):
        if abs(entry.real) > 1e-15:
            return u if entry.real > 0 else -u
        if abs(entry.imag) > 1e-15:
            return u if entry.imag > 0 else -u
    return u


def to_su2(u) -> np.ndarray:
    """Rescale a unitary (or any invertible) 2x2 matrix to determinant one."""
    u = np.asarray(u, dtype=complex)
    d = np.linalg.det(u)
    if abs(d) == 0:
        raise InvalidInputError("singular matrix")
    return u / cmath.sqrt(d)


def rotation_of(r) -> np.ndarray:
    """SO(3) matrix R_ab = tr(tau_a R^dagger tau_b R) / 2 of a unitary R."""
    r = to_su2(r)
    rd = r.conj().T
    out = np.einsum("aij,jk,bkl,li->ab", PAULI, rd, PAULI, r) / 2
    return out.real


def su2_exp(vec) -> np.ndarray:
    """exp(i v.tau / 2) for a real 3-vector v."""
    v = np.asarray(vec, dtype=float)
    angle = np.linalg.norm(v)
    if angle == 0:
        return IDENTITY2.copy()
    n = v / angle
    return np.cos(angle / 2) * IDENTITY2 + 1j * np.sin(angle / 2) * np.einsum("a,aij->ij", n, PAULI)


@dataclass(frozen=True)
class MoebiusPolar:
    """Polar data ([U], lambda) of a Moebius map, M ~ U (Lambda I + lambda.tau)."""

    unitary: np.ndarray
    shape: np.ndarray

    @property
    def lam(self) -> float:
        return float(np.linalg.norm(self.shape))

    @property
    def Lam(self) -> float:
        return float(np.sqrt(1.0 + self.lam**2))

    @property
    def mu(self) -> float:
        return (self.Lam + self.lam) ** 2

    def hermitian_factor(self) -> np.ndarray:
        return self.Lam * IDENTITY2 + np.einsum("a,aij->ij", self.shape, PAULI)

    def to_matrix(self) -> np.ndarray:
        return self.unitary @ self.hermitian_factor()

    def to_map(self) -> RationalMap:
        return RationalMap.from_matrix(self.to_matrix())


def polar_decompose(m) -> MoebiusPolar:
    """Polar decomposition of a projective class of invertible 2x2 matrices."""
    m = np.asarray(m, dtype=complex)
    d = np.linalg.det(m)
    if abs(d) <= 1e-14 * np.max(np.abs(m)) ** 2:
        raise InvalidInputError("matrix is singular")
    m = m / cmath.sqrt(d)
    x = m.conj().T @ m
    # positive square root of a 2x2 positive matrix with unit determinant
    h = (x + IDENTITY2) / np.sqrt(np.trace(x).real + 2.0)
    h = (h + h.conj().T) / 2
    shape = np.array([np.trace(t @ h).real / 2 for t in PAULI])
    lam = np.linalg.norm(shape)
    h = np.sqrt(1 + lam**2) * IDENTITY2 + np.einsum("a,aij->ij", shape, PAULI)
    u = m @ (np.trace(h).real * IDENTITY2 - h)  # h^{-1} = adj(h) since det h = 1
    u = to_su2(u)
    return MoebiusPolar(_canonical_sign(u), shape)


def projective_residual(m1, m2) -> float:
    """Distance between the projective classes of two invertible 2x2 matrices."""
    a = to_su2(m1)
    b = to_su2(m2)
    scale = max(np.max(np.abs(a)), 1.0)
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) / scale)


def g0_act(left, right, p: MoebiusPolar) -> MoebiusPolar:
    """Action of ([L], [R]) in PU(2) x PU(2): ([U], lam) -> ([L U R], R lam)."""
    u = to_su2(left) @ p.unitary @ to_su2(right)
    return MoebiusPolar(_canonical_sign(to_su2(u)), rotation_of(right) @ p.shape)


def compose(m1: RationalMap, m2: RationalMap) -> RationalMap:
    """m1 o m2 for degree-1 maps (matrix product)."""
    return RationalMap.from_matrix(m1.to_matrix() @ m2.to_matrix())


def w_lambda(lam: float) -> RationalMap:
    """Base point z -> mu(lambda) z on the radial curve."""
    lam = float(lam)
    return RationalMap.power(1, (np.sqrt(1 + lam * lam) + lam) ** 2)


# ---------------------------------------------------------------------------
# The antipodal involution and RP^2 equivariance
# ---------------------------------------------------------------------------
def antipodal_involution(rmap: RationalMap) -> RationalMap:
    """W -> p o W o p with p(z) = -1/conj(z), acting on coefficients."""
    n = rmap.degree
    a = np.conj(rmap.coeffs)
    num, den = a[: n + 1], a[n + 1 :]
    j = np.arange(n + 1)
    sign = (-1.0) ** (n - j)
    # new numerator z^j:  (-1)^(n-j) conj(den[n-j]); new denominator: -(-1)^(n-j) conj(num[n-j])
    new_num = sign * den[::-1]
    new_den = -sign * num[::-1]
    return RationalMap(n, np.concatenate([new_num, new_den]))


def check_rp2_equivariance(rmap: RationalMap, grid=None) -> float:
    """Max chordal distance between W(p(z)) and p(W(z)) over ``grid``.

    A residual at round-off level certifies (at sample resolution) that the map
    descends to RP^2 -> RP^2.
    """
    grid = sample_grid() if grid is None else np.asarray(grid, dtype=complex)
    lhs = evaluate(rmap, antipode(grid))
    rhs = antipode(evaluate(rmap, grid))
    return float(np.max(chordal_distance(lhs, rhs)))
