"""Truncated Taylor arithmetic used for exact derivatives of coefficient functions.

A :class:`Jet` holds normalized Taylor coefficients ``c[k] = f^(k)(x0) / k!`` of a
function about a base point, truncated at a fixed order.  Coefficients may carry
trailing array dimensions, so a single jet evaluates a whole grid at once.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @classmethod
    def variable(cls, x0, order: int) -> "Jet":
        x0 = np.asarray(x0, dtype=float)
        c = np.zeros((order + 1,) + x0.shape)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, shape=()) -> "Jet":
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivative(self, k: int) -> np.ndarray:
        """k-th derivative at the base point."""
        return math.factorial(k) * self.c[k]

    def derivatives(self) -> list[np.ndarray]:
        return [self.derivative(k) for k in range(self.order + 1)]

    def differentiate(self) -> "Jet":
        """Jet of the derivative (one order lower)."""
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * k)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.c[: order + 1])

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        c = np.zeros_like(self.c)
        c[0] = other
        return Jet(c)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        a, b = self.c, other.c
        if a.shape != b.shape:
            a, b = np.broadcast_arrays(a, b)
        # Cauchy product, one shifted multiply-add per order
        out = a[0] * b
        for j in range(1, a.shape[0]):
            out[j:] += a[j] * b[: a.shape[0] - j]
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.c
        out = np.zeros(a.shape)
        out[0] = 1.0 / a[0]
        for k in range(1, a.shape[0]):
            out[k] = -sum(a[j] * out[k - j] for j in range(1, k + 1)) / a[0]
        return Jet(out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(1.0, self.order, self.c.shape[1:])
        for _ in range(n):
            out = out * self
        return out


def _compose(outer_derivs, inner: Jet) -> Jet:
    """Jet of ``g(inner)`` given ``g^(k)`` evaluated at ``inner.value``."""
    d = inner - inner.value
    out = Jet.constant(0.0, inner.order, inner.c.shape[1:])
    power = Jet.constant(1.0, inner.order, inner.c.shape[1:])
    for k, gk in enumerate(outer_derivs[: inner.order + 1]):
        out = out + power * (gk / math.factorial(k))
        power = power * d
    return out


def compose(outer_derivs, inner: Jet) -> Jet:
    """Public form of Faa di Bruno composition; ``outer_derivs[k]`` is g^(k)."""
    return _compose(list(outer_derivs), inner)


def exp(x: Jet) -> Jet:
    e = np.exp(x.value)
    return _compose([e] * (x.order + 1), x)


def log(x: Jet) -> Jet:
    v = x.value
    derivs = [np.log(v)]
    for k in range(1, x.order + 1):
        derivs.append((-1) ** (k - 1) * math.factorial(k - 1) / v**k)
    return _compose(derivs, x)


def sqrt(x: Jet) -> Jet:
    v = x.value
    derivs = []
    coef = 1.0
    for k in range(x.order + 1):
        derivs.append(coef * v ** (0.5 - k))
        coef *= 0.5 - k
    return _compose(derivs, x)


def sinh(x: Jet) -> Jet:
    s, c = np.sinh(x.value), np.cosh(x.value)
    return _compose([s if k % 2 == 0 else c for k in range(x.order + 1)], x)


def cosh(x: Jet) -> Jet:
    s, c = np.sinh(x.value), np.cosh(x.value)
    return _compose([c if k % 2 == 0 else s for k in range(x.order + 1)], x)


def asinh(x: Jet) -> Jet:
    return log(x + sqrt(x * x + 1.0))


def polyval_even(coeffs, x: Jet) -> Jet:
    """Evaluate ``sum_k coeffs[k] * x**(2k)`` by Horner's rule in ``x*x``."""
    u = x * x
    out = Jet.constant(coeffs[-1], x.order, x.c.shape[1:])
    for a in coeffs[-2::-1]:
        out = out * u + a
    return out
