"""Truncated Taylor jets.

A :class:`Jet` stores Taylor coefficients ``a_k = f^(k)(t0) / k!`` for
``k = 0..order``.  Coefficient arrays have shape ``(order + 1, *batch)`` so a
single jet can carry many expansion points at once; every operation
broadcasts over the trailing batch dimensions.

Binary operations truncate to the smaller of the two orders, so the order of
a derived quantity always reports how many of its coefficients are exact.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .errors import DomainError

ORDER = 4
DIV_EPS = 1e-13

Number = Union[float, int, np.floating, np.ndarray]


def _kcol(m: int, ndim: int) -> np.ndarray:
    return np.arange(m, dtype=float).reshape((m,) + (1,) * (ndim - 1))


class Jet:
    """Truncated Taylor expansion in one parameter."""

    __slots__ = ("c",)
    __array_priority__ = 1000  # keep numpy scalars from hijacking operators

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    # -- construction ------------------------------------------------------
    @classmethod
    def variable(cls, t0, order: int = ORDER) -> "Jet":
        """Jet of the identity map expanded at ``t0``."""
        t0 = np.asarray(t0, dtype=float)
        c = np.zeros((order + 1,) + t0.shape)
        c[0] = t0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int = ORDER, shape=()) -> "Jet":
        value = np.broadcast_to(np.asarray(value, dtype=float), shape)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def from_derivatives(cls, derivs) -> "Jet":
        """Build a jet from raw derivative values ``f, f', f'', ...``."""
        d = np.asarray(derivs, dtype=float)
        fact = np.array([math.factorial(k) for k in range(d.shape[0])], dtype=float)
        return cls(d / fact.reshape((-1,) + (1,) * (d.ndim - 1)))

    # -- introspection -----------------------------------------------------
    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.c.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        """Raw derivatives ``f^(k)(t0)`` for k = 0..order."""
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def __repr__(self) -> str:
        return f"Jet({self.c.tolist()})"

    # -- calculus ----------------------------------------------------------
    def deriv(self) -> "Jet":
        """Jet of the derivative; the order drops by one."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        m = self.order + 1
        return Jet(self.c[1:] * _kcol(m, self.c.ndim)[1:])

    def integrate(self, c0) -> "Jet":
        """Antiderivative with value ``c0`` at the expansion point."""
        m = self.order + 1
        c = np.empty((m + 1,) + self.shape)
        c[0] = c0
        c[1:] = self.c / _kcol(m + 1, self.c.ndim)[1:]
        return Jet(c)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.c[: order + 1])

    def shift(self, dt) -> "Jet":
        """Re-expand the truncated polynomial about ``t0 + dt``."""
        m = self.order + 1
        out = np.zeros_like(self.c)
        for j in range(m):
            for k in range(j, m):
                out[j] = out[j] + self.c[k] * math.comb(k, j) * dt ** (k - j)
        return Jet(out)

    def select(self, mask, other: "Jet") -> "Jet":
        """Batch-wise choice: ``self`` where mask is true, else ``other``."""
        m = min(self.order, other.order) + 1
        return Jet(np.where(mask, self.c[:m], other.c[:m]))

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            m = min(self.order, other.order) + 1
            return self.c[:m], other.c[:m]
        return None

    def __neg__(self) -> "Jet":
        return Jet(-self.c)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        pair = self._coerce(other)
        if pair is None:
            c = self.c.copy()
            c[0] = c[0] + other
            return Jet(c)
        return Jet(pair[0] + pair[1])

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        pair = self._coerce(other)
        if pair is None:
            c = self.c.copy()
            c[0] = c[0] - other
            return Jet(c)
        return Jet(pair[0] - pair[1])

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        pair = self._coerce(other)
        if pair is None:
            return Jet(self.c * other)
        a, b = pair
        c = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(a.shape[0]):
            for j in range(k + 1):
                c[k] = c[k] + a[j] * b[k - j]
        return Jet(c)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def reciprocal(self) -> "Jet":
        b = self.c
        if np.any(np.abs(b[0]) <= DIV_EPS):
            raise DomainError("division by a jet with vanishing value")
        c = np.zeros_like(b)
        c[0] = 1.0 / b[0]
        for k in range(1, b.shape[0]):
            acc = 0.0
            for j in range(1, k + 1):
                acc = acc + b[j] * c[k - j]
            c[k] = -acc / b[0]
        return Jet(c)

    def __pow__(self, p) -> "Jet":
        if isinstance(p, Jet):
            raise TypeError("jet exponents must be constants")
        p = float(p)
        if p.is_integer():
            n = int(p)
            if n == 0:
                return Jet.constant(1.0, self.order, self.shape)
            base = self if n > 0 else self.reciprocal()
            return _ipow(base, abs(n))
        if np.any(self.c[0] <= 0.0):
            raise DomainError("non-integer power of a non-positive value")
        return exp(log(self) * p)


def _ipow(x: Jet, n: int) -> Jet:
    result = None
    sq = x
    while n:
        if n & 1:
            result = sq if result is None else result * sq
        n >>= 1
        if n:
            sq = sq * sq
    return result


# -- elementary functions ----------------------------------------------------


def exp(a: Jet) -> Jet:
    x = a.c
    with np.errstate(over="raise"):
        try:
            b0 = np.exp(x[0])
        except FloatingPointError as err:
            raise DomainError("exp overflow") from err
    c = np.zeros_like(x)
    c[0] = b0
    for k in range(1, x.shape[0]):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + j * x[j] * c[k - j]
        c[k] = acc / k
    return Jet(c)


def log(a: Jet) -> Jet:
    x = a.c
    if np.any(x[0] <= 0.0):
        raise DomainError("log of a non-positive value")
    c = np.zeros_like(x)
    c[0] = np.log(x[0])
    for k in range(1, x.shape[0]):
        acc = 0.0
        for j in range(1, k):
            acc = acc + j * c[j] * x[k - j]
        c[k] = (x[k] - acc / k) / x[0]
    return Jet(c)


def sqrt(a: Jet) -> Jet:
    x = a.c
    if a.order == 0:
        if np.any(x[0] < 0.0):
            raise DomainError("sqrt of a negative value")
        return Jet(np.sqrt(x))
    if np.any(x[0] <= 0.0):
        raise DomainError("sqrt of a non-positive value")
    c = np.zeros_like(x)
    c[0] = np.sqrt(x[0])
    for k in range(1, x.shape[0]):
        acc = 0.0
        for j in range(1, k):
            acc = acc + c[j] * c[k - j]
        c[k] = (x[k] - acc) / (2.0 * c[0])
    return Jet(c)


def _sincos(a: Jet, hyperbolic: bool) -> tuple[Jet, Jet]:
    x = a.c
    s = np.zeros_like(x)
    co = np.zeros_like(x)
    if hyperbolic:
        s[0], co[0] = np.sinh(x[0]), np.cosh(x[0])
    else:
        s[0], co[0] = np.sin(x[0]), np.cos(x[0])
    sign = 1.0 if hyperbolic else -1.0
    for k in range(1, x.shape[0]):
        acc_s = 0.0
        acc_c = 0.0
        for j in range(1, k + 1):
            acc_s = acc_s + j * x[j] * co[k - j]
            acc_c = acc_c + j * x[j] * s[k - j]
        s[k] = acc_s / k
        co[k] = sign * acc_c / k
    return Jet(s), Jet(co)


def sin(a: Jet) -> Jet:
    return _sincos(a, False)[0]


def cos(a: Jet) -> Jet:
    return _sincos(a, False)[1]


def tan(a: Jet) -> Jet:
    s, c = _sincos(a, False)
    return s / c


def sinh(a: Jet) -> Jet:
    return _sincos(a, True)[0]


def cosh(a: Jet) -> Jet:
    return _sincos(a, True)[1]


def atan2(y: Jet, x: Jet) -> Jet:
    """Angle jet; the value is the principal branch of ``arctan2``."""
    r2 = x * x + y * y
    if np.any(r2.value <= DIV_EPS**2):
        raise DomainError("atan2 of a vanishing vector")
    if min(x.order, y.order) == 0:
        return Jet.constant(np.arctan2(y.value, x.value), 0, np.broadcast_shapes(x.shape, y.shape))
    rate = (x * y.deriv() - y * x.deriv()) / r2.truncate(min(x.order, y.order) - 1)
    return rate.integrate(np.arctan2(y.value, x.value))


# -- 3-vectors of jets -------------------------------------------------------

Vec = tuple  # (Jet, Jet, Jet)


def vdot(a: Vec, b: Vec) -> Jet:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a: Vec, b: Vec) -> Vec:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def vscale(a: Vec, s) -> Vec:
    return (a[0] * s, a[1] * s, a[2] * s)


def vadd(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vnorm(a: Vec) -> Jet:
    return sqrt(vdot(a, a))


def vderiv(a: Vec) -> Vec:
    return (a[0].deriv(), a[1].deriv(), a[2].deriv())


def vtruncate(a: Vec, order: int) -> Vec:
    return tuple(x.truncate(min(order, x.order)) for x in a)


def vvalue(a: Vec) -> np.ndarray:
    """Order-0 values stacked on a trailing axis of length 3."""
    return np.stack([np.broadcast_to(x.value, np.broadcast_shapes(*(y.shape for y in a))) for x in a], axis=-1)
