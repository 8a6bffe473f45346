"""Truncated Taylor jets in one variable.

A jet of order ``m`` at ``center`` stores the true derivatives
``f(center), f'(center), ..., f^(m)(center)`` (not Taylor coefficients).
Products therefore use the Leibniz rule with binomial weights, and the
elementary functions are propagated with recurrences written directly in
derivative space.

Binary operations on jets of different order truncate to the smaller order.
Plain floats and ints are promoted to constant jets.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import CenterMismatch, DivisionNearZero, DomainError, OrderTooLow

EPS_DIV = 1e-12
CENTER_TOL = 1e-9


def max_order(n: int) -> int:
    """Largest jet order the curve machinery requests in dimension ``n``."""
    return 2 * n + 2


@lru_cache(maxsize=None)
def _binom_table(m: int) -> np.ndarray:
    table = np.zeros((m + 1, m + 1))
    for k in range(m + 1):
        for j in range(k + 1):
            table[k, j] = math.comb(k, j)
    return table


@lru_cache(maxsize=None)
def _leibniz_plan(m: int):
    # flattened (j, k-j) index pairs with weight C(k, j), scattered back onto k
    js, kjs, ks, ws = [], [], [], []
    for k in range(m + 1):
        for j in range(k + 1):
            js.append(j)
            kjs.append(k - j)
            ks.append(k)
            ws.append(math.comb(k, j))
    scatter = np.zeros((len(ks), m + 1))
    scatter[np.arange(len(ks)), ks] = 1.0
    return np.array(js), np.array(kjs), np.array(ws, dtype=float), scatter


def leibniz(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Derivatives of a product; ``a`` and ``b`` share the trailing length."""
    m = a.shape[-1] - 1
    js, kjs, ws, scatter = _leibniz_plan(m)
    return (a[..., js] * b[..., kjs] * ws) @ scatter


def _recip_derivs(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1] - 1
    C = _binom_table(m)
    b = np.zeros_like(a)
    inv = 1.0 / a[..., 0]
    b[..., 0] = inv
    for k in range(1, m + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + C[k, j] * a[..., j] * b[..., k - j]
        b[..., k] = -inv * acc
    return b


def _sqrt_derivs(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1] - 1
    C = _binom_table(m)
    b = np.zeros_like(a)
    b[..., 0] = np.sqrt(a[..., 0])
    for k in range(1, m + 1):
        acc = 0.0
        for j in range(1, k):
            acc = acc + C[k, j] * b[..., j] * b[..., k - j]
        b[..., k] = (a[..., k] - acc) / (2.0 * b[..., 0])
    return b


def _sincos_derivs(a: np.ndarray):
    # s' = c a', c' = -s a'
    m = a.shape[-1] - 1
    C = _binom_table(m)
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[..., 0] = np.sin(a[..., 0])
    c[..., 0] = np.cos(a[..., 0])
    for k in range(1, m + 1):
        ds = 0.0
        dc = 0.0
        for j in range(k):
            w = C[k - 1, j] * a[..., k - j]
            ds = ds + w * c[..., j]
            dc = dc - w * s[..., j]
        s[..., k] = ds
        c[..., k] = dc
    return s, c


def _exp_derivs(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1] - 1
    C = _binom_table(m)
    e = np.zeros_like(a)
    e[..., 0] = np.exp(a[..., 0])
    for k in range(1, m + 1):
        acc = 0.0
        for j in range(k):
            acc = acc + C[k - 1, j] * e[..., j] * a[..., k - j]
        e[..., k] = acc
    return e


def _check_centers(x: float, y: float) -> None:
    if abs(x - y) > CENTER_TOL * max(1.0, abs(x), abs(y)):
        raise CenterMismatch(f"jet centers differ: {x!r} vs {y!r}")


class Jet:
    """Scalar jet: ``derivs[k]`` is the k-th derivative at ``center``."""

    __slots__ = ("center", "derivs")
    __array_priority__ = 1000  # make ndarray * Jet defer to Jet.__rmul__

    def __init__(self, center: float, derivs) -> None:
        d = np.array(derivs, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("jet derivatives must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(d)):
            raise DomainError(f"non-finite jet derivatives at center {center!r}")
        d.flags.writeable = False
        self.center = float(center)
        self.derivs = d

    @classmethod
    def constant(cls, value: float, center: float, order: int) -> "Jet":
        d = np.zeros(order + 1)
        d[0] = value
        return cls(center, d)

    @classmethod
    def variable(cls, center: float, order: int) -> "Jet":
        """The identity function ``t -> t`` expanded at ``center``."""
        d = np.zeros(order + 1)
        d[0] = center
        if order >= 1:
            d[1] = 1.0
        return cls(center, d)

    @property
    def order(self) -> int:
        return self.derivs.size - 1

    @property
    def value(self) -> float:
        return float(self.derivs[0])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderTooLow(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.center, self.derivs[: order + 1])

    def derivative(self) -> "Jet":
        if self.order == 0:
            raise OrderTooLow("cannot differentiate an order-0 jet")
        return Jet(self.center, self.derivs[1:])

    def _coerce(self, other):
        if isinstance(other, Jet):
            _check_centers(self.center, other.center)
            m = min(self.order, other.order)
            return self.derivs[: m + 1], other.derivs[: m + 1]
        if isinstance(other, (int, float, np.floating, np.integer)):
            d = np.zeros_like(self.derivs)
            d[0] = other
            return self.derivs, d
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return Jet(self.center, pair[0] + pair[1])

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.center, -self.derivs)

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return Jet(self.center, pair[0] - pair[1])

    def __rsub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return Jet(self.center, pair[1] - pair[0])

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.center, self.derivs * other)
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return Jet(self.center, leibniz(*pair))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if abs(other) <= EPS_DIV:
                raise DivisionNearZero(f"division by {other!r}")
            return Jet(self.center, self.derivs / other)
        if not isinstance(other, Jet):
            return NotImplemented
        return self * jet_reciprocal(other)

    def __rtruediv__(self, other):
        if not isinstance(other, (int, float, np.floating, np.integer)):
            return NotImplemented
        return jet_reciprocal(self) * other

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            if float(k) == 0.5:
                return jet_sqrt(self)
            raise TypeError("jets support integer powers and ** 0.5 only")
        if k < 0:
            return jet_reciprocal(self) ** (-k)
        out = Jet.constant(1.0, self.center, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __repr__(self) -> str:
        return f"Jet(center={self.center!r}, derivs={self.derivs.tolist()!r})"


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_reciprocal(a: Jet, eps: float = EPS_DIV) -> Jet:
    if abs(a.derivs[0]) <= eps:
        raise DivisionNearZero(
            f"reciprocal of a jet with value {a.value!r} at center {a.center!r}"
        )
    return Jet(a.center, _recip_derivs(a.derivs))


def jet_sqrt(a: Jet, eps: float = EPS_DIV) -> Jet:
    if a.derivs[0] <= eps:
        raise DomainError(f"sqrt of non-positive value {a.value!r}")
    return Jet(a.center, _sqrt_derivs(a.derivs))


def jet_sin(a: Jet) -> Jet:
    return Jet(a.center, _sincos_derivs(a.derivs)[0])


def jet_cos(a: Jet) -> Jet:
    return Jet(a.center, _sincos_derivs(a.derivs)[1])


def jet_sec(a: Jet, eps: float = EPS_DIV) -> Jet:
    c = _sincos_derivs(a.derivs)[1]
    if abs(c[0]) <= eps:
        raise DomainError(f"sec pole at argument {a.value!r}")
    return Jet(a.center, _recip_derivs(c))


def jet_tan(a: Jet, eps: float = EPS_DIV) -> Jet:
    s, c = _sincos_derivs(a.derivs)
    if abs(c[0]) <= eps:
        raise DomainError(f"tan pole at argument {a.value!r}")
    return Jet(a.center, leibniz(s, _recip_derivs(c)))


def jet_exp(a: Jet) -> Jet:
    return Jet(a.center, _exp_derivs(a.derivs))


def compose(outer_derivs, a: Jet) -> Jet:
    """Jet of ``f(a)`` given ``f, f', ..., f^(m)`` evaluated at ``a.value``.

    Sums the Taylor series of ``f`` in powers of ``a - a.value``; the powers
    vanish at the center so truncation at the jet order is exact.
    """
    m = a.order
    fd = np.asarray(outer_derivs, dtype=float)
    if fd.size < m + 1:
        raise OrderTooLow(f"need {m + 1} outer derivatives, got {fd.size}")
    delta = a.derivs.copy()
    delta[0] = 0.0
    out = np.zeros(m + 1)
    out[0] = fd[0]
    power = np.zeros(m + 1)
    power[0] = 1.0
    for k in range(1, m + 1):
        power = leibniz(power, delta)
        out += fd[k] / math.factorial(k) * power
    return Jet(a.center, out)


def _sinc_derivs_at(y: float, m: int) -> np.ndarray:
    # power series of sin(y)/y differentiated termwise; fine for |y| <= 1
    out = np.zeros(m + 1)
    for j in range(40):
        p = 2 * j
        coef = (-1.0) ** j / math.factorial(p + 1)
        for k in range(min(m, p) + 1):
            out[k] += coef * math.factorial(p) / math.factorial(p - k) * y ** (p - k)
    return out


def jet_sinc(a: Jet) -> Jet:
    """Jet of ``sin(a)/a``, regular through ``a = 0``."""
    if abs(a.value) > 0.5:
        return jet_sin(a) / a
    return compose(_sinc_derivs_at(a.value, a.order), a)


class JetVector:
    """A point of ``R^n`` with derivatives: ``derivs[i, k]`` is ``x_i^(k)``."""

    __slots__ = ("center", "derivs")

    def __init__(self, center: float, derivs) -> None:
        d = np.array(derivs, dtype=float)
        if d.ndim != 2 or d.shape[1] == 0:
            raise ValueError("JetVector derivatives must have shape (n, m + 1)")
        if not np.all(np.isfinite(d)):
            raise DomainError(f"non-finite jet derivatives at center {center!r}")
        d.flags.writeable = False
        self.center = float(center)
        self.derivs = d

    @classmethod
    def from_jets(cls, jets) -> "JetVector":
        jets = list(jets)
        c = jets[0].center
        for j in jets[1:]:
            _check_centers(c, j.center)
        m = min(j.order for j in jets)
        return cls(c, np.stack([j.derivs[: m + 1] for j in jets]))

    @classmethod
    def constant(cls, vector, center: float, order: int) -> "JetVector":
        v = np.asarray(vector, dtype=float)
        d = np.zeros((v.size, order + 1))
        d[:, 0] = v
        return cls(center, d)

    @property
    def dimension(self) -> int:
        return self.derivs.shape[0]

    @property
    def order(self) -> int:
        return self.derivs.shape[1] - 1

    @property
    def value(self) -> np.ndarray:
        return self.derivs[:, 0].copy()

    def nth(self, k: int) -> np.ndarray:
        """The k-th derivative vector at the center."""
        if k > self.order:
            raise OrderTooLow(f"derivative {k} requested from order-{self.order} jet")
        return self.derivs[:, k].copy()

    def component(self, i: int) -> Jet:
        return Jet(self.center, self.derivs[i])

    def components(self):
        return [self.component(i) for i in range(self.dimension)]

    def truncate(self, order: int) -> "JetVector":
        if order > self.order:
            raise OrderTooLow(f"cannot raise jet order {self.order} to {order}")
        return JetVector(self.center, self.derivs[:, : order + 1])

    def derivative(self) -> "JetVector":
        if self.order == 0:
            raise OrderTooLow("cannot differentiate an order-0 jet")
        return JetVector(self.center, self.derivs[:, 1:])

    def _pair(self, other: "JetVector"):
        _check_centers(self.center, other.center)
        m = min(self.order, other.order)
        return self.derivs[:, : m + 1], other.derivs[:, : m + 1]

    def __add__(self, other: "JetVector") -> "JetVector":
        a, b = self._pair(other)
        return JetVector(self.center, a + b)

    def __sub__(self, other: "JetVector") -> "JetVector":
        a, b = self._pair(other)
        return JetVector(self.center, a - b)

    def __neg__(self) -> "JetVector":
        return JetVector(self.center, -self.derivs)

    def dot(self, other: "JetVector") -> Jet:
        a, b = self._pair(other)
        return Jet(self.center, leibniz(a, b).sum(axis=0))

    def scale(self, factor) -> "JetVector":
        """Multiply every component by a scalar jet or a plain number."""
        if isinstance(factor, Jet):
            _check_centers(self.center, factor.center)
            m = min(self.order, factor.order)
            f = np.broadcast_to(factor.derivs[: m + 1], (self.dimension, m + 1))
            return JetVector(self.center, leibniz(self.derivs[:, : m + 1], f))
        return JetVector(self.center, self.derivs * float(factor))

    def norm(self) -> Jet:
        return jet_sqrt(self.dot(self))

    def __repr__(self) -> str:
        return f"JetVector(center={self.center!r}, n={self.dimension}, order={self.order})"
