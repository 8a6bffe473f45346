"""Curves that exist only through their curvatures.

The Frenet system in arclength form, extended with ``alpha' = T``, is
integrated with classic RK4. After every step the frame is pulled back onto
the orthonormal group by modified Gram-Schmidt (a projection retraction).
The initial frame is the identity and the initial point the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionNearZero, DomainError, SchemaError, StepTooLarge
from .expr import Expression, number
from .jets import Jet, JetVector, _binom_table, jet_sec, jet_sin, jet_sinc, jet_sqrt

DRIFT_LIMIT = 1e-6

KINDS = (
    "constant",
    "inv_sqrt_quadratic",
    "linear_over_sqrt_quadratic",
    "sine_over_linear",
    "linear_sec",
    "expression",
)


def _sqrt(x):
    if isinstance(x, Jet):
        return jet_sqrt(x)
    if x <= 0:
        raise DomainError(f"square root of non-positive value {x!r}")
    return math.sqrt(x)


def _sin(x):
    return jet_sin(x) if isinstance(x, Jet) else math.sin(x)


def _sec(x):
    if isinstance(x, Jet):
        return jet_sec(x)
    c = math.cos(x)
    if abs(c) <= 1e-12:
        raise DomainError(f"sec pole at {x!r}")
    return 1.0 / c


def _sinc(x):
    if isinstance(x, Jet):
        return jet_sinc(x)
    return math.sin(x) / x if x != 0.0 else 1.0


def _div(a, b):
    if isinstance(b, Jet):
        return a / b
    if abs(b) <= 1e-12:
        raise DivisionNearZero(f"division by {b!r}")
    return a / b


@dataclass(frozen=True)
class CurvatureFunction:
    """One curvature as a closed-form function of arclength.

    ``kind`` selects the family; ``params`` holds its constants:

    * ``constant``: ``value``
    * ``inv_sqrt_quadratic``: ``sign / sqrt(a s (s + 2c) + b)``
    * ``linear_over_sqrt_quadratic``: ``sign (s + c) / sqrt(a s (s + 2c) + b)``
    * ``sine_over_linear``: ``c1 sin(k s + c2) / (s + c)``
    * ``linear_sec``: ``c2 (s + c) sec(k s + c1)``
    * ``expression``: ``expr``, a string in the variable ``s``
    """

    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown curvature kind {self.kind!r}")
        if self.kind == "expression":
            object.__setattr__(self, "_expr", Expression(str(self.params["expr"]), "s"))
            return
        defaults = {"sign": 1.0, "c": 0.0}
        required = {
            "constant": ("value",),
            "inv_sqrt_quadratic": ("a", "b"),
            "linear_over_sqrt_quadratic": ("a", "b"),
            "sine_over_linear": ("c1", "k", "c2"),
            "linear_sec": ("c2", "k", "c1"),
        }[self.kind]
        p = {}
        for key in required:
            if key not in self.params:
                raise SchemaError(f"curvature kind {self.kind!r} needs parameter {key!r}")
        for key, val in {**defaults, **self.params}.items():
            p[key] = number(val)
        object.__setattr__(self, "params", p)

    def _eval(self, s):
        p = self.params
        if self.kind == "constant":
            return s * 0.0 + p["value"]
        if self.kind == "expression":
            return s * 0.0 + self._expr(s)
        x = s + p["c"]
        if self.kind == "inv_sqrt_quadratic":
            return p["sign"] / _sqrt(p["a"] * s * (s + 2 * p["c"]) + p["b"])
        if self.kind == "linear_over_sqrt_quadratic":
            return p["sign"] * x / _sqrt(p["a"] * s * (s + 2 * p["c"]) + p["b"])
        if self.kind == "sine_over_linear":
            phase = p["c2"] - p["k"] * p["c"]
            if abs(math.sin(phase)) <= 1e-12 and p["k"] != 0.0:
                # removable singularity at s = -c
                return p["c1"] * math.cos(phase) * p["k"] * _sinc(x * p["k"])
            return _div(p["c1"] * _sin(s * p["k"] + p["c2"]), x)
        return p["c2"] * x * _sec(s * p["k"] + p["c1"])

    def value(self, s: float) -> float:
        return float(self._eval(float(s)))

    def jet(self, s: float, order: int) -> Jet:
        return self._eval(Jet.variable(float(s), order))

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureFunction":
        if not isinstance(d, dict) or "kind" not in d:
            raise SchemaError(f"curvature entry needs a 'kind': {d!r}")
        params = {k: v for k, v in d.items() if k != "kind"}
        return cls(d["kind"], params)


@dataclass(frozen=True)
class CurvatureProfile:
    dimension: int
    curvatures: tuple
    interval: tuple

    def __post_init__(self):
        n = self.dimension
        if n < 2:
            raise SchemaError("dimension must be at least 2")
        if len(self.curvatures) != n - 1:
            raise SchemaError(f"dimension {n} needs {n - 1} curvatures, got {len(self.curvatures)}")
        lo, hi = (float(v) for v in self.interval)
        if not lo < hi:
            raise SchemaError(f"empty validity interval {self.interval!r}")
        object.__setattr__(self, "interval", (lo, hi))
        object.__setattr__(self, "curvatures", tuple(self.curvatures))
        # positivity of kappa_1..kappa_{n-2} on interior sample points
        probe = lo + (hi - lo) * (np.arange(257) + 0.5) / 257
        for i, f in enumerate(self.curvatures[: n - 2], start=1):
            for s in probe:
                if not f.value(s) > 0:
                    raise SchemaError(f"kappa_{i} must be positive on the interval, fails at s={s:.6g}")

    def values(self, s: float) -> np.ndarray:
        return np.array([f.value(s) for f in self.curvatures])

    def jets(self, s: float, order: int):
        return [f.jet(s, order) for f in self.curvatures]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "curvatures": [f.to_dict() for f in self.curvatures],
            "interval": list(self.interval),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureProfile":
        try:
            return cls(
                int(d["dimension"]),
                tuple(CurvatureFunction.from_dict(c) for c in d["curvatures"]),
                tuple(number(v) for v in d["interval"]),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed curvature profile: {exc}") from None


def generator(kappas: np.ndarray) -> np.ndarray:
    """Skew-symmetric coefficient matrix of the Frenet equations."""
    n = kappas.size + 1
    K = np.zeros((n, n))
    idx = np.arange(n - 1)
    K[idx, idx + 1] = kappas
    K[idx + 1, idx] = -kappas
    return K


def orthonormalize_rows(F: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on the rows, one reorthogonalization pass."""
    Q = np.array(F, dtype=float)
    for i in range(Q.shape[0]):
        for _ in range(2):
            for j in range(i):
                Q[i] -= (Q[i] @ Q[j]) * Q[j]
        Q[i] /= np.linalg.norm(Q[i])
    return Q


def _rk4_step(profile, s, alpha, F, h):
    def rhs(s_, F_):
        try:
            kap = profile.values(s_)
        except DivisionNearZero as exc:
            raise DomainError(str(exc)) from None
        return F_[0], generator(kap) @ F_

    a1, k1 = rhs(s, F)
    a2, k2 = rhs(s + h / 2, F + h / 2 * k1)
    a3, k3 = rhs(s + h / 2, F + h / 2 * k2)
    a4, k4 = rhs(s + h, F + h * k3)
    alpha_new = alpha + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    F_new = F + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = np.abs(F_new @ F_new.T - np.eye(F.shape[0])).max()
    if drift > DRIFT_LIMIT:
        raise StepTooLarge(f"orthonormality drift {drift:.3g} at s={s + h:.6g}; reduce the step")
    return alpha_new, orthonormalize_rows(F_new)


@dataclass
class IntegratedCurve:
    """Dense RK4 output: every step is stored."""

    profile: CurvatureProfile
    s: np.ndarray
    points: np.ndarray
    frames: np.ndarray
    step: float

    @property
    def normals(self) -> np.ndarray:
        return self.frames[:, 1, :]

    def state_at(self, s: float):
        """Point and frame at ``s``, advancing from the nearest node below."""
        s0, s1 = self.s[0], self.s[-1]
        tol = 1e-12 * max(1.0, abs(s0), abs(s1))
        if s < s0 - tol or s > s1 + tol:
            raise DomainError(f"s={s!r} outside integrated range [{s0}, {s1}]")
        j = int(np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, self.s.size - 1))
        ds = s - self.s[j]
        if abs(ds) <= tol:
            return self.points[j].copy(), self.frames[j].copy()
        return _rk4_step(self.profile, self.s[j], self.points[j], self.frames[j], ds)

    def jet_at(self, s: float, order: int) -> JetVector:
        """Exact jets of the integrated curve at ``s``.

        Point and frame come from the integration; higher derivatives follow
        from differentiating ``F' = K F`` with the profile's curvature jets.
        """
        alpha, F = self.state_at(s)
        n = alpha.size
        derivs = np.zeros((n, order + 1))
        derivs[:, 0] = alpha
        if order == 0:
            return JetVector(s, derivs)
        kjets = self.profile.jets(s, max(order - 2, 0))
        K = [generator(np.array([k.derivs[j] for k in kjets])) for j in range(max(order - 1, 1))]
        C = _binom_table(max(order, 1))
        Fd = [F]
        for k in range(order - 1):
            Fd.append(sum(C[k, j] * K[j] @ Fd[k - j] for j in range(k + 1)))
        for k in range(1, order + 1):
            derivs[:, k] = Fd[k - 1][0]
        return JetVector(s, derivs)


def integrate(profile: CurvatureProfile, s_range, h: float) -> IntegratedCurve:
    s0, s1 = (float(v) for v in s_range)
    lo, hi = profile.interval
    if not (lo <= s0 < s1 <= hi):
        raise DomainError(f"range [{s0}, {s1}] not inside validity interval [{lo}, {hi}]")
    if not h > 0:
        raise SchemaError("step must be positive")
    steps = max(1, int(round((s1 - s0) / h)))
    h_eff = (s1 - s0) / steps
    n = profile.dimension
    s = s0 + h_eff * np.arange(steps + 1)
    s[-1] = s1
    points = np.zeros((steps + 1, n))
    frames = np.zeros((steps + 1, n, n))
    frames[0] = np.eye(n)
    for j in range(steps):
        points[j + 1], frames[j + 1] = _rk4_step(profile, s[j], points[j], frames[j], h_eff)
    return IntegratedCurve(profile, s, points, frames, h_eff)


def position_jet_from_samples(s_nodes, points, s0: float, order: int, half_width: float, degree: int = 10) -> JetVector:
    """Jets of a sampled curve by a local least-squares polynomial fit.

    Uses positions only, so it is independent of the integrator's frames.
    """
    s_nodes = np.asarray(s_nodes, dtype=float)
    mask = np.abs(s_nodes - s0) <= half_width * (1 + 1e-12)
    if mask.sum() <= degree:
        raise DomainError(f"only {mask.sum()} samples within {half_width} of s={s0}")
    u = (s_nodes[mask] - s0) / half_width
    V = np.vander(u, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, np.asarray(points)[mask], rcond=None)
    k = np.arange(order + 1)
    scale = np.array([math.factorial(i) for i in k]) / half_width**k
    return JetVector(s0, (coef[: order + 1] * scale[:, None]).T)
