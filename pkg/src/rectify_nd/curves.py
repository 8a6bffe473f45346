"""Declarative curve families with exact jet evaluation.

Families
--------
GeneralizedHelixEven
    ``(a_1 sin(b_1 t), a_1 cos(b_1 t), ..., a_m sin(b_m t), a_m cos(b_m t))``
    in dimension ``2m``; every such curve has constant curvatures.
GeneralizedHelixOdd
    The even form with one extra coordinate ``drift * t``.
SphericalHelix
    The even form (plus a constant last coordinate ``c`` in odd dimension)
    constrained to be an arclength curve on the unit hypersphere.
SecScaled
    ``a sec(t + t0) y(t)`` for an inner spherical arclength curve ``y``.
Explicit
    Coordinates given as expressions in ``t`` (see :mod:`rectify_nd.expr`).
Sampled
    Points interpolated by a quintic spline; jets only up to order 4.
CurvatureDriven
    A curve integrated from a curvature profile; the parameter is arclength.

Any spec may carry an ``offset`` vector that is added to every point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DomainError, OrderTooLow, SchemaError
from .expr import Expression, number
from .jets import Jet, JetVector, jet_cos, jet_sec, jet_sin, max_order

FAMILIES = (
    "GeneralizedHelixEven",
    "GeneralizedHelixOdd",
    "SphericalHelix",
    "SecScaled",
    "Explicit",
    "Sampled",
    "CurvatureDriven",
)

DELTA_SEC = 1e-3
SPHERE_TOL = 1e-12
SAMPLED_MAX_ORDER = 4


def _numbers(values, name) -> list[float]:
    if not isinstance(values, (list, tuple)):
        raise SchemaError(f"{name} must be a list")
    return [number(v) for v in values]


def _sec_pole_distance(x: float) -> float:
    r = math.fmod(x - math.pi / 2, math.pi)
    r = abs(r)
    return min(r, math.pi - r)


@dataclass(frozen=True)
class CurveSpec:
    dimension: int
    family: str
    params: Mapping[str, Any]
    domain: tuple
    offset: tuple | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SchemaError(f"unknown curve family {self.family!r}")
        n = int(self.dimension)
        if n < 2:
            raise SchemaError("dimension must be at least 2")
        object.__setattr__(self, "dimension", n)
        try:
            lo, hi = (number(v) for v in self.domain)
        except (TypeError, ValueError):
            raise SchemaError(f"domain must be [t_min, t_max], got {self.domain!r}") from None
        if not lo < hi:
            raise SchemaError(f"empty domain {self.domain!r}")
        object.__setattr__(self, "domain", (lo, hi))
        if self.offset is not None:
            off = tuple(_numbers(self.offset, "offset"))
            if len(off) != n:
                raise SchemaError("offset length must equal the dimension")
            object.__setattr__(self, "offset", off)
        object.__setattr__(self, "params", dict(_VALIDATORS[self.family](self, dict(self.params))))

    @property
    def max_order(self) -> int:
        if self.family == "Sampled":
            return SAMPLED_MAX_ORDER
        return max_order(self.dimension)

    def to_dict(self) -> dict:
        d = {
            "dimension": self.dimension,
            "family": self.family,
            "params": _PARAM_EXPORT.get(self.family, dict)(self.params),
            "domain": list(self.domain),
        }
        if self.offset is not None:
            d["offset"] = list(self.offset)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "CurveSpec":
        if not isinstance(d, Mapping):
            raise SchemaError("curve spec must be a JSON object")
        missing = {"dimension", "family", "params", "domain"} - set(d)
        if missing:
            raise SchemaError(f"curve spec missing fields: {sorted(missing)}")
        return cls(d["dimension"], d["family"], d["params"], tuple(d["domain"]), d.get("offset"))


# -- family validators: normalize params, enforce invariants ------------------


def _helix_params(spec, p, expected_pairs):
    a = _numbers(p.get("amplitudes"), "amplitudes")
    b = _numbers(p.get("frequencies"), "frequencies")
    phases = _numbers(p.get("phases", [0.0] * len(a)), "phases")
    if not (len(a) == len(b) == len(phases) == expected_pairs):
        raise SchemaError(f"dimension {spec.dimension} needs {expected_pairs} amplitude/frequency pairs")
    if len(set(b)) != len(b):
        raise SchemaError("frequencies must be pairwise distinct")
    return a, b, phases


def _validate_helix_even(spec, p):
    if spec.dimension % 2:
        raise SchemaError("GeneralizedHelixEven needs an even dimension")
    a, b, ph = _helix_params(spec, p, spec.dimension // 2)
    if any(x <= 0 for x in a):
        raise SchemaError("amplitudes must be positive")
    return {"amplitudes": a, "frequencies": b, "phases": ph}


def _validate_helix_odd(spec, p):
    if spec.dimension % 2 == 0:
        raise SchemaError("GeneralizedHelixOdd needs an odd dimension")
    a, b, ph = _helix_params(spec, p, spec.dimension // 2)
    if any(x <= 0 for x in a):
        raise SchemaError("amplitudes must be positive")
    if "drift" not in p:
        raise SchemaError("GeneralizedHelixOdd needs a 'drift'")
    return {"amplitudes": a, "frequencies": b, "phases": ph, "drift": number(p["drift"])}


def _validate_spherical_helix(spec, p):
    n = spec.dimension
    a, b, ph = _helix_params(spec, p, n // 2)
    # negative amplitudes become a half-turn phase shift
    for i, ai in enumerate(a):
        if ai < 0:
            a[i] = -ai
            ph[i] = ph[i] + math.pi
    c = number(p.get("c", 0.0))
    if n % 2 == 0 and c != 0.0:
        raise SchemaError("constant coordinate 'c' only exists in odd dimension")
    radius = sum(x * x for x in a) + c * c
    speed = sum((x * y) ** 2 for x, y in zip(a, b))
    if abs(radius - 1) > SPHERE_TOL or abs(speed - 1) > SPHERE_TOL:
        raise SchemaError(
            f"SphericalHelix constraints violated: sum a^2 (+c^2) = {radius!r}, sum a^2 b^2 = {speed!r}"
        )
    out = {"amplitudes": a, "frequencies": b, "phases": ph}
    if n % 2:
        out["c"] = c
    return out


def _validate_sec_scaled(spec, p):
    inner = p.get("inner")
    if isinstance(inner, Mapping):
        inner = CurveSpec.from_dict(inner)
    if not isinstance(inner, CurveSpec):
        raise SchemaError("SecScaled needs an 'inner' curve spec")
    if inner.dimension != spec.dimension:
        raise SchemaError("inner curve dimension differs")
    a = number(p.get("a", 1.0))
    if a == 0:
        raise SchemaError("sec scale 'a' must be non-zero")
    t0 = number(p.get("t0", 0.0))
    lo, hi = spec.domain
    ilo, ihi = inner.domain
    if lo < ilo or hi > ihi:
        raise SchemaError("SecScaled domain exceeds the inner curve's domain")
    # a pole inside [lo, hi] or within DELTA_SEC of it
    k = math.ceil((lo + t0 - math.pi / 2 - DELTA_SEC) / math.pi)
    pole = math.pi / 2 + k * math.pi - t0
    if pole <= hi + DELTA_SEC:
        raise SchemaError(f"domain reaches the sec pole at t={pole:.6g}")
    return {"inner": inner, "a": a, "t0": t0}


def _validate_explicit(spec, p):
    coords = p.get("coordinates")
    if not isinstance(coords, (list, tuple)) or len(coords) != spec.dimension:
        raise SchemaError(f"Explicit needs {spec.dimension} coordinate expressions")
    return {"coordinates": [str(c) for c in coords], "_exprs": [Expression(str(c), "t") for c in coords]}


def _validate_sampled(spec, p):
    t = np.asarray(_numbers(p.get("t"), "t"))
    pts = np.asarray(p.get("points"), dtype=float)
    if pts.ndim != 2 or pts.shape != (t.size, spec.dimension):
        raise SchemaError("points must have shape (len(t), dimension)")
    if t.size < 6 or np.any(np.diff(t) <= 0):
        raise SchemaError("Sampled needs at least 6 strictly increasing parameter values")
    from scipy.interpolate import make_interp_spline

    return {"t": t.tolist(), "points": pts.tolist(), "_spline": make_interp_spline(t, pts, k=5)}


def _validate_curvature_driven(spec, p):
    from .frenetode import CurvatureProfile

    prof = p.get("profile")
    if isinstance(prof, Mapping):
        prof = CurvatureProfile.from_dict(prof)
    if not isinstance(prof, CurvatureProfile):
        raise SchemaError("CurvatureDriven needs a 'profile'")
    if prof.dimension != spec.dimension:
        raise SchemaError("profile dimension differs")
    h = number(p.get("step", 1e-3))
    if h <= 0:
        raise SchemaError("step must be positive")
    return {"profile": prof, "step": h}


_VALIDATORS = {
    "GeneralizedHelixEven": _validate_helix_even,
    "GeneralizedHelixOdd": _validate_helix_odd,
    "SphericalHelix": _validate_spherical_helix,
    "SecScaled": _validate_sec_scaled,
    "Explicit": _validate_explicit,
    "Sampled": _validate_sampled,
    "CurvatureDriven": _validate_curvature_driven,
}

_PARAM_EXPORT = {
    "SecScaled": lambda p: {"inner": p["inner"].to_dict(), "a": p["a"], "t0": p["t0"]},
    "Explicit": lambda p: {"coordinates": list(p["coordinates"])},
    "Sampled": lambda p: {"t": p["t"], "points": p["points"]},
    "CurvatureDriven": lambda p: {"profile": p["profile"].to_dict(), "step": p["step"]},
}


# -- constructors -------------------------------------------------------------


def generalized_helix(amplitudes, frequencies, domain, drift=None, phases=None) -> CurveSpec:
    m = len(amplitudes)
    params = {"amplitudes": list(amplitudes), "frequencies": list(frequencies)}
    if phases is not None:
        params["phases"] = list(phases)
    if drift is None:
        return CurveSpec(2 * m, "GeneralizedHelixEven", params, tuple(domain))
    params["drift"] = drift
    return CurveSpec(2 * m + 1, "GeneralizedHelixOdd", params, tuple(domain))


def spherical_helix(amplitudes, frequencies, domain, c=None, phases=None) -> CurveSpec:
    m = len(amplitudes)
    params = {"amplitudes": list(amplitudes), "frequencies": list(frequencies)}
    if phases is not None:
        params["phases"] = list(phases)
    n = 2 * m
    if c is not None:
        params["c"] = c
        n += 1
    return CurveSpec(n, "SphericalHelix", params, tuple(domain))


def sec_scaled(inner: CurveSpec, a: float = 1.0, t0: float = 0.0, domain=None) -> CurveSpec:
    return CurveSpec(inner.dimension, "SecScaled", {"inner": inner, "a": a, "t0": t0}, tuple(domain or inner.domain))


def explicit(coordinates: Sequence[str], domain) -> CurveSpec:
    return CurveSpec(len(coordinates), "Explicit", {"coordinates": list(coordinates)}, tuple(domain))


def sampled(t, points) -> CurveSpec:
    pts = np.asarray(points, dtype=float)
    return CurveSpec(pts.shape[1], "Sampled", {"t": list(t), "points": pts.tolist()}, (t[0], t[-1]))


def curvature_driven(profile, s_range, step: float = 1e-3) -> CurveSpec:
    return CurveSpec(profile.dimension, "CurvatureDriven", {"profile": profile, "step": step}, tuple(s_range))


def translate(spec: CurveSpec, w) -> CurveSpec:
    w = np.asarray(w, dtype=float)
    base = np.zeros(spec.dimension) if spec.offset is None else np.asarray(spec.offset)
    return CurveSpec(spec.dimension, spec.family, spec.params, spec.domain, tuple((base + w).tolist()))


# -- evaluation ---------------------------------------------------------------


def in_domain(spec: CurveSpec, t: float) -> bool:
    lo, hi = spec.domain
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - slack <= t <= hi + slack):
        return False
    if spec.family == "SecScaled":
        return _sec_pole_distance(t + spec.params["t0"]) > DELTA_SEC
    return True


def _helix_jets(p, T: Jet):
    comps = []
    for a, b, ph in zip(p["amplitudes"], p["frequencies"], p["phases"]):
        arg = T * b + ph
        comps.append(jet_sin(arg) * a)
        comps.append(jet_cos(arg) * a)
    return comps


def _evaluate_raw(spec: CurveSpec, t: float, order: int) -> JetVector:
    p = spec.params
    fam = spec.family
    T = Jet.variable(t, order)
    if fam == "GeneralizedHelixEven":
        return JetVector.from_jets(_helix_jets(p, T))
    if fam == "GeneralizedHelixOdd":
        return JetVector.from_jets(_helix_jets(p, T) + [T * p["drift"]])
    if fam == "SphericalHelix":
        comps = _helix_jets(p, T)
        if "c" in p:
            comps.append(Jet.constant(p["c"], t, order))
        return JetVector.from_jets(comps)
    if fam == "SecScaled":
        y = evaluate(p["inner"], t, order)
        rho = jet_sec(T + p["t0"]) * p["a"]
        return y.scale(rho)
    if fam == "Explicit":
        comps = []
        for e in p["_exprs"]:
            v = e(T)
            comps.append(v if isinstance(v, Jet) else Jet.constant(v, t, order))
        return JetVector.from_jets(comps)
    if fam == "Sampled":
        spl = p["_spline"]
        return JetVector(t, np.stack([spl(t, nu=k) for k in range(order + 1)], axis=1))
    # CurvatureDriven
    curve = spec._cache.get("integrated")
    if curve is None:
        from .frenetode import integrate

        curve = integrate(p["profile"], spec.domain, p["step"])
        spec._cache["integrated"] = curve
    return curve.jet_at(t, order)


def evaluate(spec: CurveSpec, t: float, order: int) -> JetVector:
    """Jets of the curve's coordinates at parameter ``t`` up to ``order``."""
    t = float(t)
    if order < 0 or order > spec.max_order:
        raise OrderTooLow(f"{spec.family} supports jet orders 0..{spec.max_order}, requested {order}")
    if not in_domain(spec, t):
        raise DomainError(f"t={t!r} outside the domain of {spec.family} curve {spec.domain}")
    jv = _evaluate_raw(spec, t, order)
    if spec.offset is not None:
        d = jv.derivs.copy()
        d[:, 0] += spec.offset
        jv = JetVector(t, d)
    return jv


def integrated(spec: CurveSpec):
    """The cached integration behind a CurvatureDriven spec."""
    if spec.family != "CurvatureDriven":
        raise SchemaError("only CurvatureDriven curves are integrated")
    evaluate(spec, spec.domain[0], 0)
    return spec._cache["integrated"]


@dataclass(frozen=True)
class SphericalCheck:
    max_radius_deviation: float
    max_speed_deviation: float
    tolerance: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.max_radius_deviation < self.tolerance and self.max_speed_deviation < self.tolerance


def validate_spherical_arclength(spec: CurveSpec, grid) -> SphericalCheck:
    """Largest deviations of ``|y|`` and ``|y'|`` from 1 over ``grid``."""
    r_dev = 0.0
    v_dev = 0.0
    for t in grid:
        jv = evaluate(spec, t, 1)
        r_dev = max(r_dev, abs(np.linalg.norm(jv.nth(0)) - 1.0))
        v_dev = max(v_dev, abs(np.linalg.norm(jv.nth(1)) - 1.0))
    return SphericalCheck(r_dev, v_dev)
