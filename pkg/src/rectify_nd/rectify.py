"""Rectifying-curve mathematics.

Position-vector decomposition ``alpha = lambda T + sum mu_i B_i`` with
``lambda(s) = s + c``; the coefficient table ``mu_{i,k}`` expressing each
``mu_i`` through derivatives of ``kappa_1 / kappa_2``; the curvature
condition that characterizes rectifying curves; the component checks
(tangential, distance, normal length, binormal); the constant-curvature
closed forms; and fixed-point recovery.

Indices follow the usual conventions: ``kappas[0]`` is ``kappa_1`` and
``mu[i - 1]`` is ``mu_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import frenet as _frenet
from .errors import DegenerateGeometry, DivisionNearZero, DomainError, OrderTooLow, RectifyError
from .frenetode import CurvatureFunction, CurvatureProfile
from .jets import Jet

TOL_CERTIFY = 1e-6
TOL_FALSIFY = 1e-2

RECTIFYING = "rectifying"
NOT_RECTIFYING = "not_rectifying"
INCONCLUSIVE = "inconclusive"
UNDETERMINED = "undetermined"


def classify(residual: float, tol_certify: float = TOL_CERTIFY, tol_falsify: float = TOL_FALSIFY) -> str:
    if not np.isfinite(residual):
        return UNDETERMINED
    if residual < tol_certify:
        return RECTIFYING
    if residual > tol_falsify:
        return NOT_RECTIFYING
    return INCONCLUSIVE


# -- mu coefficients ----------------------------------------------------------


@dataclass(frozen=True)
class MuTable:
    dimension: int
    c: float
    entries: tuple  # entries[i - 1][k] is mu_{i,k}
    mu: tuple  # assembled mu_1 .. mu_{n-2}

    def entry(self, i: int, k: int) -> Jet:
        return self.entries[i - 1][k]

    @property
    def values(self) -> np.ndarray:
        return np.array([m.value for m in self.mu])


def _ratio_derivatives(kappas, count):
    r = kappas[0] / kappas[1]
    out = [r]
    for _ in range(count - 1):
        out.append(out[-1].derivative())
    return out


def mu_recursion(kappas, c: float) -> MuTable:
    """Build ``mu_{i,k}`` by induction and assemble ``mu_i``.

    ``kappas`` are the curvature jets in arclength, all centered at the same
    ``s``. Row ``i`` consumes derivatives of order ``i - 1``.
    """
    n = len(kappas) + 1
    if n < 3:
        raise ValueError("rectifying curves need dimension >= 3")
    s = kappas[0].center
    q = min(k.order for k in kappas)
    K = [None] + list(kappas)  # K[i] is kappa_i
    lam = Jet.variable(s, q) + c
    rows = [[lam]]
    if n - 2 >= 2:
        inv3 = 1.0 / K[3]
        rows.append([inv3, lam * inv3])
    for i in range(3, n - 1):
        prev, prev2 = rows[i - 2], rows[i - 3]
        inv = 1.0 / K[i + 1]
        row = [(K[i] * prev2[0] + prev[0].derivative()) * inv]
        for k in range(1, i - 2):
            row.append((K[i] * prev2[k] + prev[k].derivative() + prev[k - 1]) * inv)
        row.append((prev[i - 3] + prev[i - 2].derivative()) * inv)
        row.append(prev[i - 2] * inv)
        rows.append(row)
    ratio = _ratio_derivatives(kappas, n - 2)
    mu = []
    for row in rows:
        total = row[0] * ratio[0]
        for k in range(1, len(row)):
            total = total + row[k] * ratio[k]
        mu.append(total)
    return MuTable(n, float(c), tuple(tuple(r) for r in rows), tuple(mu))


def mu_forward_oracle(kappas, c: float):
    """``mu_1 .. mu_{n-2}`` by direct forward substitution.

    ``mu_1 = (s + c) kappa_1 / kappa_2``, ``mu_2 = mu_1' / kappa_3`` and
    ``mu_{i+1} = (mu_{i-1} kappa_{i+1} + mu_i') / kappa_{i+2}``.
    Independent of the coefficient table; used to cross-check it.
    """
    n = len(kappas) + 1
    K = [None] + list(kappas)
    s = kappas[0].center
    q = min(k.order for k in kappas)
    mu = [(Jet.variable(s, q) + c) * K[1] / K[2]]
    if n - 2 >= 2:
        mu.append(mu[0].derivative() / K[3])
    for i in range(2, n - 2):
        mu.append((mu[i - 2] * K[i + 1] + mu[i - 1].derivative()) / K[i + 2])
    return mu


def rectifying_condition(kappas, c: float) -> float:
    """Left side of the curvature condition at the jet center.

    ``kappa_{n-1} mu_{n-3} + mu_{n-2}'``; zero iff the curvature data fits a
    rectifying curve with this ``c``. In dimension 3 the first term is absent.
    """
    table = mu_recursion(kappas, c)
    return _condition_from_table(kappas, table)


def _condition_from_table(kappas, table: MuTable) -> float:
    n = table.dimension
    mu = table.mu
    if mu[-1].order < 1:
        raise OrderTooLow(
            f"curvature jets of order {min(k.order for k in kappas)} are too short; need >= {n - 2}"
        )
    out = mu[-1].derivative().value
    if n >= 4:
        out += kappas[-1].value * mu[n - 4].value
    return out


def condition_affine(kappas):
    """Condition residual as ``r0 + c r1``; it is affine in the offset ``c``."""
    r0 = rectifying_condition(kappas, 0.0)
    r1 = rectifying_condition(kappas, 1.0) - r0
    return r0, r1


def fit_offset(r0, r1) -> float:
    """Least-squares ``c`` making ``r0 + c r1`` smallest over samples."""
    r0 = np.asarray(r0, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    ok = np.isfinite(r0) & np.isfinite(r1)
    den = float(r1[ok] @ r1[ok])
    if den == 0.0:
        return 0.0
    return -float(r0[ok] @ r1[ok]) / den


# -- constant curvatures ------------------------------------------------------


def _odd_chain(k, m):
    """``kappa_1 kappa_3 ... kappa_{2m-1} / (kappa_2 kappa_4 ... kappa_{2m})``."""
    num = math.prod(k[2 * i - 2] for i in range(1, m + 1))
    den = math.prod(k[2 * i - 1] for i in range(1, m + 1))
    return num / den


def _even_value(k, m):
    total = 0.0
    for j in range(1, m + 1):
        term = math.prod(k[2 * i - 2] for i in range(1, j + 1)) * math.prod(
            k[2 * i - 1] for i in range(j + 1, m + 1)
        )
        total += term * term
    return total / math.prod(k[: 2 * m + 1])


def mu_constant_closed_form(kappas, c: float, s: float) -> np.ndarray:
    """``mu_1 .. mu_{n-2}`` for constant curvatures ``kappa_1 .. kappa_{n-1}``.

    Odd indices grow linearly in ``s + c``; even indices are constant.
    """
    k = [float(x) for x in kappas]
    out = []
    for idx in range(1, len(k)):
        m = (idx + 1) // 2
        out.append(_odd_chain(k, m) * (s + c) if idx % 2 else _even_value(k, m))
    return np.array(out)


def constant_curvature_contradiction(kappas, c: float, s: float) -> float:
    """Value the condition takes when every curvature is a non-zero constant.

    Even ``n``: the odd chain times ``(s + c) kappa_{n-1}``. Odd ``n``: a sum
    of positive terms over ``kappa_1 ... kappa_{n-1}``.
    """
    k = [float(x) for x in kappas]
    n = len(k) + 1
    if n % 2 == 0:
        return _odd_chain(k, (n - 2) // 2) * (s + c) * k[-1]
    m = (n - 3) // 2
    even = _even_value(k, m) if m >= 1 else 0.0
    return even * k[-1] + _odd_chain(k, (n - 1) // 2)


def _eq10_constant(n, kappas):
    k = [float(x) for x in kappas]
    if n % 2 == 0:
        m = (n - 2) // 2
        lin = _odd_chain(k, m)
        const = _even_value(k, m - 1) if m >= 2 else 0.0
        return -lin / (const * k[n - 3] + lin)
    m = (n - 3) // 2
    lin = _odd_chain(k, m)
    return -_even_value(k, m) / (lin * k[n - 3])


def kappa_last_closed_form(n: int, kappas, b: float, c: float, sign: float = 1.0, interval=None):
    """Curvature profile whose last curvature makes the curve rectifying.

    The first ``n - 2`` curvatures are the given constants. The last is
    ``sign / sqrt(a s (s + 2c) + b)`` for even ``n`` and
    ``sign (s + c) / sqrt(a s (s + 2c) + b)`` for odd ``n``, where ``a`` is
    derived from the constants through the constant-curvature ``mu`` chains.

    Returns ``(profile, a)``. The profile interval is where the quadratic is
    positive unless ``interval`` narrows it.
    """
    if n < 4:
        raise ValueError("needs dimension >= 4")
    kappas = [float(x) for x in kappas]
    if len(kappas) != n - 2 or any(x <= 0 for x in kappas):
        raise ValueError(f"needs {n - 2} positive constant curvatures")
    a = _eq10_constant(n, kappas)
    if a < 0:
        disc = c * c - b / a
        if disc <= 0:
            raise DomainError(f"a s(s+2c) + b is never positive (a={a:.6g}, b={b}, c={c})")
        r = math.sqrt(disc)
        valid = (-c - r, -c + r)
    elif b + a * (-c) * c > 0 or a > 0:
        valid = (-math.inf, math.inf)
    else:
        raise DomainError("a s(s+2c) + b is never positive")
    if interval is not None:
        lo, hi = max(valid[0], interval[0]), min(valid[1], interval[1])
        if not lo < hi:
            raise DomainError(f"requested interval {interval} lies outside the validity domain {valid}")
        valid = (lo, hi)
    if not all(map(math.isfinite, valid)):
        raise DomainError("unbounded validity domain; pass an interval")
    kind = "inv_sqrt_quadratic" if n % 2 == 0 else "linear_over_sqrt_quadratic"
    last = CurvatureFunction(kind, {"a": a, "b": b, "c": c, "sign": sign})
    funcs = [CurvatureFunction("constant", {"value": x}) for x in kappas] + [last]
    return CurvatureProfile(n, tuple(funcs), valid), a


def e4_two_constant_profile(case: str, interval, **p) -> CurvatureProfile:
    """E^4 profiles with two constant curvatures that give rectifying curves.

    case ``"i"``: ``kappa1, kappa2`` constant, ``kappa3 = 1/sqrt(-s^2 - 2cs + c1)``.
    case ``"ii"``: ``kappa2, kappa3`` constant, ``kappa1 = c1 sin(kappa3 s + c2)/(s + c)``.
    case ``"iii"``: ``kappa1, kappa3`` constant, ``kappa2 = c2 (s + c) sec(kappa3 s + c1)``.
    """
    const = lambda v: CurvatureFunction("constant", {"value": v})  # noqa: E731
    c = p.get("c", 0.0)
    if case == "i":
        k3 = CurvatureFunction("inv_sqrt_quadratic", {"a": -1.0, "b": p["c1"], "c": c, "sign": p.get("sign", 1.0)})
        funcs = (const(p["kappa1"]), const(p["kappa2"]), k3)
    elif case == "ii":
        k1 = CurvatureFunction("sine_over_linear", {"c1": p["c1"], "k": p["kappa3"], "c2": p["c2"], "c": c})
        funcs = (k1, const(p["kappa2"]), const(p["kappa3"]))
    elif case == "iii":
        k2 = CurvatureFunction("linear_sec", {"c2": p["c2"], "k": p["kappa3"], "c1": p["c1"], "c": c})
        funcs = (const(p["kappa1"]), k2, const(p["kappa3"]))
    else:
        raise ValueError(f"unknown case {case!r}")
    return CurvatureProfile(4, funcs, tuple(interval))


# -- fixed point and beta -----------------------------------------------------


@dataclass(frozen=True)
class FixedPoint:
    point: np.ndarray
    residual: float
    rank: int


def fixed_point(points, normals, strict: bool = True) -> FixedPoint:
    """Point ``p`` minimizing ``sum <alpha_j - p, N_j>^2``.

    ``residual`` is the RMS of the inner products at the optimum. With
    ``strict`` a rank-deficient system (normals spanning a proper subspace)
    raises; otherwise the minimum-norm ``p`` is returned with its rank.
    """
    P = np.asarray(points, dtype=float)
    N = np.asarray(normals, dtype=float)
    n = P.shape[1]
    if P.shape[0] < n + 1:
        raise DegenerateGeometry(f"need at least {n + 1} samples, got {P.shape[0]}")
    rhs = np.einsum("ij,ij->i", P, N)
    sv = np.linalg.svd(N, compute_uv=False)
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    if strict and rank < n:
        raise DegenerateGeometry(f"normals span only {rank} of {n} dimensions; fixed point not unique")
    p, *_ = np.linalg.lstsq(N, rhs, rcond=1e-10)
    resid = rhs - N @ p
    return FixedPoint(p, float(np.sqrt(np.mean(resid**2))), rank)


@dataclass(frozen=True)
class BetaResult:
    mean: np.ndarray
    max_deviation: float
    c: float
    excluded: int
    betas: np.ndarray = field(repr=False)


def beta_constancy(spec, grid, c: float | None = None, anchor=None, frames=None) -> BetaResult:
    """Spread of ``beta = alpha - (s + c) T - sum mu_i B_i`` over the grid.

    ``beta`` is constant exactly when the curve is congruent to a rectifying
    curve, and its constant value is the fixed point. With ``c=None`` the
    offset is fitted so that the spread is smallest (``beta`` is affine in c).
    """
    fds = frames if frames is not None else _frenet.frames_on_grid(spec, grid, anchor)
    b0, g = [], []
    excluded = 0
    for fd in fds:
        E = fd.frame_values
        try:
            mu0 = mu_recursion(fd.curvatures, 0.0).values
            mu1 = mu_recursion(fd.curvatures, 1.0).values - mu0
        except DivisionNearZero:
            # a divisor curvature vanishes here; mu is not given by the recursion
            excluded += 1
            continue
        b0.append(fd.position - fd.s * E[0] - mu0 @ E[2:])
        g.append(E[0] + mu1 @ E[2:])
    if len(b0) < 2:
        raise DegenerateGeometry("beta is undefined at all but at most one sample")
    b0 = np.array(b0)
    g = np.array(g)
    if c is None:
        db = b0 - b0.mean(axis=0)
        dg = g - g.mean(axis=0)
        den = float(np.sum(dg * dg))
        # g constant along the curve: c is not identifiable, keep 0
        c = float(np.sum(db * dg) / den) if den > 1e-14 * float(np.sum(g * g)) else 0.0
    betas = b0 - c * g
    mean = betas.mean(axis=0)
    dev = float(np.linalg.norm(betas - mean, axis=1).max())
    return BetaResult(mean, dev, float(c), excluded, betas)


# -- component measurements ---------------------------------------------------


@dataclass
class RectifyingReport:
    dimension: int
    t: np.ndarray
    s: np.ndarray
    rho2: np.ndarray
    tangential: np.ndarray
    normal_inner: np.ndarray
    normal_length: np.ndarray
    mu_measured: np.ndarray  # (samples, n-2)
    mu_predicted: np.ndarray
    condition: np.ndarray  # per-sample condition residual at condition_offset
    origin: np.ndarray
    rho_rms: float
    c: float
    tangential_slope: float
    rho2_coefficients: np.ndarray  # highest power first
    normal_residual: float
    tangential_fit_residual: float
    rho_fit_residual: float
    normal_length_std: float
    binormal_residual: float
    sum_rule_spread: float
    condition_offset: float
    condition_residual: float
    condition_excluded: int  # samples where a divisor curvature vanishes
    fixed_point: np.ndarray
    fixed_point_residual: float
    fixed_point_rank: int
    spherical: bool

    def classification(self, tol_certify=TOL_CERTIFY, tol_falsify=TOL_FALSIFY) -> str:
        return classify(self.normal_residual, tol_certify, tol_falsify)

    def condition_classification(self, tol_certify=TOL_CERTIFY, tol_falsify=TOL_FALSIFY) -> str:
        return classify(self.condition_residual, tol_certify, tol_falsify)


def _safe(fn, fallback):
    try:
        return fn()
    except (DivisionNearZero, OrderTooLow, DomainError):
        return fallback


def measure_components(spec, grid, anchor=None, origin=None, frames=None) -> RectifyingReport:
    """Measure every component characterization on a parameter grid.

    ``origin`` is the candidate fixed point (default: the coordinate origin);
    ``"fixed_point"`` uses the least-squares estimate from the same samples.
    """
    grid = np.asarray(grid, dtype=float)
    fds = frames if frames is not None else _frenet.frames_on_grid(spec, grid, anchor, complete_last=True)
    n = spec.dimension
    P = np.array([fd.position for fd in fds])
    E = np.array([fd.frame_values for fd in fds])
    s = np.array([fd.s for fd in fds])

    fp = fixed_point(P, E[:, 1], strict=False)
    if origin is None:
        o = np.zeros(n)
    elif isinstance(origin, str):
        if origin != "fixed_point":
            raise ValueError(f"unknown origin {origin!r}")
        o = fp.point
    else:
        o = np.asarray(origin, dtype=float)
    A = P - o

    tang = np.einsum("ij,ij->i", A, E[:, 0])
    nin = np.einsum("ij,ij->i", A, E[:, 1])
    nvec = A - tang[:, None] * E[:, 0]
    nlen = np.linalg.norm(nvec, axis=1)
    rho2 = np.einsum("ij,ij->i", A, A)
    rho_rms = float(np.sqrt(rho2.mean()))
    mu_meas = np.einsum("ij,ikj->ik", A, E[:, 2:])

    c = float(np.mean(tang - s))
    slope = float(np.polyfit(s, tang, 1)[0])
    coeffs = np.polyfit(s, rho2, 2)

    nan_row = np.full(n - 2, np.nan)
    mu_pred = np.array([_safe(lambda: mu_recursion(fd.curvatures, c).values, nan_row) for fd in fds])
    aff = np.array([_safe(lambda: condition_affine(fd.curvatures), (np.nan, np.nan)) for fd in fds])
    c_cond = fit_offset(aff[:, 0], aff[:, 1])
    cond = np.abs(aff[:, 0] + c_cond * aff[:, 1])

    diff = np.abs(mu_meas - mu_pred)
    mu2 = np.sum(mu_meas**2, axis=1)
    return RectifyingReport(
        dimension=n,
        t=grid,
        s=s,
        rho2=rho2,
        tangential=tang,
        normal_inner=nin,
        normal_length=nlen,
        mu_measured=mu_meas,
        mu_predicted=mu_pred,
        condition=cond,
        origin=o,
        rho_rms=rho_rms,
        c=c,
        tangential_slope=slope,
        rho2_coefficients=coeffs,
        normal_residual=float(np.abs(nin).max() / rho_rms),
        tangential_fit_residual=float(np.abs(tang - s - c).max() / rho_rms),
        rho_fit_residual=float(np.abs(np.polyval(coeffs, s) - rho2).max() / rho_rms**2),
        normal_length_std=float(nlen.std() / nlen.mean()),
        binormal_residual=float(np.nanmax(diff) / rho_rms) if np.isfinite(diff).any() else math.nan,
        sum_rule_spread=float((mu2.max() - mu2.min()) / mu2.mean()) if mu2.mean() > 0 else math.nan,
        condition_offset=c_cond,
        condition_residual=float(np.nanmax(cond)) if np.isfinite(cond).any() else math.nan,
        condition_excluded=int(np.sum(~np.isfinite(cond))),
        fixed_point=fp.point,
        fixed_point_residual=fp.residual,
        fixed_point_rank=fp.rank,
        spherical=bool(np.abs(tang).max() / rho_rms < TOL_CERTIFY),
    )


__all__ = [
    "MuTable",
    "RectifyingReport",
    "FixedPoint",
    "BetaResult",
    "RectifyError",
    "mu_recursion",
    "mu_forward_oracle",
    "rectifying_condition",
    "condition_affine",
    "fit_offset",
    "mu_constant_closed_form",
    "constant_curvature_contradiction",
    "kappa_last_closed_form",
    "e4_two_constant_profile",
    "fixed_point",
    "beta_constancy",
    "measure_components",
    "classify",
]
