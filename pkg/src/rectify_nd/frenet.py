"""Generalized Frenet frames, curvatures and arclength in R^n.

The frame is obtained by modified Gram-Schmidt (with one reorthogonalization
pass) applied to ``alpha', ..., alpha^(n)`` in jet arithmetic, so every frame
entry carries derivatives with respect to the curve parameter. The last
vector's sign is chosen so the frame has determinant +1, which makes the
last curvature signed and all others positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import curves as _curves
from .errors import DomainError, OrderTooLow, ResidualBelowTolerance
from .jets import EPS_DIV, Jet, JetVector, jet_reciprocal, jet_sqrt

log = logging.getLogger(__name__)

EPS_DEP_REL = 1e-9


def analysis_order(n: int) -> int:
    """Jet order that leaves curvature jets of order ``n - 1`` in arclength."""
    return 2 * n - 1


@dataclass(frozen=True)
class FrenetData:
    t: float
    s: float
    speed: float
    speed_jet: Jet
    frame: tuple  # rows T, N, B_1..B_{n-2} as JetVectors in t
    curvatures: tuple  # kappa_1..kappa_{n-1} as Jets in arclength
    position: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.frame)

    @property
    def frame_values(self) -> np.ndarray:
        return np.stack([e.value for e in self.frame])

    @property
    def tangent(self) -> np.ndarray:
        return self.frame[0].value

    @property
    def normal(self) -> np.ndarray:
        return self.frame[1].value

    @property
    def curvature_values(self) -> np.ndarray:
        return np.array([k.value for k in self.curvatures])


def to_arclength(f: Jet, inv_speed: Jet, s: float) -> Jet:
    """Re-express a jet in ``t`` as a jet in arclength centered at ``s``.

    Applies ``d/ds = (1/v) d/dt`` repeatedly; the returned jet keeps the
    order of ``f``.
    """
    out = [f.value]
    g = f
    for _ in range(f.order):
        g = g.derivative() * inv_speed
        out.append(g.value)
    return Jet(s, out)


def _project_out(u: JetVector, basis) -> JetVector:
    for _ in range(2):
        for e in basis:
            u = u - e.scale(u.dot(e))
    return u


def _completion(basis, center: float, order: int) -> JetVector:
    # constant axis vector least aligned with span(basis), projected out
    vals = np.stack([e.value for e in basis])
    resid = np.eye(vals.shape[1]) - (np.eye(vals.shape[1]) @ vals.T) @ vals
    k = int(np.argmax(np.linalg.norm(resid, axis=1)))
    axis = np.zeros(vals.shape[1])
    axis[k] = 1.0
    return _project_out(JetVector.constant(axis, center, order), basis)


def frenet_frame(jet: JetVector, s: float | None = None, *, complete_last: bool = False) -> FrenetData:
    """Frame, speed and curvatures from the jets of a curve at one parameter.

    Parameters
    ----------
    jet : JetVector
        Curve jets of order at least ``n + 1``.
    s : float, optional
        Arclength at this point; becomes the center of the curvature jets.
        Defaults to the parameter value (correct for unit-speed curves).
    complete_last : bool
        If ``alpha^(n)`` is dependent (curve locally in a hyperplane) build the
        last vector by orientation completion instead of raising; the last
        curvature then comes out as zero.

    Raises
    ------
    ResidualBelowTolerance
        ``alpha^(i+1)`` depends on lower derivatives, i.e. ``kappa_i`` vanishes.
    """
    n = jet.dimension
    m = jet.order
    if m < n + 1:
        raise OrderTooLow(f"frenet_frame in dimension {n} needs jet order >= {n + 1}, got {m}")
    t = jet.center
    s = t if s is None else float(s)

    derivs = []
    d = jet
    for _ in range(n):
        d = d.derivative()
        derivs.append(d)

    frame = []
    for i, d in enumerate(derivs):
        u = _project_out(d, frame)
        r = u.dot(u)
        ref = np.linalg.norm(d.value)
        thresh = EPS_DIV if i == 0 else EPS_DEP_REL * ref
        if r.value <= thresh * thresh:
            if i == n - 1 and complete_last and n > 1:
                u = _completion(frame, t, m)
                r = u.dot(u)
            else:
                raise ResidualBelowTolerance(
                    i, f"alpha^({i + 1}) dependent at t={t:.6g}: kappa_{i} vanishes"
                )
        frame.append(u.scale(jet_reciprocal(jet_sqrt(r))))

    if np.linalg.det(np.stack([e.value for e in frame])) < 0:
        frame[-1] = -frame[-1]

    v = derivs[0].norm()
    inv_v = jet_reciprocal(v)
    q = m - n
    kappas = []
    for i in range(n - 1):
        k_t = frame[i].derivative().dot(frame[i + 1]) * inv_v
        kappas.append(to_arclength(k_t.truncate(q), inv_v, s))
    return FrenetData(t, s, v.value, v, tuple(frame), tuple(kappas), jet.value)


def frenet_equation_residual(fd: FrenetData) -> float:
    """Largest mismatch between ``E_i'`` and ``v`` times the Frenet right side.

    Relative to ``v * max|kappa|``.
    """
    n = fd.dimension
    E = fd.frame_values
    k = fd.curvature_values
    v = fd.speed
    worst = 0.0
    for r in range(n):
        lhs = fd.frame[r].derivative().value
        rhs = np.zeros(n)
        if r > 0:
            rhs -= k[r - 1] * E[r - 1]
        if r < n - 1:
            rhs += k[r] * E[r + 1]
        worst = max(worst, np.abs(lhs - v * rhs).max())
    return worst / (v * max(np.abs(k).max(), 1e-300))


def orthonormality_error(fd: FrenetData) -> float:
    E = fd.frame_values
    return float(np.abs(E @ E.T - np.eye(fd.dimension)).max())


def speed(spec, t: float) -> float:
    return float(np.linalg.norm(_curves.evaluate(spec, t, 1).nth(1)))


def arclength(spec, t_a: float, t: float) -> float:
    """Arclength from ``t_a`` to ``t`` by adaptive Gauss-Kronrod quadrature."""
    for x in (t_a, t):
        if not _curves.in_domain(spec, x):
            raise DomainError(f"t={x!r} outside domain {spec.domain}")
    if t == t_a:
        return 0.0
    val, err = quad(lambda x: speed(spec, x), t_a, t, epsabs=1e-13, epsrel=1e-13, limit=200)
    if err > 1e-11:
        log.warning("arclength quadrature error estimate %.3g on [%g, %g]", err, t_a, t)
    return float(val)


def default_anchor(spec) -> float:
    lo, hi = spec.domain
    return 0.5 * (lo + hi)


def arclength_grid(spec, grid, anchor: float | None = None) -> np.ndarray:
    """Arclength at every grid point, measured from ``anchor`` (s(anchor) = 0)."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    t_a = default_anchor(spec) if anchor is None else float(anchor)
    if spec.family == "CurvatureDriven":
        # integrated in arclength: unit speed by construction
        return grid - t_a
    # integrate piecewise between consecutive nodes, anchor inserted
    nodes = np.union1d(grid, [t_a])
    pieces = np.array([arclength(spec, a, b) for a, b in zip(nodes[:-1], nodes[1:])])
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    cum -= cum[np.searchsorted(nodes, t_a)]
    return cum[np.searchsorted(nodes, grid)]


def frames_on_grid(spec, grid, anchor=None, order=None, complete_last=False):
    """Frenet data at every grid point with arclength-centered curvature jets."""
    n = spec.dimension
    m = analysis_order(n) if order is None else order
    s_vals = arclength_grid(spec, grid, anchor)
    return [
        frenet_frame(_curves.evaluate(spec, t, m), s, complete_last=complete_last)
        for t, s in zip(grid, s_vals)
    ]
