import math

import numpy as np
import pytest

from rectify_nd import frenet
from rectify_nd.errors import DomainError, SchemaError, StepTooLarge
from rectify_nd.frenetode import (
    CurvatureFunction,
    CurvatureProfile,
    integrate,
    position_jet_from_samples,
)


def const(v):
    return CurvatureFunction("constant", {"value": v})


def case_i():
    k3 = CurvatureFunction("inv_sqrt_quadratic", {"a": -1, "b": 1, "c": 0})
    return CurvatureProfile(4, (const(1), const(1), k3), (-1, 1))


def test_circle_closes():
    prof = CurvatureProfile(2, (const(1.0),), (0, 2 * math.pi))
    curve = integrate(prof, (0, 2 * math.pi), 1e-3)
    assert np.linalg.norm(curve.points[-1] - curve.points[0]) < 1e-9
    assert np.allclose(curve.frames[-1], np.eye(2), atol=1e-9)


def test_helix_radius():
    prof = CurvatureProfile(3, (const(0.5), const(0.5)), (0, 20))
    curve = integrate(prof, (0, 20), 1e-3)
    # axis is T + B (constant for kappa = tau); project it out
    axis = (curve.frames[0, 0] + curve.frames[0, 2]) / math.sqrt(2)
    flat = curve.points - np.outer(curve.points @ axis, axis)
    # least-squares circle: |x|^2 = 2 x.centre + const
    A = np.c_[2 * flat, np.ones(len(flat))]
    sol, *_ = np.linalg.lstsq(A, np.sum(flat**2, axis=1), rcond=None)
    centre = sol[:3]
    r = np.linalg.norm(flat - centre, axis=1)
    assert np.abs(r - 1).max() < 1e-7


def test_frames_stay_orthonormal():
    curve = integrate(case_i(), (-0.9, 0.9), 1e-2)
    for F in curve.frames:
        assert np.abs(F @ F.T - np.eye(4)).max() < 1e-12


def test_convergence_order():
    ends = [integrate(case_i(), (-0.9, 0.9), h).points[-1] for h in (0.05, 0.025, 0.0125)]
    order = math.log2(np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2]))
    assert order >= 3.7


def test_recovers_curvatures_from_positions():
    prof = case_i()
    curve = integrate(prof, (-0.9, 0.9), 1e-3)
    for s0 in np.linspace(-0.6, 0.6, 5):
        jv = position_jet_from_samples(curve.s, curve.points, s0, 5, 0.1)
        fd = frenet.frenet_frame(jv, s0)
        assert np.allclose(fd.curvature_values, prof.values(s0), atol=1e-6)


def test_jet_at_matches_profile():
    prof = case_i()
    curve = integrate(prof, (-0.9, 0.9), 1e-3)
    for s0 in (-0.5, 0.0123, 0.7):
        fd = frenet.frenet_frame(curve.jet_at(s0, 7), s0)
        for k, f in zip(fd.curvatures, prof.curvatures):
            assert np.allclose(k.derivs, f.jet(s0, k.order).derivs, atol=1e-11)


def test_range_outside_interval():
    with pytest.raises(DomainError):
        integrate(case_i(), (-0.9, 1.1), 1e-3)


def test_profile_leaving_domain_during_step():
    # validity interval claims more than the square root allows
    k3 = CurvatureFunction("inv_sqrt_quadratic", {"a": -1, "b": 1, "c": 0})
    prof = CurvatureProfile(4, (const(1), const(1), k3), (-1.5, 1.5))
    with pytest.raises(DomainError):
        integrate(prof, (0.0, 1.5), 1e-2)


def test_step_too_large():
    prof = CurvatureProfile(3, (const(50.0), const(50.0)), (0, 1))
    with pytest.raises(StepTooLarge):
        integrate(prof, (0, 1), 0.1)


def test_profile_positivity_and_round_trip():
    with pytest.raises(SchemaError):
        CurvatureProfile(3, (CurvatureFunction("expression", {"expr": "s"}), const(1)), (-1, 1))
    prof = case_i()
    again = CurvatureProfile.from_dict(prof.to_dict())
    assert np.array_equal(again.values(0.3), prof.values(0.3))


def test_sine_over_linear_removable_singularity():
    f = CurvatureFunction("sine_over_linear", {"c1": 1, "k": 1, "c2": 0, "c": 0})
    assert f.value(0.0) == 1.0
    assert f.jet(0.0, 3).derivs == pytest.approx([1, 0, -1 / 3, 0], abs=1e-15)
    assert f.value(0.5) == pytest.approx(math.sin(0.5) / 0.5, rel=1e-15)
