import math

import mpmath
import numpy as np
import pytest

from rectify_nd import curves, frenet
from rectify_nd.errors import OrderTooLow, ResidualBelowTolerance

from oracles import gram_curvatures, helix_curvatures, mp_derivatives

R = math.sqrt


def test_e3_helix_frame_and_curvatures():
    spec = curves.explicit(["cos(t)", "sin(t)", "t"], (-2, 2))
    fd = frenet.frenet_frame(curves.evaluate(spec, 0.0, 6))
    E = fd.frame_values
    assert np.allclose(E[0], np.array([0, 1, 1]) / R(2), atol=1e-15)
    assert np.allclose(E[1], [-1, 0, 0], atol=1e-15)
    assert np.allclose(E[2], np.array([0, -1, 1]) / R(2), atol=1e-15)
    k, tau = helix_curvatures(1.0, 1.0)
    assert np.allclose(fd.curvature_values, [k, tau], atol=1e-15)


@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_circle_curvature(r):
    spec = curves.explicit([f"{r}*cos(t)", f"{r}*sin(t)"], (-1, 1))
    fd = frenet.frenet_frame(curves.evaluate(spec, 0.4, 3))
    assert fd.curvature_values[0] == pytest.approx(1 / r, rel=1e-14)


def test_planar_curve_in_e4_flags_vanishing_kappa2():
    spec = curves.explicit(["cos(t)", "sin(t)", "0", "0"], (-1, 1))
    with pytest.raises(ResidualBelowTolerance) as err:
        frenet.frenet_frame(curves.evaluate(spec, 0.3, 5))
    assert err.value.index == 2


def test_order_too_low():
    spec = curves.explicit(["cos(t)", "sin(t)", "t"], (-1, 1))
    with pytest.raises(OrderTooLow):
        frenet.frenet_frame(curves.evaluate(spec, 0.0, 3))


def test_last_vector_completion_at_vanishing_last_curvature():
    spec = curves.explicit(["cos(t)", "sin(t)", "0"], (-1, 1))
    fd = frenet.frenet_frame(curves.evaluate(spec, 0.2, 5), complete_last=True)
    assert np.linalg.det(fd.frame_values) == pytest.approx(1.0, abs=1e-14)
    assert fd.curvature_values[1] == pytest.approx(0.0, abs=1e-14)


def test_e5_curvatures_match_gram_determinants():
    exprs = ["cos(t)", "sin(2*t)/2", "t^3/3", "exp(t/2)", "t"]
    spec = curves.explicit(exprs, (-1, 1))
    mp_coords = [
        mpmath.cos,
        lambda t: mpmath.sin(2 * t) / 2,
        lambda t: t**3 / 3,
        lambda t: mpmath.exp(t / 2),
        lambda t: t,
    ]
    for t in (-0.6, 0.1, 0.8):
        fd = frenet.frenet_frame(curves.evaluate(spec, t, 9))
        want = gram_curvatures(mp_derivatives(mp_coords, t, 5))
        assert np.allclose(np.abs(fd.curvature_values), want, rtol=1e-9, atol=0)
        assert frenet.orthonormality_error(fd) < 1e-13
        assert frenet.frenet_equation_residual(fd) < 1e-10


def _sec_curve(n):
    if n == 4:
        inner = curves.spherical_helix([R(0.5), R(0.5)], [R(0.5), R(1.5)], (-3, 3))
    elif n == 5:
        inner = curves.spherical_helix([0.6, 0.6], [2 / 3, R(21) / 3], (-3, 3), c=R(0.28))
    else:
        inner = curves.spherical_helix([R(1 / 3)] * 3, [0.5, R(1.25), R(1.5)], (-3, 3))
    return curves.sec_scaled(inner, 1.0, 0.0, (-1.2, 1.2))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_sec_curves_frame_quality(n):
    spec = _sec_curve(n)
    for fd in frenet.frames_on_grid(spec, np.linspace(-1.2, 1.2, 13), complete_last=True):
        assert frenet.orthonormality_error(fd) < 1e-10
        assert frenet.frenet_equation_residual(fd) < 1e-8
        assert np.all(fd.curvature_values[:-1] > 0)


def test_reparameterization_invariance():
    a = curves.explicit(["cos(t)", "sin(2*t)/2", "t^3/3", "exp(t/2)"], (-1, 1))
    w = "(t+0.2*t^2)"
    b = curves.explicit([f"cos({w})", f"sin(2*{w})/2", f"{w}^3/3", f"exp({w}/2)"], (-1, 1))
    ga = np.linspace(-0.8, 0.8, 9)
    gb = (np.sqrt(1 + 0.8 * ga) - 1) / 0.4
    fa = frenet.frames_on_grid(a, ga, anchor=0.0)
    fb = frenet.frames_on_grid(b, gb, anchor=0.0)
    for x, y in zip(fa, fb):
        assert y.s == pytest.approx(x.s, abs=1e-12)
        for kx, ky in zip(x.curvatures, y.curvatures):
            assert np.allclose(kx.derivs, ky.derivs, rtol=1e-8, atol=1e-8)


def test_arclength_examples():
    helix = curves.spherical_helix([R(0.5), R(0.5)], [R(0.5), R(1.5)], (-3, 3))
    assert frenet.arclength(helix, 0.0, 2.0) == pytest.approx(2.0, abs=1e-13)
    sec = curves.sec_scaled(helix, 1.5, 0.2, (-1.2, 1.2))
    grid = np.linspace(-1.2, 1.2, 25)
    s = frenet.arclength_grid(sec, grid, anchor=0.0)
    assert np.allclose(s, 1.5 * (np.tan(grid + 0.2) - np.tan(0.2)), rtol=0, atol=1e-11)
    sec1 = curves.sec_scaled(helix, 1.0, 0.0, (-1.2, 1.2))
    assert frenet.speed(sec1, math.pi / 4) == pytest.approx(2.0, rel=1e-14)


def test_arclength_grid_rejects_unsorted():
    helix = curves.spherical_helix([R(0.5), R(0.5)], [R(0.5), R(1.5)], (-3, 3))
    with pytest.raises(ValueError):
        frenet.arclength_grid(helix, [0.0, -1.0])
