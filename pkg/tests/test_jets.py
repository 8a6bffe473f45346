import math
import zlib

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectify_nd.errors import CenterMismatch, DivisionNearZero, DomainError, OrderTooLow
from rectify_nd.jets import (
    Jet,
    JetVector,
    compose,
    jet_add,
    jet_cos,
    jet_exp,
    jet_mul,
    jet_reciprocal,
    jet_sec,
    jet_sin,
    jet_sinc,
    jet_sqrt,
    jet_tan,
)

from oracles import richardson_derivative


def test_add_examples():
    assert np.array_equal(jet_add(Jet(0, [1, 2]), Jet(0, [3, 4])).derivs, [4, 6])
    x = Jet(0.5, [1.5, -2.0, 7.0])
    assert np.array_equal(jet_add(Jet(0.5, [0, 0, 0]), x).derivs, x.derivs)
    s = Jet(0, [0, 1, 0])
    c = Jet(0, [1, 0, -1])
    assert np.array_equal(jet_add(s, c).derivs, [1, 1, -1])


def test_mul_examples():
    s = Jet(0, [0, 1, 0])
    c = Jet(0, [1, 0, -1])
    assert np.array_equal(jet_mul(s, c).derivs, [0, 1, 0])
    x = Jet(1.0, [2.0, 3.0, 5.0])
    assert np.array_equal(jet_mul(x, Jet.constant(1.0, 1.0, 2)).derivs, x.derivs)
    t = Jet(0, [0, 1, 0])
    assert np.array_equal(jet_mul(t, t).derivs, [0, 0, 2])


def test_reciprocal_examples():
    assert np.array_equal(jet_reciprocal(Jet(0, [2, 0, 0])).derivs, [0.5, 0, 0])
    # 1/(1+t): f' = -1/(1+t)^2, f'' = 2/(1+t)^3
    assert np.allclose(jet_reciprocal(Jet(0, [1, 1, 0])).derivs, [1, -1, 2], rtol=0, atol=1e-15)
    with pytest.raises(DivisionNearZero):
        jet_reciprocal(Jet(0, [0.0, 1.0]))


def test_sqrt_sec_sin_examples():
    assert np.array_equal(jet_sqrt(Jet(0, [4.0])).derivs, [2.0])
    # sec(0) = 1, sec'(0) = 0, sec''(0) = 1
    assert np.allclose(jet_sec(Jet.variable(0.0, 2)).derivs, [1, 0, 1], atol=1e-15)
    assert np.allclose(jet_sin(Jet.variable(0.0, 3)).derivs, [0, 1, 0, -1], atol=1e-15)
    with pytest.raises(DomainError):
        jet_sqrt(Jet(0, [0.0, 1.0]))
    with pytest.raises(DomainError):
        jet_sec(Jet.variable(math.pi / 2, 2))


def test_mixed_order_truncates():
    a = Jet(0, [1, 2, 3, 4])
    b = Jet(0, [1, 1])
    assert (a + b).order == 1
    assert (a * b).order == 1


def test_center_mismatch():
    with pytest.raises(CenterMismatch):
        Jet(0.0, [1.0]) + Jet(1.0, [1.0])


def test_derivative_of_order_zero():
    with pytest.raises(OrderTooLow):
        Jet(0.0, [1.0]).derivative()


def test_nonfinite_rejected():
    with pytest.raises(DomainError):
        Jet(0.0, [np.inf])


def _poly_derivs(coeffs, x, m):
    out = []
    for k in range(m + 1):
        total = 0
        for i, c in enumerate(coeffs):
            if i >= k:
                total += c * math.factorial(i) // math.factorial(i - k) * x ** (i - k)
        out.append(total)
    return out


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


small_poly = st.lists(st.integers(-5, 5), min_size=1, max_size=4)


@given(small_poly, small_poly, st.integers(-2, 2), st.integers(0, 6))
@settings(max_examples=200, deadline=None)
def test_leibniz_exact_on_integer_polynomials(p, q, x, m):
    a = Jet(x, _poly_derivs(p, x, m))
    b = Jet(x, _poly_derivs(q, x, m))
    expected = _poly_derivs(_poly_mul(p, q), x, m)
    assert jet_mul(a, b).derivs.tolist() == [float(e) for e in expected]


@given(
    st.floats(0.2, 5.0),
    st.lists(st.floats(-1, 1), min_size=4, max_size=4),
)
@settings(max_examples=200, deadline=None)
def test_reciprocal_and_sqrt_round_trip(v0, tail):
    a = Jet(0.3, [v0] + tail)
    inv = jet_reciprocal(a)
    # round-off bound: the same Leibniz sums taken over absolute values
    scale = jet_mul(Jet(0.3, np.abs(inv.derivs)), Jet(0.3, np.abs(a.derivs))).derivs
    one = jet_mul(inv, a).derivs
    assert np.all(np.abs(one - [1, 0, 0, 0, 0]) <= 1e-12 * scale)
    r = jet_sqrt(a)
    scale = jet_mul(Jet(0.3, np.abs(r.derivs)), Jet(0.3, np.abs(r.derivs))).derivs
    assert np.all(np.abs(jet_mul(r, r).derivs - a.derivs) <= 1e-12 * scale)


def test_integer_power_and_division():
    t = Jet.variable(2.0, 3)
    assert np.allclose((t**3).derivs, [8, 12, 12, 6])
    assert np.allclose((t ** -1).derivs, jet_reciprocal(t).derivs)
    assert np.allclose((1.0 / t).derivs, jet_reciprocal(t).derivs)
    assert np.allclose((t / t).derivs, [1, 0, 0, 0], atol=1e-15)


def test_compose_matches_direct_sin():
    a = Jet(0.2, [0.7, 1.3, -0.4, 0.9])
    x = a.value
    fd = [math.sin(x), math.cos(x), -math.sin(x), -math.cos(x)]
    assert np.allclose(compose(fd, a).derivs, jet_sin(a).derivs, atol=1e-14)


def test_sinc_continuous_across_switch():
    lo = jet_sinc(Jet.variable(0.5 - 1e-9, 5)).derivs
    hi = jet_sinc(Jet.variable(0.5 + 1e-9, 5)).derivs
    assert np.allclose(lo, hi, rtol=1e-7, atol=1e-9)
    assert np.allclose(jet_sinc(Jet.variable(0.0, 4)).derivs, [1, 0, -1 / 3, 0, 1 / 5], atol=1e-15)


def test_jetvector_dot_and_norm():
    t = Jet.variable(0.3, 3)
    circle = JetVector.from_jets([jet_cos(t), jet_sin(t)])
    assert np.allclose(circle.norm().derivs, [1, 0, 0, 0], atol=1e-15)
    tangent = circle.derivative()
    assert np.allclose(circle.dot(tangent).derivs, [0, 0, 0], atol=1e-15)
    scaled = circle.scale(Jet.constant(2.0, 0.3, 3))
    assert np.allclose(scaled.value, 2 * circle.value)


# Reference functions for the finite-difference oracle, evaluated in mpmath.
ELEMENTARY = {
    "reciprocal": (jet_reciprocal, lambda x: 1 / x, lambda rng: rng.choice([-1, 1]) * rng.uniform(0.3, 3.0)),
    "sqrt": (jet_sqrt, mpmath.sqrt, lambda rng: rng.uniform(0.2, 5.0)),
    "sin": (jet_sin, mpmath.sin, lambda rng: rng.uniform(-4, 4)),
    "cos": (jet_cos, mpmath.cos, lambda rng: rng.uniform(-4, 4)),
    "sec": (jet_sec, mpmath.sec, lambda rng: rng.uniform(-1.3, 1.3)),
    "tan": (jet_tan, mpmath.tan, lambda rng: rng.uniform(-1.3, 1.3)),
    "exp": (jet_exp, mpmath.exp, lambda rng: rng.uniform(-3, 3)),
    "sinc": (jet_sinc, lambda x: mpmath.sin(x) / x if x != 0 else mpmath.mpf(1), lambda rng: rng.uniform(-2, 2)),
}


@pytest.mark.parametrize("name", sorted(ELEMENTARY))
def test_elementary_against_richardson(name):
    jet_fn, ref, sampler = ELEMENTARY[name]
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    for _ in range(25):
        x0 = sampler(rng)
        # inner map t -> x0 + (t - t0) + 0.3 (t - t0)^2 exercises the chain rule
        t0 = rng.uniform(-1, 1)
        inner = Jet(t0, [x0, 1.0, 0.6, 0.0, 0.0])
        got = jet_fn(inner).derivs

        def composite(t):
            u = t - t0
            return ref(x0 + u + mpmath.mpf("0.3") * u * u)

        for k in range(5):
            want = richardson_derivative(composite, t0, k)
            assert abs(got[k] - want) <= 1e-6 * abs(want) + 1e-12, (name, x0, k, got[k], want)
