import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vaxadapt import QuadratureError, bump, bump_prime, glue, glue_primitive
from vaxadapt.glue import GlueKernel, adaptive_simpson

mp.mp.dps = 30


def mp_primitive(x):
    if x <= -1:
        return mp.mpf(0)
    return mp.quad(lambda t: mp.exp(1 / (t * t - 1)), [-1, min(x, 1)])


H1_EXACT = float(mp_primitive(1))


def test_bump_values():
    assert bump(0.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert bump(1.0) == 0.0
    assert bump(-2.0) == 0.0
    assert np.all(bump(np.array([-1.5, -1.0, 1.0, 3.0])) == 0.0)


def test_bump_prime_matches_finite_difference():
    t = np.linspace(-0.95, 0.95, 77)
    h = 1e-6
    fd = (bump(t + h) - bump(t - h)) / (2 * h)
    np.testing.assert_allclose(bump_prime(t), fd, atol=1e-8)


def test_bump_prime_near_support_edge_is_finite():
    t = np.array([-1 + 1e-300, -1 + 1e-12, 1 - 1e-9, 0.999999])
    assert np.all(np.isfinite(bump_prime(t)))


def test_adaptive_simpson_known_integrals():
    assert adaptive_simpson(math.sin, 0.0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-12)
    assert adaptive_simpson(math.exp, 0.0, 1.0, 1e-12) == pytest.approx(math.e - 1, abs=1e-12)
    assert adaptive_simpson(math.exp, 1.0, 1.0) == 0.0


def test_adaptive_simpson_reports_nonconvergence():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: math.sin(50 * x), 0.0, 3.0, 1e-14, max_depth=8)
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: math.sin(50 * x), 0.0, 3.0, 1e-14, max_evals=50)


def test_kernel_constant_against_high_precision(kernel):
    assert kernel.H1 == pytest.approx(H1_EXACT, abs=1e-13)
    assert kernel.H1 > 0


def test_glue_primitive_examples(kernel):
    assert glue_primitive(-1.0) == 0.0
    assert glue_primitive(-3.0) == 0.0
    assert glue_primitive(5.0) == kernel.H1
    # reference value of the normalising constant
    assert glue_primitive(1.0) == pytest.approx(1 / 2.2522836206907613, abs=1e-9)
    assert glue_primitive(0.0) == pytest.approx(kernel.H1 / 2, abs=1e-12)


@pytest.mark.parametrize("x", [-0.999, -0.95, -0.7, -0.3, -0.01, 0.2, 0.61, 0.9, 0.9999])
def test_primitive_routes_against_mpmath(kernel, x):
    exact = float(mp_primitive(x))
    assert kernel.primitive(x) == pytest.approx(exact, abs=1e-12)
    assert kernel.primitive_array(np.array([x]))[0] == pytest.approx(exact, abs=1e-14)
    assert kernel.primitive_array(x) == pytest.approx(exact, abs=1e-14)


def test_primitive_is_monotone(kernel):
    x = np.linspace(-1.2, 1.2, 5001)
    assert np.all(np.diff(kernel.primitive_array(x)) >= 0)


def test_glue_endpoints():
    assert glue(0.0) == 0.0
    assert glue(1.0) == 1.0
    assert glue(-0.5) == 0.0
    assert glue(1.5) == 1.0
    assert glue(0.5) == pytest.approx(0.5, abs=1e-14)


def test_glue_strictly_increasing_inside(kernel):
    x = np.linspace(0.01, 0.99, 999)
    assert np.all(np.diff(kernel.glue(x)) > 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0))
def test_glue_reflection_symmetry(x):
    assert glue(x) + glue(1.0 - x) == pytest.approx(1.0, abs=1e-10)


def test_glue_derivatives_against_finite_differences(kernel):
    x = np.linspace(0.02, 0.98, 97)
    h = 1e-6
    np.testing.assert_allclose(kernel.glue_prime(x), (kernel.glue(x + h) - kernel.glue(x - h)) / (2 * h),
                               atol=1e-7)
    np.testing.assert_allclose(kernel.glue_second(x),
                               (kernel.glue_prime(x + h) - kernel.glue_prime(x - h)) / (2 * h), atol=1e-6)


def test_scalar_and_array_paths_agree(kernel):
    x = np.linspace(-0.2, 1.2, 701)
    arr = kernel.glue(x)
    assert max(abs(kernel.glue(float(v)) - a) for v, a in zip(x, arr)) < 1e-15
    arr2 = kernel.glue_second(x)
    assert max(abs(kernel.glue_second(float(v)) - a) for v, a in zip(x, arr2)) < 1e-12


def test_kernel_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        GlueKernel(quadrature_abs_tol=0.0)
