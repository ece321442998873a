import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from vaxadapt import (CurveFamilySpec, ParameterError, PayoffCurve, make_convex_test, make_curve,
                      make_rational_glue, validate)
from vaxadapt.curves import derivative_errors

mp.mp.dps = 30
INV_H1 = float(1 / mp.quad(lambda t: mp.exp(1 / (t * t - 1)), [-1, 0, 1]))


def h(t):
    return math.exp(1 / (t * t - 1)) if abs(t) < 1 else 0.0


def expanded_derivative(x):
    """Expanded closed-form derivative of the second example, evaluated with scipy quad."""
    u = 8 * (2 * x - 1)
    integral = 0.0 if u <= -1 else quad(h, -1, min(u, 1), epsabs=1e-14, epsrel=1e-14)[0]
    cubic = (1 - 2 * x) ** 3 + 2
    return (-2 * (1 - 2 * x) ** 2 * (1 - integral * INV_H1)
            - 16 / 3 * h(u) * cubic * INV_H1)


def test_example1_values(ex1):
    assert ex1.pi(0.0) == 1.0
    assert ex1.pi(0.9) == 0.0
    assert ex1.p_star == 0.8
    # the switch is exactly 1/2 at the midpoint of [0.7, 0.8] (even kernel);
    # the rational factor there is (1 - 1/(5 * 0.25)) / (4/5) = 1/4
    assert ex1.pi(0.75) == pytest.approx(0.125, abs=1e-13)
    assert 0 < ex1.pi(0.75) < 0.25


def test_example1_raw_form(ex1_raw):
    assert ex1_raw.pi(0.0) == pytest.approx(0.8, abs=1e-15)
    assert ex1_raw.pi(0.75) == pytest.approx(0.1, abs=1e-13)
    rep = validate(ex1_raw, 1024)
    assert rep.failures() == [4]


def test_example1_plateau_matches_rational_factor(ex1):
    p = np.linspace(0, 0.7, 50)
    np.testing.assert_allclose(ex1.pi(p), (1 - 1 / (5 * (1 - p))) / 0.8, atol=1e-15)


def test_example1_switch_against_quadrature(ex1):
    for p in (0.71, 0.73, 0.76, 0.79):
        u = 20 * p - 15
        switch = 1 - quad(h, -1, u, epsabs=1e-14)[0] * INV_H1
        expected = (1 - 1 / (5 * (1 - p))) / 0.8 * switch
        assert ex1.pi(p) == pytest.approx(expected, abs=1e-12)


def test_example2_values(ex2):
    assert ex2.pi(0.0) == 1.0
    assert ex2.pi(0.6) == 0.0
    assert ex2.dpi(0.0) == pytest.approx(-2.0, abs=1e-15)
    assert ex2.p_star == 9 / 16
    assert ex2.pi(0.5) == pytest.approx(1 / 3, abs=1e-14)


def test_example2_derivative_matches_expanded_formula(ex2):
    grid = np.linspace(0, 1, 256)
    expected = np.array([expanded_derivative(x) if x < 9 / 16 else 0.0 for x in grid])
    np.testing.assert_allclose(ex2.dpi(grid), expected, rtol=0, atol=1e-9)


def test_convex_test_values(convex):
    assert convex.pi(0.0) == 1.0
    assert convex.pi(0.8) == 0.0
    assert convex.pi(0.4) == pytest.approx(0.125, abs=1e-15)
    assert convex.dpi(0.4) == pytest.approx(-3 / 0.8 * 0.25)
    assert convex.d2pi(0.4) == pytest.approx(6 / 0.64 * 0.5)
    assert convex.is_convex()


def test_convex_test_rejects_bad_parameters():
    for p_star, n in ((0.0, 3), (1.0, 3), (0.5, 1), (0.5, 2.5)):
        with pytest.raises(ParameterError):
            make_convex_test(p_star, n)


@pytest.mark.parametrize("name", ["example1", "example2", "convex_test"])
def test_curve_invariants_on_fine_grid(curves, name):
    c = curves[name]
    p = np.linspace(0, 1, 4096)
    pi, dpi = c.pi(p), c.dpi(p)
    assert np.all((pi >= 0) & (pi <= 1))
    assert np.all(dpi <= 1e-12)
    assert np.all(pi[p >= c.p_star] == 0.0)
    assert c.pi(0.0) == 1.0


@pytest.mark.parametrize("name", ["example1", "example2", "convex_test"])
def test_derivatives_against_finite_differences(curves, name):
    _, e1, e2 = derivative_errors(curves[name], np.linspace(0, 1, 4096))
    assert e1.max() <= 1e-5
    assert e2.max() <= 1e-5


def test_array_and_scalar_evaluation_agree(curves):
    p = np.linspace(0, 1, 301)
    for c in curves.values():
        for fn in (c.pi, c.dpi, c.d2pi):
            arr = fn(p)
            assert max(abs(fn(float(x)) - a) for x, a in zip(p, arr)) <= 1e-12 * max(1, np.abs(arr).max())


@pytest.mark.parametrize("name", ["example1", "example2", "convex_test"])
def test_validate_passes_builtin_curves(curves, name):
    rep = validate(curves[name], 1024)
    assert rep.passed, rep
    assert len(rep.checks) == 5


def test_validate_flags_broken_pi0(convex):
    broken = PayoffCurve(pi=lambda p: 0.9 * convex.pi(p), dpi=lambda p: 0.9 * convex.dpi(p),
                         d2pi=lambda p: 0.9 * convex.d2pi(p), p_star=0.8, label="broken",
                         breakpoints=(0.8,))
    rep = validate(broken, 256)
    assert not rep.passed
    assert rep.failures() == [4]
    assert rep[4].worst_violation == pytest.approx(0.1)


def test_validate_flags_wrong_derivative_and_increase(convex):
    bad = PayoffCurve(pi=lambda p: convex.pi(p), dpi=lambda p: 1.5 * convex.dpi(p) + 0.01,
                      d2pi=convex.d2pi, p_star=0.8, label="bad", breakpoints=(0.8,))
    rep = validate(bad, 256)
    assert 1 in rep.failures() and 3 in rep.failures()


def test_validate_rejects_tiny_grid(convex):
    with pytest.raises(ParameterError):
        validate(convex, 8)


def test_rational_glue_family(kernel):
    c = make_rational_glue(10.0, 0.8, 0.9, kernel)
    assert c.pi(0.0) == 1.0 and c.pi(0.9) == 0.0
    assert validate(c, 1024).passed
    with pytest.raises(ParameterError):
        make_rational_glue(5.0, 0.7, 0.85, kernel)  # exceeds 1 - 1/R0


@pytest.mark.parametrize("kwargs", [
    {"family": "nope"},
    {"family": "example1", "R0": 0.5},
    {"family": "example1", "transition_lo": 0.8, "transition_hi": 0.7},
    {"family": "convex_test", "exponent": 1},
])
def test_curve_family_spec_invariants(kwargs):
    with pytest.raises(ParameterError):
        CurveFamilySpec(**kwargs)


def test_make_curve_dispatch(kernel):
    assert make_curve(CurveFamilySpec.example1(), kernel).label == "example1"
    assert make_curve(CurveFamilySpec.example2(), kernel).label == "example2"
    c = make_curve(CurveFamilySpec("convex_test", p_star=0.6, exponent=4))
    assert c.p_star == 0.6 and c.pi(0.3) == pytest.approx(0.5 ** 4)
