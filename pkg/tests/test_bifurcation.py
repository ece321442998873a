import numpy as np
import pytest

from vaxadapt import (ModelParams, NumericalError, ParameterError, PreconditionError, find_all, rhs,
                      rhs_dP, surface, sweep_eps, sweep_r, tangency_curve, track_branches)
from vaxadapt.bifurcation import Diagram, closed_form_eps, closed_form_r, detect_saddle_nodes


@pytest.fixture(scope="module")
def ex2_r_sweep(ex2):
    return sweep_r(ex2, 0.188, np.linspace(0.55, 0.99, 89))


@pytest.fixture(scope="module")
def ex2_eps_sweep(ex2):
    return sweep_eps(ex2, 0.909, np.linspace(0.0, 1.0, 101))


def residual(curve, diagram, pt):
    return rhs(curve, diagram.params_at(pt.param), pt.P)


def test_closed_form_r_at_eps_zero(ex1):
    P = np.linspace(0.01, 0.79, 50)
    np.testing.assert_array_equal(closed_form_r(ex1, 0.0, P), ex1.pi(P))


def test_closed_form_eps_zero_where_pi_equals_r(ex1):
    P = 0.3
    assert closed_form_eps(ex1, float(ex1.pi(P)), P) == 0.0


def test_sweep_residuals(ex2, ex2_r_sweep, ex2_eps_sweep):
    for d in (ex2_r_sweep, ex2_eps_sweep):
        assert d.points and d.closed_form
        for pt in d.points + d.closed_form:
            assert abs(residual(ex2, d, pt)) <= 1e-8
        assert all(0 <= pt.param <= 1 for pt in d.closed_form)
        keys = [(p.param, p.P) for p in d.points]
        assert keys == sorted(keys)


def test_solver_points_lie_on_closed_form(ex2, ex2_r_sweep):
    for pt in ex2_r_sweep.points:
        assert closed_form_r(ex2, 0.188, pt.P) == pytest.approx(pt.param, abs=1e-8)


def test_alternation_along_fibers(ex2_r_sweep, ex2_eps_sweep):
    for d in (ex2_r_sweep, ex2_eps_sweep):
        fibers = {}
        for p in d.points:
            fibers.setdefault(p.param, []).append(p.classification)
        for classes in fibers.values():
            if "degenerate" not in classes:
                assert len(classes) % 2 == 1
                assert classes == ["stable", "unstable"] * (len(classes) // 2) + ["stable"]


def test_example2_three_branch_window(ex2_eps_sweep):
    counts = dict(ex2_eps_sweep.counts)
    near = [c for v, c in counts.items() if abs(v - 0.188) <= 0.02]
    assert near and all(c == 3 for c in near)


def test_events_are_tangencies(ex2, ex2_r_sweep, ex2_eps_sweep):
    for d in (ex2_r_sweep, ex2_eps_sweep):
        assert d.events
        for e in d.events:
            p = d.params_at(e.param)
            assert abs(rhs(ex2, p, e.P)) <= 1e-6
            assert abs(rhs_dP(ex2, p, e.P)) <= 1e-6
            assert d.sweep_values[0] < e.param < d.sweep_values[-1]


def test_colliding_roots_are_close(ex2, ex2_r_sweep):
    for e in ex2_r_sweep.events:
        sides = [find_all(ex2, ModelParams(e.param + s, 0.188)).roots for s in (-2e-8, 2e-8)]
        pair_side = max(sides, key=len)
        gaps = np.diff(pair_side)
        assert gaps.min() < 1e-3


def test_monotone_structure_after_fold(ex2, ex2_r_sweep):
    # past an appearing fold the stable root decreases and the unstable one increases in r
    e = next(ev for ev in ex2_r_sweep.events if ev.kind == "appear")
    rs = e.param + np.array([1e-4, 1e-3, 5e-3, 1e-2])
    stable, unstable = [], []
    for r in rs:
        eqs = find_all(ex2, ModelParams(r, 0.188))
        pair = sorted(eqs, key=lambda q: abs(q.P - e.P))[:2]
        stable.append(next(q.P for q in pair if q.stable))
        unstable.append(next(q.P for q in pair if q.classification == "unstable"))
    assert np.all(np.diff(stable) < 0)
    assert np.all(np.diff(unstable) > 0)


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
def test_convex_has_no_events(convex, eps):
    d = sweep_r(convex, eps, np.linspace(0.02, 0.98, 40))
    assert d.events == []
    assert all(c == 1 for _, c in d.counts)
    d = sweep_eps(convex, 0.4, np.linspace(0, 1, 30))
    assert detect_saddle_nodes(d) == []


def test_convex_tangency_infeasible_or_unique(convex):
    tc = tangency_curve(convex, np.linspace(0.01, 0.79, 200))
    for t in tc.feasible():
        assert len(find_all(convex, ModelParams(t.r, t.eps))) == 1


def test_tangency_residuals(ex2, ex1):
    for c in (ex1, ex2):
        P = np.linspace(1e-3, c.p_star - 1e-3, 3000)
        tc = tangency_curve(c, P)
        assert len(tc) + tc.skipped == len(P)
        for t in tc:
            pi, d1, d2 = c.pi(t.P), c.dpi(t.P), c.d2pi(t.P)
            scale = max(1.0, abs(t.eps) * max(abs(d1), abs(d2)))
            assert abs(t.eps * d1 * (1 - t.P) + t.r - pi) <= 1e-9 * scale
            assert abs(t.eps * (d2 * (1 - t.P) - d1) - d1) <= 1e-9 * scale
            assert t.feasible == (0 <= t.eps <= 1 and 0 < t.r < 1)
    assert tangency_curve(ex2, P).feasible()


def test_tangency_rejects_grid_outside(ex2):
    with pytest.raises(ParameterError):
        tangency_curve(ex2, [0.0, 0.3])


def test_surface_sections(ex2):
    P = np.linspace(0.005, 0.56, 112)
    E = np.linspace(0, 1, 41)
    S = surface(ex2, P, E)
    assert np.all((S[:, 2] > 0) & (S[:, 2] < 1))
    for Pv, ev, rv in S[::37]:
        assert rhs(ex2, ModelParams(rv, ev), Pv) == pytest.approx(0.0, abs=1e-12)
    # eps = const section reproduces the r-branch
    sec = S[S[:, 1] == E[10]]
    np.testing.assert_array_equal(sec[:, 2], closed_form_r(ex2, E[10], sec[:, 0]))
    # r = const level set, extracted by interpolation in eps, reproduces the eps-branch
    r0 = 0.8
    for Pv in P[::7]:
        rows = S[S[:, 0] == Pv]
        if len(rows) < 2:
            continue
        e, r = rows[:, 1], rows[:, 2]
        for k in range(len(r) - 1):
            if (r[k] - r0) * (r[k + 1] - r0) < 0 and e[k + 1] - e[k] < 0.03:
                e_level = e[k] + (r0 - r[k]) * (e[k + 1] - e[k]) / (r[k + 1] - r[k])
                assert e_level == pytest.approx(float(closed_form_eps(ex2, r0, Pv)), abs=1e-8)


def test_sweep_argument_checks(ex2):
    with pytest.raises(PreconditionError):
        sweep_eps(ex2, 0.0, np.linspace(0, 1, 5))
    with pytest.raises(ParameterError):
        sweep_r(ex2, 0.2, [0.5, 0.4])
    with pytest.raises(ParameterError):
        sweep_r(ex2, 0.2, [0.0, 0.4])
    with pytest.raises(ParameterError):
        sweep_r(ex2, 1.5, [0.1, 0.4])


def test_odd_count_change_is_diagnosed(ex2):
    d = Diagram("r", 0.188, [], [], counts=[(0.6, 1), (0.7, 2)], curve=ex2)
    with pytest.raises(NumericalError):
        detect_saddle_nodes(d)
    with pytest.raises(PreconditionError):
        detect_saddle_nodes(Diagram("r", 0.188, [], [], counts=[(0.6, 1), (0.7, 3)]))


def test_threads_do_not_change_output(ex2):
    grid = np.linspace(0.6, 0.9, 25)
    a = sweep_r(ex2, 0.188, grid, threads=1, refine=False)
    b = sweep_r(ex2, 0.188, grid, threads=4, refine=False)
    assert a.points == b.points and a.counts == b.counts


def test_branch_tracking(ex2_eps_sweep):
    branches = track_branches(ex2_eps_sweep.points)
    assert sum(len(b) for b in branches) == len(ex2_eps_sweep.points)
    for b in branches:
        assert all(x.param < y.param for x, y in zip(b, b[1:]))
    longest = max(branches, key=len)
    assert len(longest) >= 50
