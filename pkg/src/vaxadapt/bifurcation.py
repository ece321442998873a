"""One- and two-parameter bifurcation data for the adaptive dynamics.

The equilibrium condition ``pi(P) - eps pi'(P)(1-P) = r`` can be solved for
either parameter, so each one-parameter diagram has a closed-form branch:

* in r at fixed eps: ``r(P) = pi(P) - eps pi'(P)(1-P)``
* in eps at fixed r: ``eps(P) = (pi(P) - r) / (pi'(P)(1-P))``

Sweeps emit that closed form next to per-sample solver output so the two can
be compared. Saddle-node events are located where the solver's root count
jumps by two, and cross-checked against the tangency curve, which is where
f and f' vanish together.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curves import PayoffCurve
from .dynamics import ModelParams, rhs, rhs_dP
from .equilibria import DEFAULT_GRID_N, DEFAULT_TOL, EquilibriumSet, classify, find_all
from .errors import NumericalError, ParameterError, PreconditionError
from .roots import hybrid_root

__all__ = [
    "BranchPoint",
    "SaddleNodeEvent",
    "Diagram",
    "TangencyPoint",
    "TangencyCurve",
    "sweep_r",
    "sweep_eps",
    "detect_saddle_nodes",
    "tangency_curve",
    "surface",
    "track_branches",
    "closed_form_r",
    "closed_form_eps",
]

DEFAULT_SWEEP_N = 500
DEFAULT_P_GRID_N = 2000
EVENT_BRACKET = 1e-8
DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class BranchPoint:
    param: float
    P: float
    classification: str
    boundary: bool = False


@dataclass(frozen=True)
class SaddleNodeEvent:
    """Fold location: swept parameter value and the P where the pair merges."""

    param: float
    P: float
    f: float = 0.0
    f_prime: float = 0.0
    kind: str = "fold"  # "appear" or "vanish" as the parameter increases


@dataclass
class Diagram:
    """Bifurcation diagram along one parameter axis.

    ``points`` come from the solver at each sweep value, ``closed_form`` from
    the analytic branch on a P-grid. ``counts`` holds the number of
    sign-changing roots per sweep value.
    """

    axis: str
    fixed_value: float
    points: list[BranchPoint]
    closed_form: list[BranchPoint]
    events: list[SaddleNodeEvent] = field(default_factory=list)
    counts: list[tuple[float, int]] = field(default_factory=list)
    curve: PayoffCurve | None = field(default=None, repr=False)
    grid_n: int = DEFAULT_GRID_N
    tol: float = DEFAULT_TOL

    def params_at(self, value: float) -> ModelParams:
        if self.axis == "r":
            return ModelParams(value, self.fixed_value)
        return ModelParams(self.fixed_value, value)

    @property
    def sweep_values(self) -> list[float]:
        return [p for p, _ in self.counts]

    def branches(self, jump_cap: float | None = None) -> list[list[BranchPoint]]:
        return track_branches(self.points, jump_cap)


@dataclass(frozen=True)
class TangencyPoint:
    P: float
    eps: float
    r: float
    feasible: bool


@dataclass(frozen=True)
class TangencyCurve:
    points: tuple[TangencyPoint, ...]
    skipped: int = 0

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def feasible(self) -> list[TangencyPoint]:
        return [t for t in self.points if t.feasible]


# ----------------------------------------------------------------------------
# closed forms


def closed_form_r(curve: PayoffCurve, eps: float, P):
    """r at which P is an equilibrium for the given eps."""
    P = np.asarray(P, dtype=float)
    return curve.pi(P) - eps * curve.dpi(P) * (1.0 - P)


def closed_form_eps(curve: PayoffCurve, r: float, P):
    """eps at which P is an equilibrium for the given r (nan where pi'(P)(1-P) = 0)."""
    P = np.asarray(P, dtype=float)
    den = curve.dpi(P) * (1.0 - P)
    num = curve.pi(P) - r
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(np.abs(den) > 0.0, num / np.where(den == 0.0, 1.0, den), np.nan)
    return out


def _open_grid(p_star: float, n: int) -> np.ndarray:
    """n points strictly inside (0, p_star)."""
    return p_star * np.arange(1, n + 1) / (n + 1)


def _clip_branch(P, values, lo, hi, curve, to_params, axis_value_ok=lambda v: True):
    """Keep branch samples whose parameter lies in [lo, hi]; flag the ones next to a cut."""
    inside = np.isfinite(values) & (values >= lo) & (values <= hi)
    pts = []
    n = len(P)
    for i in np.nonzero(inside)[0]:
        edge = (i > 0 and not inside[i - 1]) or (i < n - 1 and not inside[i + 1])
        edge = edge or values[i] == lo or values[i] == hi
        fp = rhs_dP(curve, to_params(float(values[i])), float(P[i]))
        pts.append(BranchPoint(float(values[i]), float(P[i]), classify(fp), bool(edge)))
    pts.sort(key=lambda b: (b.param, b.P))
    return pts


# ----------------------------------------------------------------------------
# sweeps


def _solve_grid(curve, to_params, grid, grid_n, tol, threads):
    def solve(v):
        return find_all(curve, to_params(float(v)), grid_n, tol)

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(solve, grid))
    return [solve(v) for v in grid]


def _assemble(axis, fixed, curve, grid, sets: list[EquilibriumSet], closed, grid_n, tol, refine):
    points = [BranchPoint(float(v), e.P, e.classification) for v, s in zip(grid, sets) for e in s]
    points.sort(key=lambda b: (b.param, b.P))
    counts = [(float(v), s.n_crossings) for v, s in zip(grid, sets)]
    diagram = Diagram(axis, float(fixed), points, closed, [], counts, curve, grid_n, tol)
    if refine:
        diagram.events = detect_saddle_nodes(diagram)
    return diagram


def _check_grid(grid, lo, hi, name, open_lo=True, open_hi=True):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ParameterError(f"{name} must be a 1-d grid with at least 2 values")
    if np.any(np.diff(grid) <= 0):
        raise ParameterError(f"{name} must be strictly increasing")
    below = grid[0] <= lo if open_lo else grid[0] < lo
    above = grid[-1] >= hi if open_hi else grid[-1] > hi
    if below or above:
        raise ParameterError(f"{name} must lie inside the parameter range")
    return grid


def sweep_r(curve: PayoffCurve, eps: float, r_grid=None, p_grid_n: int = DEFAULT_P_GRID_N,
            grid_n: int = DEFAULT_GRID_N, tol: float = DEFAULT_TOL, threads: int | None = None,
            refine: bool = True) -> Diagram:
    """Bifurcation diagram in r at fixed eps."""
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"eps must lie in [0, 1], got {eps!r}")
    if r_grid is None:
        r_grid = np.linspace(0.0, 1.0, DEFAULT_SWEEP_N + 2)[1:-1]
    r_grid = _check_grid(r_grid, 0.0, 1.0, "r_grid")

    def to_params(v):
        return ModelParams(v, eps)

    P = _open_grid(curve.p_star, p_grid_n)
    closed = _clip_branch(P, closed_form_r(curve, eps, P), 0.0, 1.0, curve, to_params)
    sets = _solve_grid(curve, to_params, r_grid, grid_n, tol, threads)
    return _assemble("r", eps, curve, r_grid, sets, closed, grid_n, tol, refine)


def sweep_eps(curve: PayoffCurve, r: float, eps_grid=None, p_grid_n: int = DEFAULT_P_GRID_N,
              grid_n: int = DEFAULT_GRID_N, tol: float = DEFAULT_TOL, threads: int | None = None,
              refine: bool = True) -> Diagram:
    """Bifurcation diagram in eps at fixed r (requires 0 < r < 1)."""
    if r == 0.0:
        raise PreconditionError("sweep_eps needs r > 0: at r = 0 every P >= p_star is an equilibrium")
    if not 0.0 < r < 1.0:
        raise ParameterError(f"r must lie in (0, 1), got {r!r}")
    if eps_grid is None:
        eps_grid = np.linspace(0.0, 1.0, DEFAULT_SWEEP_N)
    eps_grid = _check_grid(eps_grid, 0.0, 1.0, "eps_grid", open_lo=False, open_hi=False)

    def to_params(v):
        return ModelParams(r, v)

    P = _open_grid(curve.p_star, p_grid_n)
    closed = _clip_branch(P, closed_form_eps(curve, r, P), 0.0, 1.0, curve, to_params)
    sets = _solve_grid(curve, to_params, eps_grid, grid_n, tol, threads)
    return _assemble("eps", r, curve, eps_grid, sets, closed, grid_n, tol, refine)


# ----------------------------------------------------------------------------
# saddle-node refinement


def _closest_pair(roots: list[float]) -> tuple[float, float]:
    gaps = np.diff(roots)
    k = int(np.argmin(gaps))
    return roots[k], roots[k + 1]


def _fold_point(curve, params, roots) -> tuple[float, float, float]:
    """Extremum of f between the two closest crossing roots: (P, f, f')."""
    a, b = _closest_pair(roots)

    def fp(x):
        return rhs_dP(curve, params, x)

    ga, gb = fp(a), fp(b)
    if (ga > 0) != (gb > 0) and ga != 0.0 and gb != 0.0:
        P = hybrid_root(fp, a, b, ga, gb, xtol=1e-15, ftol=0.0)
    else:
        P = 0.5 * (a + b)
    return P, rhs(curve, params, P), fp(P)


def detect_saddle_nodes(diagram: Diagram, bracket: float = EVENT_BRACKET) -> list[SaddleNodeEvent]:
    """Locate parameter values where the root count changes by two.

    Each jump between adjacent sweep samples is bisected on the count until
    the transition is bracketed to `bracket`; the event's P is the extremum
    of f between the colliding pair on the side where the pair exists.
    An odd count change raises NumericalError.
    """
    curve = diagram.curve
    if curve is None:
        raise PreconditionError("diagram carries no curve; produce it with sweep_r or sweep_eps")

    def crossings(v):
        s = find_all(curve, diagram.params_at(v), diagram.grid_n, diagram.tol)
        return s.n_crossings, [e.P for e in s if e.crossing]

    events: list[SaddleNodeEvent] = []

    def refine(lo, c_lo, hi, c_hi):
        if c_lo == c_hi:
            return
        if (c_lo - c_hi) % 2:
            raise NumericalError(
                f"root count changes by an odd number ({c_lo} -> {c_hi}) on "
                f"[{lo!r}, {hi!r}] along {diagram.axis}; a root left through the boundary "
                "or a tolerance failed")
        if hi - lo <= bracket:
            c_pair, v_pair = (c_lo, lo) if c_lo > c_hi else (c_hi, hi)
            _, roots = crossings(v_pair)
            params = diagram.params_at(v_pair)
            P, fv, fpv = _fold_point(curve, params, roots)
            kind = "appear" if c_hi > c_lo else "vanish"
            events.append(SaddleNodeEvent(0.5 * (lo + hi), P, fv, fpv, kind))
            return
        mid = 0.5 * (lo + hi)
        c_mid, _ = crossings(mid)
        if abs(c_lo - c_hi) > 2 and c_mid not in (c_lo, c_hi):
            refine(lo, c_lo, mid, c_mid)
            refine(mid, c_mid, hi, c_hi)
        elif c_mid == c_lo:
            refine(mid, c_mid, hi, c_hi)
        else:
            refine(lo, c_lo, mid, c_mid)
            if c_mid != c_hi:
                refine(mid, c_mid, hi, c_hi)

    for (v0, c0), (v1, c1) in zip(diagram.counts[:-1], diagram.counts[1:]):
        refine(v0, c0, v1, c1)
    events.sort(key=lambda e: (e.param, e.P))
    return events


# ----------------------------------------------------------------------------
# two-parameter objects


def tangency_curve(curve: PayoffCurve, P_grid) -> TangencyCurve:
    """Parameter pairs (eps, r) at which P is a degenerate equilibrium.

    Solves ``eps pi'(1-P) + r = pi`` and ``eps (pi''(1-P) - pi') = pi'``
    for each P; samples whose denominator ``pi''(1-P) - pi'`` is below
    1e-12 in magnitude are skipped and counted.
    """
    P = np.asarray(P_grid, dtype=float)
    if np.any((P <= 0.0) | (P >= curve.p_star)):
        raise ParameterError("P_grid must lie inside (0, p_star)")
    pi, d1, d2 = curve.pi(P), curve.dpi(P), curve.d2pi(P)
    den = d2 * (1.0 - P) - d1
    ok = np.abs(den) >= DENOMINATOR_FLOOR
    pts = []
    for p, a, b, c, dn in zip(P[ok], pi[ok], d1[ok], d2[ok], den[ok]):
        eps = b / dn
        r = a - b * b * (1.0 - p) / dn
        pts.append(TangencyPoint(float(p), float(eps), float(r), bool(0.0 <= eps <= 1.0 and 0.0 < r < 1.0)))
    return TangencyCurve(tuple(pts), int(np.count_nonzero(~ok)))


def surface(curve: PayoffCurve, P_grid, eps_grid) -> np.ndarray:
    """Equilibrium surface samples as rows ``(P, eps, r)`` with r in (0, 1).

    Rows are ordered by P, then eps.
    """
    P = np.asarray(P_grid, dtype=float)
    E = np.asarray(eps_grid, dtype=float)
    P = P[(P >= 0.0) & (P < curve.p_star)]
    if np.any((E < 0.0) | (E > 1.0)):
        raise ParameterError("eps_grid must lie in [0, 1]")
    PP, EE = np.meshgrid(P, E, indexing="ij")
    R = curve.pi(PP.ravel()) - EE.ravel() * curve.dpi(PP.ravel()) * (1.0 - PP.ravel())
    keep = (R > 0.0) & (R < 1.0)
    return np.column_stack([PP.ravel()[keep], EE.ravel()[keep], R[keep]])


def track_branches(points: list[BranchPoint], jump_cap: float | None = None) -> list[list[BranchPoint]]:
    """Group diagram points into branches by nearest-neighbour matching in P.

    Samples are visited in parameter order; a point continues the open branch
    whose last P is nearest, if within `jump_cap`, otherwise it starts a new
    branch. The default cap is five times the mean spacing of the sweep.
    """
    params = sorted({p.param for p in points})
    if jump_cap is None:
        jump_cap = 5.0 * (params[-1] - params[0]) / max(len(params) - 1, 1) if len(params) > 1 else np.inf
    by_param: dict[float, list[BranchPoint]] = {}
    for p in points:
        by_param.setdefault(p.param, []).append(p)
    branches: list[list[BranchPoint]] = []
    open_ids: list[int] = []
    for v in params:
        current = sorted(by_param[v], key=lambda b: b.P)
        pairs = sorted(
            ((abs(branches[k][-1].P - pt.P), k, j) for k in open_ids for j, pt in enumerate(current)),
            key=lambda t: t[0])
        used_b, used_p, next_open = set(), set(), []
        for d, k, j in pairs:
            if d > jump_cap or k in used_b or j in used_p:
                continue
            branches[k].append(current[j])
            used_b.add(k)
            used_p.add(j)
            next_open.append(k)
        for j, pt in enumerate(current):
            if j not in used_p:
                branches.append([pt])
                next_open.append(len(branches) - 1)
        open_ids = next_open
    return branches
