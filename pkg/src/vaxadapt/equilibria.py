"""Equilibria of the adaptive dynamics: location, stability, sensitivities.

:func:`find_all` is the production solver (coarse scan on [0, p_star] plus
bracket refinement and a tangency probe). :func:`oracle_scan` is an
independent dense scan with plain bisection, kept for verification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import PayoffCurve
from .dynamics import ModelParams, rhs, rhs_dP
from .errors import DegenerateEquilibriumError, NumericalError, ParameterError, PreconditionError
from .roots import _sign_changes, bisect, hybrid_root

__all__ = [
    "Equilibrium",
    "EquilibriumSet",
    "ConvexBounds",
    "classify",
    "find_all",
    "oracle_scan",
    "sensitivity_r",
    "sensitivity_eps",
    "convex_bounds",
    "inverse_pi",
]

DEFAULT_GRID_N = 2048
DEFAULT_TOL = 1e-12
DEGENERACY_TOL = 1e-8


def classify(f_prime: float, degeneracy_tol: float = DEGENERACY_TOL) -> str:
    if f_prime < -degeneracy_tol:
        return "stable"
    if f_prime > degeneracy_tol:
        return "unstable"
    return "degenerate"


@dataclass(frozen=True)
class Equilibrium:
    """A root of f.

    ``crossing`` is False for tangency candidates: points where |f| dips
    close to zero without a sign change.
    """

    P: float
    f_prime: float
    classification: str
    crossing: bool = True

    @property
    def stable(self) -> bool:
        return self.classification == "stable"


@dataclass(frozen=True)
class EquilibriumSet:
    equilibria: tuple[Equilibrium, ...]
    params: ModelParams
    curve_label: str
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.equilibria)

    def __iter__(self):
        return iter(self.equilibria)

    def __getitem__(self, i):
        return self.equilibria[i]

    @property
    def roots(self) -> list[float]:
        return [e.P for e in self.equilibria]

    @property
    def n_crossings(self) -> int:
        """Number of sign-changing roots; always odd on a valid curve."""
        return sum(e.crossing for e in self.equilibria)

    @property
    def all_nondegenerate(self) -> bool:
        return all(e.classification != "degenerate" for e in self.equilibria)

    def alternates(self) -> bool:
        """True when classes run stable, unstable, stable, ... with odd count."""
        if len(self) % 2 == 0:
            return False
        expected = ("stable", "unstable")
        return all(e.classification == expected[i % 2] for i, e in enumerate(self.equilibria))

    def stable_points(self) -> list[float]:
        return [e.P for e in self.equilibria if e.stable]


def _require_positive_r(params: ModelParams):
    if not params.r > 0.0:
        raise PreconditionError(
            "r = 0 makes every P >= p_star an equilibrium (a continuum); use r > 0")


def _make_equilibrium(curve, params, P, crossing=True, degeneracy_tol=DEGENERACY_TOL):
    fp = rhs_dP(curve, params, P)
    return Equilibrium(P, fp, classify(fp, degeneracy_tol), crossing)


def find_all(curve: PayoffCurve, params: ModelParams, grid_n: int = DEFAULT_GRID_N,
             tol: float = DEFAULT_TOL, degeneracy_tol: float = DEGENERACY_TOL) -> EquilibriumSet:
    """All equilibria of f on [0, 1], ascending in P.

    Scans ``grid_n + 1`` points on [0, p_star] (f is the constant -r beyond),
    refines every sign change with :func:`hybrid_root`, and probes each strict
    local minimum of |f| that has no sign change around it. The probe solves
    f' = 0 there: if f changes sign at the extremum, the hidden pair of roots
    is refined as two crossings; if instead the extremum lies within
    ``sqrt(tol)`` of zero it is reported as a degenerate candidate.
    """
    if grid_n < 64:
        raise ParameterError("grid_n must be at least 64")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    _require_positive_r(params)

    def f(x):
        return rhs(curve, params, x)

    def fp(x):
        return rhs_dP(curve, params, x)

    grid = np.linspace(0.0, curve.p_star, grid_n + 1)
    values = rhs(curve, params, grid)
    brackets: list[tuple[float, float, float, float]] = []
    exact_idx = np.nonzero(values == 0.0)[0]
    # zeros landing exactly on grid nodes are taken as-is; neighbours are compared across them
    nz = np.nonzero(values != 0.0)[0]
    for j in _sign_changes(values[nz]):
        i0, i1 = nz[j], nz[j + 1]
        if i1 - i0 == 1:
            brackets.append((grid[i0], grid[i1], values[i0], values[i1]))
    candidates: list[float] = []
    diagnostics: list[str] = []

    absval = np.abs(values)
    interior = np.arange(1, grid_n)
    dips = interior[(absval[interior] < absval[interior - 1]) & (absval[interior] < absval[interior + 1])
                    & (values[interior - 1] * values[interior] > 0) & (values[interior + 1] * values[interior] > 0)]
    for i in dips:
        a, b = float(grid[i - 1]), float(grid[i + 1])
        ga, gb = fp(a), fp(b)
        if ga == 0.0 or gb == 0.0 or (ga > 0) == (gb > 0):
            # no interior extremum resolvable from f'; fall back to the grid point
            if absval[i] <= math.sqrt(tol):
                candidates.append(float(grid[i]))
            continue
        try:
            xm = hybrid_root(fp, a, b, ga, gb, xtol=tol, ftol=0.0)
        except NumericalError as exc:
            diagnostics.append(f"extremum search on [{a!r}, {b!r}] failed: {exc}")
            continue
        fm = f(xm)
        fa_, fb_ = float(values[i - 1]), float(values[i + 1])
        if fm == 0.0:
            candidates.append(xm)
        elif (fm > 0) != (fa_ > 0):
            brackets.append((a, xm, fa_, fm))
            brackets.append((xm, b, fm, fb_))
        elif abs(fm) <= math.sqrt(tol):
            candidates.append(xm)

    roots = [hybrid_root(f, float(a), float(b), float(fa_), float(fb_), xtol=tol, ftol=tol)
             for a, b, fa_, fb_ in brackets]

    eqs = [_make_equilibrium(curve, params, float(P), True, degeneracy_tol) for P in roots]
    for i in exact_idx:
        lo, hi = values[max(i - 1, 0)], values[min(i + 1, grid_n)]
        eqs.append(_make_equilibrium(curve, params, float(grid[i]), bool(lo * hi < 0), degeneracy_tol))
    eqs += [Equilibrium(float(P), fp(P), "degenerate", False) for P in candidates]
    eqs.sort(key=lambda e: e.P)
    if not eqs:
        raise NumericalError(
            f"no equilibrium found for {curve.label} at r={params.r!r}, eps={params.eps!r}; "
            "the curve probably violates pi(0) = 1 or monotonicity")
    return EquilibriumSet(tuple(eqs), params, curve.label, tuple(diagnostics))


def oracle_scan(curve: PayoffCurve, params: ModelParams, n: int = 10**6,
                xtol: float = 1e-12) -> list[float]:
    """Roots of f on [0, 1] by dense sampling and plain bisection.

    Verification only: evaluates f at `n` points over the whole unit interval,
    then bisects every sign change down to width `xtol`.
    """
    if n < 10**5:
        raise ParameterError("oracle_scan needs n >= 1e5")
    grid = np.linspace(0.0, 1.0, n)
    values = curve.pi(grid) - params.r - params.eps * curve.dpi(grid) * (1.0 - grid)

    def f(x):
        return curve.pi(x) - params.r - params.eps * curve.dpi(x) * (1.0 - x)

    roots = [float(grid[i]) for i in np.nonzero(values == 0.0)[0]]
    for i in _sign_changes(values):
        roots.append(bisect(f, float(grid[i]), float(grid[i + 1]), xtol, float(values[i])))
    return sorted(roots)


def _checked_derivative(curve, params, eq, degeneracy_tol):
    fprime = rhs_dP(curve, params, eq.P)
    if abs(fprime) <= degeneracy_tol:
        raise DegenerateEquilibriumError(
            f"f'(P) = {fprime:.3g} at P = {eq.P!r}; the equilibrium is degenerate")
    return fprime


def sensitivity_r(curve: PayoffCurve, params: ModelParams, eq: Equilibrium,
                  degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """dP0/dr by the implicit function theorem: ``1 / f'(P0)``."""
    return 1.0 / _checked_derivative(curve, params, eq, degeneracy_tol)


def sensitivity_eps(curve: PayoffCurve, params: ModelParams, eq: Equilibrium,
                    degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """dP0/deps = ``pi'(P0)(1 - P0) / f'(P0)``."""
    fprime = _checked_derivative(curve, params, eq, degeneracy_tol)
    return curve.dpi(eq.P) * (1.0 - eq.P) / fprime


def inverse_pi(curve: PayoffCurve, level: float, xtol: float = 1e-14) -> float:
    """Smallest-bracket preimage of `level` under pi on [0, p_star], by bisection."""
    if level >= curve.pi(0.0):
        return 0.0
    if level <= 0.0:
        return curve.p_star
    return bisect(lambda x: curve.pi(x) - level, 0.0, curve.p_star, xtol)


@dataclass(frozen=True)
class ConvexBounds:
    """Enclosure ``[lower, upper]`` of the unique equilibrium of a convex curve.

    ``derivative_bound`` holds ``(pi')^{-1}((1 - r)/eps)`` when that level is
    attained by pi'; since pi' <= 0 it almost never is, and the value is None.
    Membership allows `tol` of slack: at eps = 0 the root sits exactly on
    ``lower``, and both come from separate root solves.
    """

    lower: float
    upper: float
    derivative_bound: float | None = None
    tol: float = DEFAULT_TOL

    def __contains__(self, P: float) -> bool:
        return self.lower - self.tol <= P <= self.upper + self.tol


def convex_bounds(curve: PayoffCurve, params: ModelParams, grid_n: int = 2048) -> ConvexBounds:
    if not curve.is_convex(grid_n):
        raise PreconditionError(f"{curve.label} is not convex on the test grid")
    lower = inverse_pi(curve, params.r)
    derivative_bound = None
    if params.eps > 0:
        level = (1.0 - params.r) / params.eps
        grid = np.linspace(0.0, curve.p_star, grid_n + 1)
        d = curve.dpi(grid)
        # pi' is non-decreasing for a convex curve, so the preimage is a bisection
        if d.min() <= level <= d.max():
            derivative_bound = bisect(lambda x: curve.dpi(x) - level, 0.0, curve.p_star, 1e-14)
    upper = curve.p_star if derivative_bound is None else min(curve.p_star, derivative_bound)
    return ConvexBounds(lower, upper, derivative_bound)
