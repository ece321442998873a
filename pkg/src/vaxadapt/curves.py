"""Payoff curves: infection probability pi(p) with analytic derivatives.

Every curve is non-increasing on [0, 1], starts at pi(0) = 1 and vanishes
identically from its cutoff ``p_star`` onwards. Three families are built in:

* ``rational_glue``: ``(1 - 1/(R0 (1-p)))`` times a smooth switch falling
  from 1 to 0 over ``[transition_lo, transition_hi]``. ``example1`` is the
  member with R0 = 5 and transition [0.7, 0.8]. The rational factor equals
  ``1 - 1/R0`` at p = 0, so by default it is divided by that value to make
  pi(0) = 1; ``normalize=False`` keeps the raw product.
* ``example2``: ``(1/3)((1-2p)^3 + 2)`` times a switch on [7/16, 9/16].
* ``convex_test``: ``max(0, 1 - p/p_star) ** exponent``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError
from .glue import GlueKernel, default_kernel

__all__ = [
    "PayoffCurve",
    "CurveFamilySpec",
    "AssumptionCheck",
    "ValidationReport",
    "FAMILIES",
    "make_example1",
    "make_example2",
    "make_rational_glue",
    "make_convex_test",
    "make_curve",
    "validate",
]

FAMILIES = ("example1", "example2", "convex_test", "rational_glue")


def _as_output(values, scalar_input: bool):
    return float(values) if scalar_input else values


def _cutoff(fn: Callable, p_star: float) -> Callable:
    """Wrap an array function so it accepts scalars and is exactly 0 for p >= p_star."""

    def wrapped(p):
        if isinstance(p, (float, int)) and not isinstance(p, bool):
            return 0.0 if p >= p_star else float(fn(float(p)))
        arr = np.asarray(p, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.zeros_like(arr)
        live = arr < p_star
        if np.any(live):
            out[live] = fn(arr[live])
        return _as_output(out[0] if scalar else out, scalar)

    return wrapped


@dataclass(frozen=True, eq=False)
class PayoffCurve:
    """Infection probability pi with first and second derivatives.

    ``breakpoints`` lists abscissae where the curve changes regime (ends of
    the gluing interval, the cutoff). Finite-difference checks stay clear of
    them.
    """

    pi: Callable
    dpi: Callable
    d2pi: Callable
    p_star: float
    label: str
    breakpoints: tuple[float, ...] = ()
    spec: "CurveFamilySpec | None" = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.p_star < 1.0:
            raise ParameterError(f"p_star must lie in (0, 1), got {self.p_star!r}")

    def is_convex(self, grid_n: int = 2048, tol: float = 1e-12) -> bool:
        """Grid test ``d2pi >= -tol`` on [0, 1]."""
        grid = np.linspace(0.0, 1.0, grid_n + 1)
        return bool(np.all(self.d2pi(grid) >= -tol))


@dataclass(frozen=True)
class CurveFamilySpec:
    family: str
    R0: float = 5.0
    transition_lo: float = 0.7
    transition_hi: float = 0.8
    exponent: int = 3
    p_star: float = 0.8
    normalize: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"family: unknown curve family {self.family!r}; expected one of {FAMILIES}")
        if not self.R0 > 1.0:
            raise ParameterError(f"R0: must be > 1, got {self.R0!r}")
        if not 0.0 <= self.transition_lo < self.transition_hi <= 1.0:
            raise ParameterError(
                f"transition_lo/transition_hi: need 0 <= lo < hi <= 1, got "
                f"{self.transition_lo!r}, {self.transition_hi!r}")
        if isinstance(self.exponent, bool) or int(self.exponent) != self.exponent or self.exponent < 2:
            raise ParameterError(f"exponent: must be an integer >= 2, got {self.exponent!r}")
        if not 0.0 < self.p_star < 1.0:
            raise ParameterError(f"p_star: must lie in (0, 1), got {self.p_star!r}")
        if not isinstance(self.normalize, bool):
            raise ParameterError(f"normalize: must be a boolean, got {self.normalize!r}")
        if self.family == "rational_glue" and self.transition_hi > 1.0 - 1.0 / self.R0 + 1e-12:
            raise ParameterError(
                f"transition_hi: must not exceed 1 - 1/R0 = {1.0 - 1.0 / self.R0!r} "
                "or the curve turns negative")

    @classmethod
    def example1(cls, normalize: bool = True) -> "CurveFamilySpec":
        return cls("example1", R0=5.0, transition_lo=0.7, transition_hi=0.8, normalize=normalize)

    @classmethod
    def example2(cls) -> "CurveFamilySpec":
        return cls("example2", transition_lo=7 / 16, transition_hi=9 / 16)


def _falling_switch(kernel: GlueKernel, lo: float, hi: float):
    """1 - g((p - lo)/(hi - lo)) and its first two derivatives in p."""
    w = hi - lo

    def s0(p):
        return 1.0 - kernel.glue((p - lo) / w)

    def s1(p):
        return -kernel.glue_prime((p - lo) / w) / w

    def s2(p):
        return -kernel.glue_second((p - lo) / w) / (w * w)

    return s0, s1, s2


def make_rational_glue(R0: float, transition_lo: float, transition_hi: float,
                       kernel: GlueKernel | None = None, label: str | None = None,
                       normalize: bool = True) -> PayoffCurve:
    """``(1 - 1/(R0(1-p)))`` glued smoothly to zero over the transition interval.

    With `normalize` the rational factor is divided by its value ``1 - 1/R0``
    at p = 0.
    """
    spec = CurveFamilySpec("rational_glue", R0=R0, transition_lo=transition_lo,
                           transition_hi=transition_hi, normalize=normalize)
    kernel = kernel or default_kernel()
    s0, s1, s2 = _falling_switch(kernel, transition_lo, transition_hi)
    scale = 1.0 / (1.0 - 1.0 / R0) if normalize else 1.0

    def base(p):
        return scale * (1.0 - 1.0 / (R0 * (1.0 - p)))

    def base1(p):
        return -scale / (R0 * (1.0 - p) ** 2)

    def base2(p):
        return -2.0 * scale / (R0 * (1.0 - p) ** 3)

    def pi(p):
        return base(p) * s0(p)

    def dpi(p):
        return base1(p) * s0(p) + base(p) * s1(p)

    def d2pi(p):
        return base2(p) * s0(p) + 2.0 * base1(p) * s1(p) + base(p) * s2(p)

    p_star = transition_hi
    return PayoffCurve(
        pi=_cutoff(pi, p_star),
        dpi=_cutoff(dpi, p_star),
        d2pi=_cutoff(d2pi, p_star),
        p_star=p_star,
        label=label or f"rational_glue(R0={R0:g},[{transition_lo:g},{transition_hi:g}]"
                        f"{'' if normalize else ',raw'})",
        breakpoints=(transition_lo, transition_hi),
        spec=spec,
    )


def make_example1(kernel: GlueKernel | None = None, normalize: bool = True) -> PayoffCurve:
    """R0 = 5 rational curve switched off over [7/10, 4/5]; p_star = 4/5.

    ``normalize=False`` gives the raw product, whose value at 0 is 4/5.
    """
    curve = make_rational_glue(5.0, 0.7, 0.8, kernel,
                               label="example1" if normalize else "example1_raw", normalize=normalize)
    object.__setattr__(curve, "spec", CurveFamilySpec.example1(normalize))
    return curve


def make_example2(kernel: GlueKernel | None = None, transition_lo: float = 7 / 16,
                  transition_hi: float = 9 / 16) -> PayoffCurve:
    """``(1/3)((1-2p)^3 + 2)`` switched off over [7/16, 9/16]; p_star = 9/16."""
    kernel = kernel or default_kernel()
    s0, s1, s2 = _falling_switch(kernel, transition_lo, transition_hi)

    def cubic(p):
        return ((1.0 - 2.0 * p) ** 3 + 2.0) / 3.0

    def cubic1(p):
        return -2.0 * (1.0 - 2.0 * p) ** 2

    def cubic2(p):
        return 8.0 * (1.0 - 2.0 * p)

    def pi(p):
        return cubic(p) * s0(p)

    def dpi(p):
        return cubic1(p) * s0(p) + cubic(p) * s1(p)

    def d2pi(p):
        return cubic2(p) * s0(p) + 2.0 * cubic1(p) * s1(p) + cubic(p) * s2(p)

    default = (transition_lo, transition_hi) == (7 / 16, 9 / 16)
    return PayoffCurve(
        pi=_cutoff(pi, transition_hi),
        dpi=_cutoff(dpi, transition_hi),
        d2pi=_cutoff(d2pi, transition_hi),
        p_star=transition_hi,
        label="example2" if default else f"example2([{transition_lo:g},{transition_hi:g}])",
        breakpoints=(transition_lo, transition_hi),
        spec=CurveFamilySpec("example2", transition_lo=transition_lo, transition_hi=transition_hi),
    )


def make_convex_test(p_star: float = 0.8, exponent: int = 3) -> PayoffCurve:
    """Convex fixture ``max(0, 1 - p/p_star) ** exponent``."""
    if not 0.0 < p_star < 1.0:
        raise ParameterError(f"p_star must lie in (0, 1), got {p_star!r}")
    if isinstance(exponent, bool) or int(exponent) != exponent or exponent < 2:
        raise ParameterError(f"exponent must be an integer >= 2, got {exponent!r}")
    n = int(exponent)

    def pi(p):
        return (1.0 - p / p_star) ** n

    def dpi(p):
        return -n / p_star * (1.0 - p / p_star) ** (n - 1)

    def d2pi(p):
        return n * (n - 1) / p_star ** 2 * (1.0 - p / p_star) ** (n - 2)

    return PayoffCurve(
        pi=_cutoff(pi, p_star),
        dpi=_cutoff(dpi, p_star),
        d2pi=_cutoff(d2pi, p_star),
        p_star=p_star,
        label=f"convex_test(p_star={p_star:g},n={n})",
        breakpoints=(p_star,),
        spec=CurveFamilySpec("convex_test", p_star=p_star, exponent=n),
    )


def make_curve(spec: CurveFamilySpec, kernel: GlueKernel | None = None) -> PayoffCurve:
    """Build the curve described by `spec`."""
    if spec.family == "example1":
        return make_example1(kernel, spec.normalize)
    if spec.family == "example2":
        return make_example2(kernel, spec.transition_lo, spec.transition_hi)
    if spec.family == "convex_test":
        return make_convex_test(spec.p_star, spec.exponent)
    return make_rational_glue(spec.R0, spec.transition_lo, spec.transition_hi, kernel,
                              normalize=spec.normalize)


# ----------------------------------------------------------------------------
# validation

ASSUMPTIONS = {
    1: "smooth (supplied derivatives match finite differences)",
    2: "range 0 <= pi <= 1",
    3: "non-increasing",
    4: "pi(0) = 1",
    5: "pi = 0 beyond p_star",
}


@dataclass(frozen=True)
class AssumptionCheck:
    number: int
    description: str
    passed: bool
    worst_violation: float


@dataclass(frozen=True)
class ValidationReport:
    curve_label: str
    grid_n: int
    checks: tuple[AssumptionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, number: int) -> AssumptionCheck:
        for c in self.checks:
            if c.number == number:
                return c
        raise KeyError(number)

    def failures(self) -> list[int]:
        return [c.number for c in self.checks if not c.passed]


def derivative_errors(curve: PayoffCurve, grid, step1: float = 1e-5, step2: float = 3e-5,
                      margin: float = 1e-3):
    """Mixed relative errors of dpi and d2pi against central differences of pi.

    Errors are ``|analytic - fd| / max(|analytic|, 1)``. Grid points closer than
    `margin` to a breakpoint, to 0 or to 1 are skipped. Returns
    ``(points, err_dpi, err_d2pi)``.
    """
    grid = np.asarray(grid, dtype=float)
    keep = (grid >= margin) & (grid <= 1.0 - margin)
    for b in curve.breakpoints:
        keep &= np.abs(grid - b) >= margin
    x = grid[keep]
    pi = curve.pi
    # five-point stencils, O(h^4)
    h = step1
    fd1 = (-pi(x + 2 * h) + 8 * pi(x + h) - 8 * pi(x - h) + pi(x - 2 * h)) / (12.0 * h)
    h = step2
    fd2 = (-pi(x + 2 * h) + 16 * pi(x + h) - 30 * pi(x) + 16 * pi(x - h) - pi(x - 2 * h)) / (12.0 * h * h)
    d1, d2 = curve.dpi(x), curve.d2pi(x)
    e1 = np.abs(d1 - fd1) / np.maximum(np.abs(d1), 1.0)
    e2 = np.abs(d2 - fd2) / np.maximum(np.abs(d2), 1.0)
    return x, e1, e2


def validate(curve: PayoffCurve, grid_n: int = 1024, smooth_tol: float = 1e-5,
             monotone_tol: float = 1e-12) -> ValidationReport:
    """Check the five standing assumptions on a uniform grid of ``grid_n + 1`` points.

    Failures are reported in the returned record rather than raised.
    """
    if grid_n < 16:
        raise ParameterError("grid_n must be at least 16")
    grid = np.linspace(0.0, 1.0, grid_n + 1)
    pi = np.asarray(curve.pi(grid))
    dpi = np.asarray(curve.dpi(grid))

    _, e1, e2 = derivative_errors(curve, grid)
    smooth = float(max(e1.max(initial=0.0), e2.max(initial=0.0)))
    range_v = float(max(0.0, -pi.min(), pi.max() - 1.0))
    mono_v = float(max(0.0, dpi.max()))
    pi0_v = abs(float(curve.pi(0.0)) - 1.0)
    tail = grid >= curve.p_star
    tail_v = float(np.abs(pi[tail]).max(initial=0.0))
    tail_v = max(tail_v, abs(float(curve.pi(curve.p_star))))

    checks = (
        AssumptionCheck(1, ASSUMPTIONS[1], smooth <= smooth_tol, smooth),
        AssumptionCheck(2, ASSUMPTIONS[2], range_v == 0.0, range_v),
        AssumptionCheck(3, ASSUMPTIONS[3], mono_v <= monotone_tol, mono_v),
        AssumptionCheck(4, ASSUMPTIONS[4], pi0_v <= 1e-14, pi0_v),
        AssumptionCheck(5, ASSUMPTIONS[5], tail_v == 0.0, tail_v),
    )
    return ValidationReport(curve.label, grid_n, checks)
