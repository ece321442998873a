"""Smooth bump kernel and the gluing switch built from its primitive.

The bump ``h(t) = exp(1 / (t**2 - 1))`` on ``|t| < 1`` (zero elsewhere) is
integrated to ``H(x)``; ``g(x) = H(2x - 1) / H(1)`` then rises smoothly from 0
at ``x <= 0`` to 1 at ``x >= 1``.

Scalar primitives go through adaptive Simpson at the kernel tolerance. Array
evaluation, which the payoff curves need on grids of up to 10**6 points, uses
panel anchors computed by the same adaptive Simpson plus a fixed
Gauss-Legendre rule on the remainder of the panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, QuadratureError

__all__ = ["bump", "bump_prime", "adaptive_simpson", "GlueKernel", "glue_primitive", "glue"]


def bump(t):
    """``exp(1/(t^2-1))`` for ``|t| < 1``, else 0. Accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 / (ti * ti - 1.0))
    return out if out.ndim else float(out)


def bump_prime(t):
    """Derivative of :func:`bump`: ``bump(t) * (-2t) / (t^2-1)^2``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    s = ti * ti - 1.0
    b = np.exp(1.0 / s)
    # b underflows to 0 long before s**2 does; skip those to avoid 0*inf
    live = b > 0.0
    vals = np.zeros_like(ti)
    vals[live] = b[live] * (-2.0 * ti[live]) / (s[live] * s[live])
    out[inside] = vals
    return out if out.ndim else float(out)


def _bump_scalar(t: float) -> float:
    if -1.0 < t < 1.0:
        return math.exp(1.0 / (t * t - 1.0))
    return 0.0


def adaptive_simpson(func, a: float, b: float, abs_tol: float = 1e-12,
                     max_depth: int = 60, max_evals: int = 2_000_000, min_depth: int = 5) -> float:
    """Integrate a scalar function on [a, b] by adaptive Simpson with Richardson correction.

    Every branch is split at least `min_depth` times before the local error
    test may accept it; coarser acceptance is fooled by the flat tails of the
    bump. Raises QuadratureError if a subinterval reaches `max_depth` without
    meeting its share of `abs_tol`, or if more than `max_evals` evaluations
    are spent.
    """
    if b == a:
        return 0.0
    if abs_tol <= 0:
        raise ParameterError("abs_tol must be positive")
    fa, fm, fb = func(a), func(0.5 * (a + b)), func(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    evals = 3
    stack = [(a, b, fa, fm, fb, whole, abs_tol, max_depth)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = func(lm), func(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if abs(delta) <= 15.0 * tol and max_depth - depth >= min_depth:
            total += left + right + delta / 15.0
            continue
        if depth <= 0:
            raise QuadratureError(
                f"adaptive Simpson hit max depth on [{lo!r}, {hi!r}] (error estimate {abs(delta) / 15:.3g})")
        if evals > max_evals:
            raise QuadratureError(f"adaptive Simpson exceeded {max_evals} evaluations")
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1))
    return total


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_PAIRS = tuple(zip((_GL_NODES + 1.0).tolist(), _GL_WEIGHTS.tolist()))


def _is_scalar(x) -> bool:
    return isinstance(x, (float, int)) and not isinstance(x, bool)


@dataclass(frozen=True)
class GlueKernel:
    """Cached primitive of the bump kernel.

    ``H1`` is the full integral ``H(1)``; ``1 / H1`` is the normalising constant
    of the gluing switch (about 2.25228362104).
    """

    quadrature_abs_tol: float = 1e-12
    n_panels: int = 32
    H1: float = field(init=False)
    _knots: np.ndarray = field(init=False, repr=False, compare=False)
    _anchors: np.ndarray = field(init=False, repr=False, compare=False)
    _knot_list: list = field(init=False, repr=False, compare=False)
    _anchor_list: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.quadrature_abs_tol > 0:
            raise ParameterError("quadrature_abs_tol must be positive")
        if self.n_panels < 1:
            raise ParameterError("n_panels must be at least 1")
        knots = np.linspace(-1.0, 1.0, self.n_panels + 1)
        panel_tol = self.quadrature_abs_tol / self.n_panels
        pieces = [adaptive_simpson(_bump_scalar, float(lo), float(hi), panel_tol)
                  for lo, hi in zip(knots[:-1], knots[1:])]
        anchors = np.concatenate([[0.0], np.cumsum(pieces)])
        object.__setattr__(self, "_knots", knots)
        object.__setattr__(self, "_anchors", anchors)
        object.__setattr__(self, "_knot_list", knots.tolist())
        object.__setattr__(self, "_anchor_list", anchors.tolist())
        object.__setattr__(self, "H1", float(anchors[-1]))

    def primitive(self, x: float) -> float:
        """``H(x)`` for a scalar, by adaptive Simpson on [-1, x]."""
        x = float(x)
        if x <= -1.0:
            return 0.0
        if x >= 1.0:
            return self.H1
        return adaptive_simpson(_bump_scalar, -1.0, x, self.quadrature_abs_tol)

    def _primitive_fast(self, x: float) -> float:
        # scalar twin of primitive_array, avoiding numpy call overhead
        if x <= -1.0:
            return 0.0
        if x >= 1.0:
            return self.H1
        k = min(int((x + 1.0) * 0.5 * self.n_panels), self.n_panels - 1)
        lo = self._knot_list[k]
        if lo > x:
            k -= 1
            lo = self._knot_list[k]
        half = 0.5 * (x - lo)
        acc = 0.0
        for node, w in _GL_PAIRS:
            t = lo + half * node
            if -1.0 < t < 1.0:
                acc += w * math.exp(1.0 / (t * t - 1.0))
        return self._anchor_list[k] + half * acc

    def primitive_array(self, x):
        """Vectorised ``H(x)``: panel anchor plus a 24-point Gauss-Legendre remainder."""
        if _is_scalar(x):
            return self._primitive_fast(float(x))
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 1.0, self.H1, 0.0)
        inside = (x > -1.0) & (x < 1.0)
        xi = x[inside]
        k = np.clip(np.searchsorted(self._knots, xi, side="right") - 1, 0, self.n_panels - 1)
        lo = self._knots[k]
        half = 0.5 * (xi - lo)
        # nodes mapped onto [lo, x] for every element
        t = lo[:, None] + half[:, None] * (_GL_NODES + 1.0)
        out[inside] = self._anchors[k] + half * (bump(t) @ _GL_WEIGHTS)
        return out if out.ndim else float(out)

    def glue(self, x):
        """Smooth switch ``H(2x-1)/H(1)``: 0 for x <= 0, 1 for x >= 1."""
        if _is_scalar(x):
            if x <= 0.0:
                return 0.0
            if x >= 1.0:
                return 1.0
            return self._primitive_fast(2.0 * x - 1.0) / self.H1
        x = np.asarray(x, dtype=float)
        out = self.primitive_array(2.0 * x - 1.0) / self.H1
        out = np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, out))
        return out if out.ndim else float(out)

    def glue_prime(self, x):
        if _is_scalar(x):
            return 2.0 * _bump_scalar(2.0 * x - 1.0) / self.H1
        x = np.asarray(x, dtype=float)
        out = 2.0 * bump(2.0 * x - 1.0) / self.H1
        return out if np.ndim(out) else float(out)

    def glue_second(self, x):
        if _is_scalar(x):
            t = 2.0 * x - 1.0
            if not -1.0 < t < 1.0:
                return 0.0
            s = t * t - 1.0
            b = math.exp(1.0 / s)
            return 4.0 * b * (-2.0 * t) / (s * s) / self.H1 if b > 0.0 else 0.0
        x = np.asarray(x, dtype=float)
        out = 4.0 * bump_prime(2.0 * x - 1.0) / self.H1
        return out if np.ndim(out) else float(out)


_DEFAULT_KERNEL: GlueKernel | None = None


def default_kernel() -> GlueKernel:
    """Process-wide kernel at the default tolerance, built on first use."""
    global _DEFAULT_KERNEL
    if _DEFAULT_KERNEL is None:
        _DEFAULT_KERNEL = GlueKernel()
    return _DEFAULT_KERNEL


def glue_primitive(x: float, kernel: GlueKernel | None = None) -> float:
    return (kernel or default_kernel()).primitive(x)


def glue(x, kernel: GlueKernel | None = None):
    return (kernel or default_kernel()).glue(x)
