"""Scalar bracketing root finders.

Two independent routes are provided: :func:`bisect` is plain interval halving
and serves as the verification oracle, while :func:`hybrid_root` mixes
Illinois-style false position with bisection and is what the solver uses.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NumericalError

__all__ = ["bisect", "hybrid_root"]


def bisect(f: Callable[[float], float], a: float, b: float, xtol: float = 1e-12,
           fa: float | None = None) -> float:
    """Halve the sign-change interval [a, b] until it is narrower than `xtol`.

    Returns the midpoint of the final bracket.
    """
    fa = f(a) if fa is None else fa
    if fa == 0.0:
        return a
    while b - a > xtol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def hybrid_root(f: Callable[[float], float], a: float, b: float,
                fa: float | None = None, fb: float | None = None,
                xtol: float = 1e-12, ftol: float = 1e-12, maxiter: int = 500) -> float:
    """Root of `f` in the sign-change bracket [a, b].

    Iterates until the bracket is no wider than `xtol` and the returned point
    has ``|f| <= ftol``, or until the bracket cannot be split in floating point.
    A bisection step is forced whenever false position fails to halve the
    bracket, so convergence is never slower than bisection.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NumericalError(f"no sign change on [{a!r}, {b!r}]: f={fa!r}, {fb!r}")

    best, fbest = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    side = 0
    last_width = b - a
    bisect_next = False
    for _ in range(maxiter):
        width = b - a
        if width <= xtol and abs(fbest) <= ftol:
            return best
        if bisect_next:
            x = 0.5 * (a + b)
        else:
            x = b - fb * (b - a) / (fb - fa)
            if not (a < x < b):
                x = 0.5 * (a + b)
        if x <= a or x >= b:
            # bracket exhausted at floating-point resolution
            return best
        fx = f(x)
        if abs(fx) < abs(fbest):
            best, fbest = x, fx
        if fx == 0.0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = x, fx
            if side == 1:
                fa *= 0.5
            side = 1
        new_width = b - a
        bisect_next = new_width > 0.5 * last_width
        last_width = new_width
    raise NumericalError(f"hybrid_root did not converge on [{a!r}, {b!r}] (|f|={abs(fbest):.3g})")


def _sign_changes(values: np.ndarray) -> np.ndarray:
    """Indices i where values[i] and values[i+1] have strictly opposite signs."""
    s = np.sign(values)
    return np.nonzero(s[:-1] * s[1:] < 0)[0]
