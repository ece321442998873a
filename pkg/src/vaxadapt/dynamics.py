"""Adaptive dynamics of the vaccination strategy P.

    dP/dt = f(P) = pi(P) - r - eps * pi'(P) * (1 - P)

where r is the relative risk and eps the fraction of the population playing
the focal strategy.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .curves import PayoffCurve
from .errors import DomainError, ParameterError

__all__ = ["ModelParams", "Trajectory", "rhs", "rhs_dP", "integrate"]


@dataclass(frozen=True)
class ModelParams:
    """Relative risk ``r`` and deviating fraction ``eps``, both in [0, 1].

    Operations that need ``0 < r < 1`` check that themselves.
    """

    r: float
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ParameterError(f"r must lie in [0, 1], got {self.r!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ParameterError(f"eps must lie in [0, 1], got {self.eps!r}")

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(changes.get("r", self.r), changes.get("eps", self.eps))


def _check_domain(P):
    arr = np.asarray(P, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        bad = arr[~((arr >= 0.0) & (arr <= 1.0))].ravel()[0]
        raise DomainError(f"P must lie in [0, 1], got {bad!r}")
    return arr


def rhs(curve: PayoffCurve, params: ModelParams, P):
    """Vector field ``f(P)``; vectorised over P."""
    arr = _check_domain(P)
    out = curve.pi(arr) - params.r - params.eps * curve.dpi(arr) * (1.0 - arr)
    return float(out) if arr.ndim == 0 else out


def rhs_dP(curve: PayoffCurve, params: ModelParams, P):
    """``f'(P) = pi'(P)(1 + eps) - eps (1 - P) pi''(P)``."""
    arr = _check_domain(P)
    eps = params.eps
    out = curve.dpi(arr) * (1.0 + eps) - eps * (1.0 - arr) * curve.d2pi(arr)
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    params: ModelParams
    curve_label: str
    max_clamp: float = 0.0  # largest correction applied by the [0, 1] guard

    @property
    def final(self) -> float:
        return float(self.states[-1])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_trajectory_csv(self, fh)


def write_trajectory_csv(traj: Trajectory, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "P"])
    for t, p in zip(traj.times, traj.states):
        w.writerow([format(float(t), ".17g"), format(float(p), ".17g")])


def integrate(curve: PayoffCurve, params: ModelParams, P0: float, t_end: float = 50.0,
              dt: float = 1e-3) -> Trajectory:
    """Classical fixed-step RK4 from ``P(0) = P0`` to ``t_end``.

    The last step is shortened to land on `t_end`. Stage and step values are
    clamped into [0, 1]; the largest clamp is recorded on the trajectory and
    should stay at rounding level.
    """
    if not 0.0 <= P0 <= 1.0:
        raise DomainError(f"P0 must lie in [0, 1], got {P0!r}")
    if not (t_end > 0 and dt > 0 and np.isfinite(t_end) and np.isfinite(dt)):
        raise ParameterError(f"need t_end > 0 and dt > 0, got t_end={t_end!r}, dt={dt!r}")

    pi, dpi, r, eps = curve.pi, curve.dpi, params.r, params.eps
    n_full = int(np.floor(t_end / dt + 1e-9))
    times = [i * dt for i in range(n_full + 1)]
    if t_end - times[-1] > 1e-12 * t_end:
        times.append(t_end)
    times = np.asarray(times)
    states = np.empty_like(times)
    states[0] = P0
    worst = 0.0

    def clamp(x):
        nonlocal worst
        if x < 0.0:
            worst = max(worst, -x)
            return 0.0
        if x > 1.0:
            worst = max(worst, x - 1.0)
            return 1.0
        return x

    def f(x):
        return pi(x) - r - eps * dpi(x) * (1.0 - x)

    P = float(P0)
    for i in range(1, len(times)):
        h = times[i] - times[i - 1]
        k1 = f(P)
        k2 = f(clamp(P + 0.5 * h * k1))
        k3 = f(clamp(P + 0.5 * h * k2))
        k4 = f(clamp(P + h * k3))
        P = clamp(P + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        states[i] = P
    return Trajectory(times, states, params, curve.label, worst)
