"""Power-law and echo-relation fits, log-log slopes and peak detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    residual: float
    n_points: int


def _pairs(points):
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    return arr[:, 0], arr[:, 1]


def fit_power_law(points) -> FitResult:
    """``y = a x**b`` by ordinary least squares on ``(ln x, ln y)``."""
    x, y = _pairs(points)
    if x.size < 2:
        raise ValueError("power-law fit needs at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive coordinates")
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    sxx = float(dx @ dx)
    if sxx <= 1e-300:
        raise ValueError("power-law fit needs at least two distinct x values")
    slope = float(dx @ (ly - ly.mean())) / sxx
    intercept = ly.mean() - slope * lx.mean()
    res = ly - (intercept + slope * lx)
    return FitResult(math.exp(intercept), slope, float(np.sqrt(np.mean(res ** 2))), int(x.size))


def _relation(m2, a, b, p):
    s = b * m2 ** p
    return (a + s) / (a + m2 + s)


def _relation_jac(m2, a, b, p):
    s = m2 ** p
    den = a + m2 + b * s
    # d/da and d/db of (a + b s) / den
    return np.column_stack([m2 / den ** 2, s * m2 / den ** 2])


def fit_le_relation(points, exponent: float = 2.0 / 3.0, grid_size: int = 61, max_iter: int = 200,
                    gtol: float = 1e-10) -> FitResult:
    """Least-squares ``(a, b)`` for ``M_L = (a + b m2**p) / (a + m2 + b m2**p)``.

    A log-spaced grid over ``[0.1, 100]**2`` seeds a damped Gauss-Newton
    iteration that stops when the gradient norm drops below ``gtol``.
    """
    m2, ml = _pairs(points)
    if m2.size < 3:
        raise ValueError("relation fit needs at least three points")
    if np.any(m2 < 0) or np.any(ml <= 0) or np.any(ml > 1):
        raise ValueError("relation fit needs m2 >= 0 and 0 < M_L <= 1")

    def cost(a, b):
        r = ml - _relation(m2, a, b, exponent)
        return float(r @ r)

    grid = np.logspace(-1, 2, grid_size)
    costs = np.array([[cost(a, b) for b in grid] for a in grid])
    ia, ib = np.unravel_index(np.argmin(costs), costs.shape)
    theta = np.array([grid[ia], grid[ib]])
    c = costs[ia, ib]
    mu = 1e-3
    grad_norm = np.inf
    for _ in range(max_iter):
        r = ml - _relation(m2, *theta, exponent)
        J = _relation_jac(m2, *theta, exponent)
        grad = J.T @ r
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < gtol:
            break
        JTJ = J.T @ J
        while True:
            step = np.linalg.solve(JTJ + mu * np.diag(np.diag(JTJ)), grad)
            trial = theta + step
            if np.all(trial > 0):
                c_trial = cost(*trial)
                if c_trial <= c:
                    theta, c = trial, c_trial
                    mu = max(mu / 10.0, 1e-12)
                    break
            mu *= 10.0
            if mu > 1e12:
                break
        if mu > 1e12:
            break
    if grad_norm >= gtol:
        raise ConvergenceError(f"relation fit stalled with gradient norm {grad_norm:.3e}",
                               diagnostics={"a": theta[0], "b": theta[1], "cost": c})
    return FitResult(float(theta[0]), float(theta[1]), math.sqrt(c / m2.size), int(m2.size))


def loglog_slope(series, window) -> float:
    """Least-squares slope of ``ln y`` against ``ln t`` for ``t`` in ``[window[0], window[1]]``."""
    t, y = _pairs(series)
    lo, hi = window
    sel = (t >= lo) & (t <= hi)
    if np.count_nonzero(sel) < 3:
        raise ValueError(f"window [{lo}, {hi}] holds fewer than three points")
    if np.any(t[sel] <= 0) or np.any(y[sel] <= 0):
        raise ValueError("log-log slope needs positive values in the window")
    return fit_power_law(np.column_stack([t[sel], y[sel]])).b


def detect_peaks(series) -> list:
    """Interior local maxima; a flat top counts once, at its earliest point."""
    t, y = _pairs(series)
    if t.size < 3:
        raise ValueError("peak detection needs at least three points")
    peaks = []
    i = 1
    n = y.size
    while i < n - 1:
        if y[i] > y[i - 1]:
            j = i
            while j + 1 < n and y[j + 1] == y[i]:
                j += 1
            if j + 1 < n and y[j + 1] < y[i]:
                peaks.append((float(t[i]), float(y[i])))
            i = j + 1
        else:
            i += 1
    return peaks
