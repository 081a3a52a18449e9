"""Loschmidt echo, ground-state fidelity and the echo-harmonics relation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._parallel import chunked_map
from .coefficients import CoefficientTable


@dataclass(frozen=True)
class EchoSeries:
    times: np.ndarray
    m_l: np.ndarray
    minima: tuple  # ((t_p, M_L(t_p)), ...)


def loschmidt_echo(table: CoefficientTable, e1: float, t, threads=None):
    """``M_L(t) = |sum_mu |C[0][mu]|**2 exp(i mu e1 t)|**2``; scalar in, scalar out."""
    scalar = np.ndim(t) == 0
    thetas = e1 * np.atleast_1d(np.asarray(t, dtype=float))
    c0 = table.ground_support()
    rows = c0[None, :]
    amp = np.empty((thetas.size, 1), dtype=complex)

    def work(lo, hi):
        _kernels.survival_even(rows, c0, thetas[lo:hi], amp[lo:hi])

    chunked_map(work, thetas.size, threads)
    m_l = np.abs(amp[:, 0]) ** 2
    return float(m_l[0]) if scalar else m_l


def echo_minimum_closed(eta: float) -> float:
    """``M_p = 2 sqrt(eta) / (1 + eta)``, the echo at every odd peak time."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return 2.0 * math.sqrt(eta) / (1.0 + eta)


def fidelity_closed(eta: float) -> float:
    """``L_p = sqrt(2) eta**(1/8) / sqrt(sqrt(eta) + 1)``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return math.sqrt(2.0) * eta ** 0.125 / math.sqrt(math.sqrt(eta) + 1.0)


def fidelity_numeric(table: CoefficientTable) -> float:
    """``|<Phi_0(lam) | Phi_0(lam0)>| = |C[0][0]|``."""
    return abs(float(table.ground[0]))


def le_harmonics_relation(m2, a: float = 3.5, b: float = 3.0, exponent: float = 2.0 / 3.0):
    """``M_L = (a + b m2**p) / (a + m2 + b m2**p)`` with ``p = exponent``."""
    m2 = np.asarray(m2, dtype=float)
    if np.any(m2 < 0):
        raise ValueError("second moment must be non-negative")
    s = b * m2 ** exponent
    out = (a + s) / (a + m2 + s)
    return float(out) if out.ndim == 0 else out


def small_m2_prediction(m2, a: float = 3.5):
    """Leading behaviour ``1 - m2 / a`` of :func:`le_harmonics_relation`."""
    return 1.0 - np.asarray(m2, dtype=float) / a


def single_particle_prediction(m2, eps: float):
    """``1 - eps**2 m2 / 2``, the perturbative single-particle form (diagnostic only)."""
    return 1.0 - 0.5 * eps * eps * np.asarray(m2, dtype=float)


def echo_series(table: CoefficientTable, e1: float, times, threads=None) -> EchoSeries:
    """Echo on a grid plus its values at the analytic minima ``k pi / (2 e1)`` inside the grid."""
    times = np.asarray(times, dtype=float)
    m_l = loschmidt_echo(table, e1, times, threads)
    minima = ()
    if times.size and e1 > 0:
        k_max = int(math.floor(2.0 * e1 * times.max() / math.pi))
        t_p = np.array([k * math.pi / (2.0 * e1) for k in range(1, k_max + 1, 2)])
        if t_p.size:
            minima = tuple(zip(t_p.tolist(), np.atleast_1d(loschmidt_echo(table, e1, t_p, 1)).tolist()))
    return EchoSeries(times, m_l, minima)
