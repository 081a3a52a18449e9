"""Harmonics observables of the quenched ground state.

The state ``|Phi_0(lam0)>`` evolves under ``H(lam) = e1 c^dag c``. Its
amplitudes on the ``lam0`` eigenbasis are

    g_n(t) = sum_mu C[n][mu] C[0][mu] exp(-i mu e1 t),

and the harmonic weights follow from the diagonal-block structure of the
density matrix as ``F(m, t) = sum_n |g_{n+m}|^2 |g_n|^2``. Only even ``n``
(and hence even ``m``) carry weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._parallel import chunked_map
from .coefficients import CoefficientTable, build_table
from .effective_model import (BogoliubovPair, ModelParams, Phase, bogoliubov_pair, classify_phase,
                              coupling_from_eta, mode_energies)
from .errors import ConvergenceError, SamePhaseError

NORM_TOL = 1e-8
M_TAIL_TOL = 1e-8
M2_FLOOR = 1e-12
N_START = 32
N_CAP = 4096
RTOL = 1e-6


@dataclass(frozen=True)
class SurvivalAmplitudes:
    """``g[n]`` for ``n = 0 .. n_max`` at time ``t``; odd entries are exactly zero."""

    t: float
    g: np.ndarray


@dataclass
class HarmonicsResult:
    times: np.ndarray
    second_moment: np.ndarray
    m_max: int
    convergence_report: dict
    q_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    q_rows: np.ndarray | None = None
    survival0: np.ndarray | None = None

    @property
    def echo(self) -> np.ndarray:
        """``|g_0(t)|**2`` on the same grid."""
        return np.abs(self.survival0) ** 2


def survival_even(table: CoefficientTable, e1: float, times, threads=None) -> np.ndarray:
    """``g_{2k}(t)`` for every grid time, shape ``(len(times), rows)``."""
    thetas = e1 * np.atleast_1d(np.asarray(times, dtype=float))
    rows = table.sectors[0]
    c0 = table.ground_support()
    out = np.empty((thetas.size, rows.shape[0]), dtype=complex)

    def work(lo, hi):
        _kernels.survival_even(rows, c0, thetas[lo:hi], out[lo:hi])

    chunked_map(work, thetas.size, threads)
    return out


def survival_amplitudes(table: CoefficientTable, e1: float, t: float) -> SurvivalAmplitudes:
    g = np.zeros(table.n_max + 1, dtype=complex)
    g[0::2] = survival_even(table, e1, [t], threads=1)[0]
    return SurvivalAmplitudes(float(t), g)


def harmonic_weights(w: np.ndarray, m_max: int | None = None) -> np.ndarray:
    """``F(m)`` for ``m = 0 .. m_max`` from even-row populations ``w[k] = |g_{2k}|**2``."""
    w = np.ascontiguousarray(w, dtype=float)
    natural = 2 * (w.size - 1)
    if m_max is None:
        m_max = natural
    lag_max = min(m_max // 2, w.size - 1)
    auto = np.empty(lag_max + 1)
    _kernels.autocorrelation(w, lag_max, auto)
    F = np.zeros(m_max + 1)
    F[0: 2 * lag_max + 1: 2] = auto
    return F


def _check_norm(table, w, t):
    deficit = (1.0 - table.ground_tail) - _kernels.kahan_sum(np.ascontiguousarray(w))
    if deficit > NORM_TOL:
        raise ConvergenceError(
            f"state at t={t:.6g} leaks {deficit:.3e} of its weight past n_max={table.n_max}",
            diagnostics={"t": t, "n_max": table.n_max, "norm_deficit": deficit})
    return deficit


def _moment(F: np.ndarray, m_max: int, t: float) -> float:
    m = np.arange(F.size, dtype=float)
    num = m * m * F
    total_num = _kernels.kahan_sum(num)
    total_den = _kernels.kahan_sum(F)
    if total_num > 0 and m_max >= 10:
        cut = int(math.floor(0.9 * m_max)) + 1
        # relative to <m^2>, floored so rounding noise at t = 0 does not count
        frac = _kernels.kahan_sum(num[cut:]) / max(total_num, M2_FLOOR * total_den)
        if frac > M_TAIL_TOL:
            raise ConvergenceError(
                f"top decile of m <= {m_max} carries {frac:.3e} of the second moment at t={t:.6g}",
                diagnostics={"t": t, "m_max": m_max, "tail_fraction": frac})
    return total_num / total_den


def _weights_at(table, e1, t, m_max):
    w = np.abs(survival_even(table, e1, [t], threads=1)[0]) ** 2
    _check_norm(table, w, t)
    return harmonic_weights(w, m_max)


def f_of_m(table: CoefficientTable, e1: float, m: int, t: float) -> float:
    """``F(m, t) = sum_n |g_{n+m}(t)|**2 |g_n(t)|**2``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m % 2:
        return 0.0
    w = np.abs(survival_even(table, e1, [t], threads=1)[0]) ** 2
    F = harmonic_weights(w, m)
    return float(F[m])


def second_moment(table: CoefficientTable, e1: float, t: float, m_max: int | None = None) -> float:
    """``sum_m m**2 F / sum_m F`` over ``0 <= m <= m_max`` (default: all ``m`` the table supports)."""
    if m_max is not None and m_max < 1:
        raise ValueError("m_max must be at least 1")
    m_max = 2 * (table.sectors[0].shape[0] - 1) if m_max is None else m_max
    return _moment(_weights_at(table, e1, t, m_max), m_max, t)


def q_distribution(table: CoefficientTable, e1: float, t: float, m_max: int | None = None) -> np.ndarray:
    """``Q(m, t) = F(m, t) / sum_m F`` over ``0 <= m <= m_max``."""
    m_max = 2 * (table.sectors[0].shape[0] - 1) if m_max is None else m_max
    F = _weights_at(table, e1, t, m_max)
    _moment(F, m_max, t)
    return F / _kernels.kahan_sum(F)


def peak_times(e1: float, k_list) -> np.ndarray:
    """Maxima ``k pi / (2 e1)`` of the second moment; ``k`` must be odd."""
    if not e1 > 0:
        raise ValueError("e1 must be positive")
    k = np.atleast_1d(np.asarray(k_list))
    if np.any(k % 2 == 0):
        raise ValueError(f"peak times need odd k, got {k.tolist()}; even k are minima")
    return k * math.pi / (2.0 * e1)


def period(e1: float) -> float:
    if not e1 > 0:
        raise ValueError("e1 must be positive")
    return math.pi / e1


def _real_peak_amplitudes(table: CoefficientTable) -> np.ndarray:
    """``g_{2k}(t_p)`` as the real sums ``sum_mu (-1)**(mu/2) C[2k][mu] C[0][mu]``."""
    c0 = table.ground_support()
    signed = c0 * np.where(np.arange(c0.size) % 2 == 0, 1.0, -1.0)
    rows = table.sectors[0]
    return np.array([_kernels.kahan_sum(np.ascontiguousarray(r[: c0.size]) * signed) for r in rows])


def amplitude_ap(table: CoefficientTable, e1: float = 1.0) -> float:
    """``<m^2>`` at the first peak ``t_p = pi / (2 e1)`` from the real sign-weighted sums.

    At ``t_p`` every phase ``exp(-i mu e1 t_p)`` on the even sector is ``(-1)**(mu/2)``,
    so the result does not depend on ``e1``.
    """
    w = _real_peak_amplitudes(table) ** 2
    _check_norm(table, w, math.pi / (2.0 * e1))
    F = harmonic_weights(w)
    return _moment(F, F.size - 1, math.pi / (2.0 * e1))


def probe_time(e1: float, times) -> float:
    """Grid time whose phase ``e1 t`` is closest to an odd multiple of pi/2 (widest state)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return float(times[np.argmax(np.sin(e1 * times) ** 2)])


def converged_table(pair: BogoliubovPair, e1: float, t_probe: float, tol: float = 1e-12,
                    rtol: float = RTOL, n_start: int = N_START, n_cap: int = N_CAP, mu_max: int | None = None):
    """Double ``n_max`` (and with it the ``m`` range) until ``<m^2>`` at ``t_probe`` settles.

    Returns ``(table, report)``.
    """
    history = []
    prev = None
    n = n_start
    while True:
        table = build_table(pair, n, tol=tol, sectors=(0,), mu_max=mu_max)
        try:
            value = second_moment(table, e1, t_probe)
        except ConvergenceError as exc:
            value = None
            history.append({"n_max": n, "error": str(exc)})
        else:
            history.append({"n_max": n, "value": value})
            if prev is not None:
                scale = max(abs(value), 1e-300)
                change = abs(value - prev) / scale if value != prev else 0.0
                if change < rtol or (value < 1e-300 and prev < 1e-300):
                    return table, _report(table, t_probe, history, change)
            prev = value
        if n >= n_cap:
            raise ConvergenceError(f"<m^2> at t={t_probe:.6g} not converged at n_max={n}",
                                   diagnostics={"history": history})
        n = min(2 * n, n_cap)


def _report(table, t_probe, history, change):
    return {"n_max": table.n_max, "mu_max": table.mu_max, "m_max": 2 * (table.sectors[0].shape[0] - 1),
            "probe_time": t_probe, "final_relative_change": change, "ground_tail": table.ground_tail,
            "max_row_tail": table.max_tail(), "history": history}


def evolve(pair: BogoliubovPair, e1: float, times, q_times=(), n_max: int | None = None,
           m_max: int | None = None, tol: float = 1e-12, threads=None, table: CoefficientTable | None = None,
           mu_max: int | None = None):
    """Second moment (and optional ``Q`` rows) on a time grid.

    Without ``table`` or ``n_max`` the table is sized by :func:`converged_table`
    at the grid time of widest spread. Returns ``(HarmonicsResult, table)``.
    """
    times = np.asarray(times, dtype=float)
    q_times = np.asarray(q_times, dtype=float)
    all_t = np.concatenate([times, q_times])
    if table is None:
        if n_max is None:
            table, report = converged_table(pair, e1, probe_time(e1, all_t) if all_t.size else 0.0, tol=tol,
                                            mu_max=mu_max)
        else:
            table = build_table(pair, n_max, tol=tol, sectors=(0,), mu_max=mu_max)
            report = _report(table, None, [], None)
    else:
        report = _report(table, None, [], None)
    natural = 2 * (table.sectors[0].shape[0] - 1)
    m_max = natural if m_max is None else m_max
    g = survival_even(table, e1, times, threads)
    w = np.abs(g) ** 2
    m2 = np.empty(times.size)

    def work(lo, hi):
        for i in range(lo, hi):
            _check_norm(table, w[i], times[i])
            m2[i] = _moment(harmonic_weights(w[i], m_max), m_max, times[i])

    chunked_map(work, times.size, threads)
    q_rows = None
    if q_times.size:
        q_rows = np.array([q_distribution(table, e1, tq, m_max) for tq in q_times])
    report = dict(report, m_max=m_max)
    return HarmonicsResult(times, m2, m_max, report, q_times, q_rows, g[:, 0].copy()), table


@dataclass(frozen=True)
class CollapseResult:
    eta: float
    lambda0: tuple
    lambdas: tuple
    amplitudes: np.ndarray
    max_relative_spread: float


def relative_spread(values) -> float:
    v = np.asarray(values, dtype=float)
    top = np.max(np.abs(v))
    if top == 0:
        return 0.0
    return float((v.max() - v.min()) / top)


def scaling_collapse(params: ModelParams, eta: float, lambda0_list, phase: Phase,
                     bogoliubov: str = "asymptotic", apply_cos: bool = False, tol: float = 1e-12) -> CollapseResult:
    """``A_p`` for each ``lam0`` with ``lam`` set by ``eta``, and their largest relative spread."""
    phase = Phase(phase)
    lc = params.lambda_c
    lams, aps = [], []
    cache = {}
    for lam0 in lambda0_list:
        if classify_phase(params, lam0) is not phase:
            raise SamePhaseError(f"lambda0={lam0} is not in the {phase.value} phase")
        lam = coupling_from_eta(eta, lam0, lc)
        if lam < 0 or classify_phase(params, lam) is not phase:
            raise SamePhaseError(f"eta={eta} maps lambda0={lam0} across the critical point")
        pair = bogoliubov_pair(params, lam0, lam, bogoliubov, apply_cos)
        key = (pair.p1, pair.p2)
        if key not in cache:
            e1 = mode_energies(params, lam).e1
            table, _ = converged_table(pair, e1, period(e1) / 2.0, tol=tol)
            cache[key] = amplitude_ap(table, e1)
        lams.append(lam)
        aps.append(cache[key])
    aps = np.array(aps)
    return CollapseResult(eta, tuple(lambda0_list), tuple(lams), aps, relative_spread(aps))
