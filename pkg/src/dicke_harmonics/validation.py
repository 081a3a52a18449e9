"""Invariant suite behind ``validate``: each check returns a named pass/fail record."""

from __future__ import annotations

import math

import numpy as np

from .analysis_fit import detect_peaks
from .coefficients import build_table, series_identity_check
from .config import ScenarioConfig
from .echo_fidelity import echo_minimum_closed, fidelity_closed, fidelity_numeric, loschmidt_echo
from .effective_model import ModelParams, bogoliubov_asymptotic, bogoliubov_pair, mode_energies
from .errors import DickeError
from .harmonics import (amplitude_ap, evolve, f_of_m, harmonic_weights, period, scaling_collapse,
                        survival_amplitudes)
from .oracle import (dense_rotated_number_operator, density_matrix_harmonics, direct_f,
                     oracle_eigendecomposition, williamson_frequencies)


class _Suite:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.checks = []
        self.tables = []

    def table(self, pair, n_max, sectors=(0, 1)):
        t = build_table(pair, n_max, tol=self.cfg.tol, sectors=sectors, mu_max=self.cfg.mu_max)
        self.tables.append({"p1": pair.p1, "p2": pair.p2, "n_max": t.n_max, "mu_max": t.mu_max,
                            "ground_tail": t.ground_tail, "max_row_tail": t.max_tail()})
        return t

    def run(self, name, fn):
        try:
            value, limit = fn(self)
            passed = bool(value < limit)
            self.checks.append({"name": name, "passed": passed, "value": float(value), "limit": float(limit)})
        except (DickeError, ValueError, ArithmeticError) as exc:
            self.checks.append({"name": name, "passed": False, "error": f"{type(exc).__name__}: {exc}"})


def _oracle_equivalence(s):
    worst = 0.0
    for eta in (0.25, 0.1):
        pair = bogoliubov_asymptotic(eta)
        tab = s.table(pair, 20)
        _, vecs = oracle_eigendecomposition(dense_rotated_number_operator(pair, 400))
        E = tab.entries
        k = min(400, E.shape[1])
        for n in range(21):
            row = np.zeros(400)
            row[:k] = E[n, :k]
            row = row if row[np.argmax(np.abs(row))] >= 0 else -row
            worst = max(worst, float(np.max(np.abs(row - vecs[:, n]))))
    return worst, 1e-8


def _oracle_gaps(s):
    worst = 0.0
    for eta in (0.25, 0.1):
        vals, _ = oracle_eigendecomposition(dense_rotated_number_operator(bogoliubov_asymptotic(eta), 400))
        worst = max(worst, float(np.max(np.abs(np.diff(vals[:21]) - 1.0))), abs(vals[0]))
    return worst, 1e-8


def _williamson(s):
    params = ModelParams(s.cfg.omega, s.cfg.omega0)
    lc = params.lambda_c
    worst = 0.0
    for frac in (0.0, 0.2, 0.4, 0.6, 0.8, 0.9):
        lam = frac * lc
        w = williamson_frequencies(params, lam)
        e = mode_energies(params, lam)
        worst = max(worst, abs(w[0] / e.e1 - 1), abs(w[1] / e.e2 - 1))
    return worst, 1e-10


def _echo_minima(s):
    worst = 0.0
    for eta in (0.01, 0.05, 0.1, 0.25, 0.5):
        tab = s.table(bogoliubov_asymptotic(eta), 0, sectors=(0,))
        worst = max(worst, abs(loschmidt_echo(tab, 1.0, math.pi / 2) / echo_minimum_closed(eta) - 1))
    return worst, 1e-4


def _fidelity(s):
    worst = 0.0
    for eta in np.logspace(-3, 0, 8):
        tab = s.table(bogoliubov_asymptotic(eta), 0, sectors=(0,))
        worst = max(worst, abs(fidelity_numeric(tab) - fidelity_closed(eta)))
    return worst, 1e-8


def _series(s):
    worst = 0.0
    for P in (0.1, 0.5, 0.9):
        _, _, r1, r2 = series_identity_check(P)
        worst = max(worst, r1, r2)
    return worst, 1e-12


def _periodicity(s):
    params = ModelParams(s.cfg.omega, s.cfg.omega0)
    lc = params.lambda_c
    lam0, lam = lc - 1e-3, lc - 1e-4
    pair = bogoliubov_pair(params, lam0, lam, s.cfg.bogoliubov)
    e1 = mode_energies(params, lam).e1
    T = period(e1)
    times = np.arange(401) * (2.0 * T / 400)
    res, tab = evolve(pair, e1, times, mu_max=s.cfg.mu_max, tol=s.cfg.tol)
    ap = amplitude_ap(tab, e1)
    m2 = res.second_moment
    shift = np.max(np.abs(m2[200:] - m2[:201]))
    refl = np.max(np.abs(m2[:201] - m2[:201][::-1]))
    peaks = [t for t, _ in detect_peaks(np.column_stack([times, m2]))]
    dt = times[1]
    expected = [T / 2, 3 * T / 2]
    peak_err = max(abs(a - b) for a, b in zip(peaks, expected)) / dt if len(peaks) == 2 else np.inf
    zeros = max(m2[0], m2[200], m2[400])
    return max(shift / (1e-6 * max(1.0, ap)), refl / (1e-6 * max(1.0, ap)), peak_err, zeros / (1e-8 * ap)), 1.0


def _collapse(s):
    params = ModelParams(s.cfg.omega, s.cfg.omega0)
    lc = params.lambda_c
    n = scaling_collapse(params, 0.1, [lc - 1e-3, lc - 7e-4, lc - 5e-4], "normal", s.cfg.bogoliubov)
    p = scaling_collapse(params, 0.1, [lc + 1e-3, lc + 7e-4, lc + 5e-4], "superradiant", s.cfg.bogoliubov)
    allv = np.concatenate([n.amplitudes, p.amplitudes])
    return float((allv.max() - allv.min()) / allv.max()), 0.02


def _pipeline(s):
    pair = bogoliubov_asymptotic(0.5)
    tab = s.table(pair, 8)
    worst = 0.0
    for t in (0.3, math.pi / 2, 2.0):
        g = survival_amplitudes(tab, 1.0, t)
        w = np.abs(g.g[0::2]) ** 2
        F = harmonic_weights(w)
        for m in range(0, 9):
            worst = max(worst, abs(f_of_m(tab, 1.0, m, t) - direct_f(tab, 1.0, m, t)))
        W = density_matrix_harmonics(g)
        full = np.zeros(W.size)
        full[: F.size] = F
        worst = max(worst, float(np.max(np.abs(W - full / full.sum()))))
    return worst, 1e-10


def _echo_consistency(s):
    times = np.linspace(0.0, 2 * math.pi, 97)
    res, tab = evolve(bogoliubov_asymptotic(0.1), 1.0, times, tol=s.cfg.tol, mu_max=s.cfg.mu_max)
    return float(np.max(np.abs(res.echo - loschmidt_echo(tab, 1.0, times)))), 1e-12


def _truncation(s):
    worst = 0.0
    for eta in (0.25, 0.1, 0.01):
        tab = s.table(bogoliubov_asymptotic(eta), 64, sectors=(0,))
        worst = max(worst, tab.ground_tail / s.cfg.tol, tab.max_tail() / tab.eps_row)
    return worst, 1.0


CHECKS = (("oracle_equivalence", _oracle_equivalence), ("oracle_gaps", _oracle_gaps),
          ("williamson", _williamson), ("echo_minima", _echo_minima), ("fidelity", _fidelity),
          ("series_identities", _series), ("truncation", _truncation), ("periodicity", _periodicity),
          ("scaling_collapse", _collapse), ("pipeline_identities", _pipeline),
          ("echo_consistency", _echo_consistency))


def run_validation(cfg: ScenarioConfig) -> dict:
    s = _Suite(cfg)
    for name, fn in CHECKS:
        s.run(name, fn)
    return {"passed": all(c["passed"] for c in s.checks), "checks": s.checks, "tables": s.tables,
            "failures": [c["name"] for c in s.checks if not c["passed"]]}
