"""Runs behind the command-line front end and the figure reproductions."""

from __future__ import annotations

import math
import os

import numpy as np

from . import __version__
from .analysis_fit import fit_le_relation, fit_power_law
from .config import ScenarioConfig
from .echo_fidelity import (echo_minimum_closed, fidelity_closed, fidelity_numeric, le_harmonics_relation,
                            loschmidt_echo)
from .effective_model import (ModelParams, bogoliubov_pair, classify_phase, coupling_from_eta,
                              mode_energies, scaling_eta)
from .errors import ConfigError
from .harmonics import amplitude_ap, converged_table, evolve, period, q_distribution
from .output import Column, write_table

FIG2_ETAS = tuple(np.logspace(-2, math.log10(0.4), 12))
RELATION_A = {"eta": 1e-3, "lambda0_offset": -0.01, "times": tuple(float(t) for t in range(1, 26))}
RELATION_B = {"t": 35.0, "lambda0_offset": -0.005, "etas": tuple(np.logspace(-3, math.log10(0.3), 12))}


def _meta(cfg: ScenarioConfig | None, **extra) -> dict:
    meta = {"version": __version__}
    if cfg is not None:
        meta["config"] = cfg.resolved()
    meta.update(extra)
    return meta


def _cutoffs(report: dict) -> dict:
    keys = ("n_max", "mu_max", "m_max", "ground_tail", "max_row_tail", "probe_time", "final_relative_change")
    return {k: report.get(k) for k in keys}


# spectrum -----------------------------------------------------------------

def spectrum_rows(cfg: ScenarioConfig):
    lams = list(cfg.lambdas or ([] if cfg.lam is None else [cfg.lam]))
    if not lams:
        raise ConfigError("spectrum needs a non-empty lambda grid")
    params = cfg.params
    lc = params.lambda_c
    phases, e1, e2, etas = [], [], [], []
    for lam in sorted(lams):
        if lam < 0:
            raise ConfigError(f"coupling must be non-negative, got {lam}")
        s = mode_energies(params, lam)
        phases.append(s.phase.value)
        e1.append(s.e1)
        e2.append(s.e2)
        eta = float("nan")
        if cfg.lam0 is not None:
            try:
                eta = scaling_eta(lam, cfg.lam0, lc)
            except ValueError:
                pass
        etas.append(eta)
    cols = [Column("lambda", "energy", sorted(lams)), Column("phase", "-", phases), Column("e1", "energy", e1),
            Column("e2", "energy", e2), Column("eta", "1", etas)]
    return cols, _meta(cfg, lambda_c=lc)


# evolve -------------------------------------------------------------------

def _pair_and_energy(cfg: ScenarioConfig, lam0: float, lam: float):
    pair = bogoliubov_pair(cfg.params, lam0, lam, cfg.bogoliubov, cfg.apply_cos)
    return pair, mode_energies(cfg.params, lam).e1


def evolve_run(cfg: ScenarioConfig):
    lam0, lam, eta = cfg.couplings()
    times = cfg.time_grid()
    pair, e1 = _pair_and_energy(cfg, lam0, lam)
    res, table = evolve(pair, e1, times, q_times=cfg.q_times, n_max=cfg.n_max, m_max=cfg.m_max, tol=cfg.tol,
                        threads=cfg.threads, mu_max=cfg.mu_max)
    m_l = loschmidt_echo(table, e1, times, cfg.threads)
    cols = [Column("t", "1/energy", times), Column("m2", "1", res.second_moment), Column("M_L", "1", m_l)]
    q_cols = None
    if res.q_rows is not None:
        m = np.arange(res.q_rows.shape[1])
        q_cols = [Column("t", "1/energy", np.repeat(res.q_times, m.size)),
                  Column("m", "1", np.tile(m, res.q_times.size)), Column("Q", "1", res.q_rows.ravel())]
    meta = _meta(cfg, lambda0=lam0, lambda_=lam, eta=eta, e1=e1, p1=pair.p1, p2=pair.p2,
                 cutoffs=_cutoffs(res.convergence_report))
    return cols, q_cols, meta


# scaling ------------------------------------------------------------------

def scaling_point(params: ModelParams, eta: float, lam0: float, bogoliubov="asymptotic", apply_cos=False,
                  tol=1e-12, mu_max=None):
    """``(A_p, M_p numeric, L_p numeric, convergence report)`` at one ``eta``."""
    lam = coupling_from_eta(eta, lam0, params.lambda_c)
    if lam < 0 or classify_phase(params, lam) is not classify_phase(params, lam0):
        raise ConfigError(f"eta={eta} maps lambda0={lam0} across the critical point")
    pair = bogoliubov_pair(params, lam0, lam, bogoliubov, apply_cos)
    e1 = mode_energies(params, lam).e1
    table, report = converged_table(pair, e1, period(e1) / 2.0, tol=tol, mu_max=mu_max)
    return amplitude_ap(table, e1), loschmidt_echo(table, e1, period(e1) / 2.0), fidelity_numeric(table), report


def _default_lam0(params: ModelParams, phase: str) -> float:
    return params.lambda_c + (-1e-3 if phase == "normal" else 1e-3)


def scaling_run(cfg: ScenarioConfig):
    params = cfg.params
    etas = sorted(cfg.etas or FIG2_ETAS)
    lam0 = cfg.lam0 if cfg.lam0 is not None else _default_lam0(params, cfg.phase)
    if classify_phase(params, lam0) is not cfg.phase_enum:
        raise ConfigError(f"lambda0={lam0} is not in the {cfg.phase} phase")
    rows = {k: [] for k in ("ap", "mp", "mpc", "lp", "lpc")}
    cutoffs = []
    for eta in etas:
        ap, mp, lp, rep = scaling_point(params, eta, lam0, cfg.bogoliubov, cfg.apply_cos, cfg.tol, cfg.mu_max)
        for k, v in zip(rows, (ap, mp, echo_minimum_closed(eta), lp, fidelity_closed(eta))):
            rows[k].append(v)
        cutoffs.append(_cutoffs(rep))
    pts = [(e, a) for e, a in zip(etas, rows["ap"]) if a > 0 and e != 1.0]
    fit = fit_power_law(pts) if len(pts) >= 2 else None
    cols = [Column("eta", "1", etas), Column("A_p", "1", rows["ap"]), Column("M_p_numeric", "1", rows["mp"]),
            Column("M_p_closed", "1", rows["mpc"]), Column("L_p_numeric", "1", rows["lp"]),
            Column("L_p_closed", "1", rows["lpc"])]
    meta = _meta(cfg, lambda0=lam0, fit=None if fit is None else fit.__dict__, cutoffs=cutoffs)
    return cols, fit, meta


# relation -----------------------------------------------------------------

def relation_points(params: ModelParams, protocol="both", bogoliubov="asymptotic", tol=1e-12, threads=None):
    """Rows ``(protocol, eta, t, m2, M_L)`` for the two sampling protocols."""
    lc = params.lambda_c
    out = []
    if protocol in ("A", "both"):
        lam0 = lc + RELATION_A["lambda0_offset"]
        lam = coupling_from_eta(RELATION_A["eta"], lam0, lc)
        pair = bogoliubov_pair(params, lam0, lam, bogoliubov)
        e1 = mode_energies(params, lam).e1
        times = np.array(RELATION_A["times"])
        res, table = evolve(pair, e1, times, tol=tol, threads=threads)
        m_l = loschmidt_echo(table, e1, times, threads)
        out += [("A", RELATION_A["eta"], t, m2, ml) for t, m2, ml in zip(times, res.second_moment, m_l)]
    if protocol in ("B", "both"):
        lam0 = lc + RELATION_B["lambda0_offset"]
        t = RELATION_B["t"]
        for eta in RELATION_B["etas"]:
            lam = coupling_from_eta(eta, lam0, lc)
            pair = bogoliubov_pair(params, lam0, lam, bogoliubov)
            e1 = mode_energies(params, lam).e1
            res, table = evolve(pair, e1, [t], tol=tol, threads=1)
            out.append(("B", float(eta), t, float(res.second_moment[0]), loschmidt_echo(table, e1, t)))
    if not out:
        raise ConfigError(f"unknown protocol {protocol!r}; use A, B or both")
    return out


def collapse_gap(rows) -> float:
    """Largest ``|M_L|`` mismatch of protocol B against protocol A interpolated in ``<m^2>``.

    Only protocol-B points inside protocol A's ``<m^2>`` range are compared; NaN if none are.
    """
    a = np.array([(r[3], r[4]) for r in rows if r[0] == "A"])
    b = np.array([(r[3], r[4]) for r in rows if r[0] == "B"])
    if a.size == 0 or b.size == 0:
        return float("nan")
    a = a[np.argsort(a[:, 0], kind="stable")]
    inside = (b[:, 0] >= a[0, 0]) & (b[:, 0] <= a[-1, 0])
    if not inside.any():
        return float("nan")
    return float(np.max(np.abs(np.interp(b[inside, 0], a[:, 0], a[:, 1]) - b[inside, 1])))


def relation_run(cfg: ScenarioConfig):
    rows = relation_points(cfg.params, cfg.protocol, cfg.bogoliubov, cfg.tol, cfg.threads)
    fit = fit_le_relation([(r[3], r[4]) for r in rows]) if len(rows) >= 3 else None
    gap = collapse_gap(rows)
    model = le_harmonics_relation(np.array([r[3] for r in rows]), fit.a, fit.b) if fit else [float("nan")] * len(rows)
    cols = [Column("protocol", "-", [r[0] for r in rows]), Column("eta", "1", [r[1] for r in rows]),
            Column("t", "1/energy", [r[2] for r in rows]), Column("m2", "1", [r[3] for r in rows]),
            Column("M_L", "1", [r[4] for r in rows]), Column("M_L_fit", "1", model)]
    meta = _meta(cfg, fit=None if fit is None else fit.__dict__, collapse_gap=gap)
    return cols, fit, gap, meta


# figures ------------------------------------------------------------------

def _gp(path, body: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# gnuplot script\nset datafile separator ','\nset key autotitle columnhead\n" + body)


def _fig1(out_dir, threads):
    params = ModelParams()
    lc = params.lambda_c
    lam = lc - 1e-4
    e1 = mode_energies(params, lam).e1
    T = period(e1)
    times = np.arange(801) * (2.0 * T / 800)
    cols = [Column("t", "1/energy", times)]
    etas = []
    for lam0 in (lc - 1e-3, lc - 7e-4):
        eta = scaling_eta(lam, lam0, lc)
        etas.append(eta)
        res, _ = evolve(bogoliubov_pair(params, lam0, lam), e1, times, threads=threads)
        cols.append(Column(f"m2(eta={eta:.6g})", "1", res.second_moment))
    path = os.path.join(out_dir, "fig1_second_moment.csv")
    write_table(path, cols)
    gp = os.path.join(out_dir, "fig1.gp")
    _gp(gp, "set xlabel 't'\nset ylabel '<m^2>_t'\n"
            "plot 'fig1_second_moment.csv' using 1:2 with lines, '' using 1:3 with lines dt 2\n")
    return [path, gp]


def _fig2(out_dir, threads):
    params = ModelParams()
    lc = params.lambda_c
    etas = list(FIG2_ETAS)
    normal, superr, mp, lp = [], [], [], []
    for eta in etas:
        ap_n, m_n, l_n, _ = scaling_point(params, eta, lc - 1e-3)
        ap_s, _, _, _ = scaling_point(params, eta, lc + 1e-3)
        normal.append(ap_n)
        superr.append(ap_s)
        mp.append(m_n)
        lp.append(l_n)
    fit = fit_power_law(list(zip(etas, normal)))
    cols = [Column("eta", "1", etas), Column("A_p_normal", "1", normal), Column("A_p_superradiant", "1", superr),
            Column("A_p_fit", "1", [fit.a * e ** fit.b for e in etas]), Column("M_p_numeric", "1", mp),
            Column("M_p_closed", "1", [echo_minimum_closed(e) for e in etas]), Column("L_p_numeric", "1", lp),
            Column("L_p_closed", "1", [fidelity_closed(e) for e in etas])]
    path = os.path.join(out_dir, "fig2_amplitude.csv")
    write_table(path, cols)
    fit_path = os.path.join(out_dir, "fig2_fit.csv")
    write_table(fit_path, [Column("a", "1", [fit.a]), Column("b", "1", [fit.b]),
                           Column("residual", "1", [fit.residual]), Column("n_points", "1", [fit.n_points])])
    gp = os.path.join(out_dir, "fig2.gp")
    _gp(gp, "set logscale xy\nset xlabel 'eta'\nset ylabel 'A_p'\n"
            "plot 'fig2_amplitude.csv' using 1:2 with points pt 7, '' using 1:3 with points pt 6, "
            "'' using 1:4 with lines\n")
    return [path, fit_path, gp]


def _fig3(out_dir, threads):
    params = ModelParams()
    lc = params.lambda_c
    lam = lc - 0.01
    e1 = mode_energies(params, lam).e1
    t_p = period(e1) / 2.0
    etas = (0.05, 0.1, 0.2)
    qs = []
    for eta in etas:
        pair = bogoliubov_pair(params, lc - 0.01 / eta, lam)
        table, _ = converged_table(pair, e1, t_p)
        qs.append(q_distribution(table, e1, t_p))
    m_top = max(int(np.flatnonzero(q > 1e-12).max()) for q in qs)
    m = np.arange(m_top + 1)
    cols = [Column("m", "1", m)]
    for eta, q in zip(etas, qs):
        padded = np.zeros(m.size)
        k = min(q.size, m.size)
        padded[:k] = q[:k]
        cols.append(Column(f"Q(eta={eta:g})", "1", padded))
    path = os.path.join(out_dir, "fig3_q_distribution.csv")
    write_table(path, cols)
    gp = os.path.join(out_dir, "fig3.gp")
    _gp(gp, "set logscale y\nset xlabel 'm'\nset ylabel 'Q(m,t_p)'\n"
            "plot for [i=2:4] 'fig3_q_distribution.csv' using 1:(column(i) > 0 ? column(i) : 1/0) with linespoints\n")
    return [path, gp]


FIG4_ETAS = (0.4, 0.1, 0.01, 0.001)


def fig4_window(eta: float) -> float:
    """End of the plotted time range in units of the period."""
    return 0.05 if eta < 0.005 else 0.4


def _fig4(out_dir, threads):
    params = ModelParams()
    lc = params.lambda_c
    paths = []
    for phase, sign in (("normal", -1.0), ("superradiant", 1.0)):
        lam0 = lc + sign * 0.01
        rows = []
        for eta in sorted(FIG4_ETAS):
            lam = coupling_from_eta(eta, lam0, lc)
            e1 = mode_energies(params, lam).e1
            T = period(e1)
            times = np.logspace(math.log10(1e-3 * T), math.log10(fig4_window(eta) * T), 80)
            res, _ = evolve(bogoliubov_pair(params, lam0, lam), e1, times, threads=threads)
            guide = res.second_moment[0] * (times / times[0]) ** 2
            rows += list(zip([eta] * times.size, times, times / T, res.second_moment, guide))
        cols = [Column("eta", "1", [r[0] for r in rows]), Column("t", "1/energy", [r[1] for r in rows]),
                Column("t_over_T", "1", [r[2] for r in rows]), Column("m2", "1", [r[3] for r in rows]),
                Column("t2_guide", "1", [r[4] for r in rows])]
        path = os.path.join(out_dir, f"fig4_{phase}.csv")
        write_table(path, cols)
        paths.append(path)
    gp = os.path.join(out_dir, "fig4.gp")
    _gp(gp, "set logscale xy\nset xlabel 't'\nset ylabel '<m^2>_t'\nset multiplot layout 1,2\n"
            "plot 'fig4_normal.csv' using 2:4 with lines, '' using 2:5 with lines dt 2\n"
            "plot 'fig4_superradiant.csv' using 2:4 with lines, '' using 2:5 with lines dt 2\n"
            "unset multiplot\n")
    return paths + [gp]


def _fig5(out_dir, threads):
    params = ModelParams()
    rows = relation_points(params, "both", threads=threads)
    fit = fit_le_relation([(r[3], r[4]) for r in rows])
    gap = collapse_gap(rows)
    cols = [Column("protocol", "-", [r[0] for r in rows]), Column("eta", "1", [r[1] for r in rows]),
            Column("t", "1/energy", [r[2] for r in rows]), Column("m2", "1", [r[3] for r in rows]),
            Column("one_minus_M_L", "1", [1.0 - r[4] for r in rows]),
            Column("one_minus_fit", "1", [1.0 - le_harmonics_relation(r[3], fit.a, fit.b) for r in rows])]
    path = os.path.join(out_dir, "fig5_relation.csv")
    write_table(path, cols)
    fit_path = os.path.join(out_dir, "fig5_fit.csv")
    write_table(fit_path, [Column("a", "1", [fit.a]), Column("b", "1", [fit.b]),
                           Column("residual", "1", [fit.residual]), Column("n_points", "1", [fit.n_points]),
                           Column("collapse_gap", "1", [gap])])
    gp = os.path.join(out_dir, "fig5.gp")
    _gp(gp, f"a = {fit.a:.11e}\nb = {fit.b:.11e}\nf(x) = 1 - (a + b*x**(2./3))/(a + x + b*x**(2./3))\n"
            "set logscale x\nset xlabel '<m^2>_t'\nset ylabel '1 - M_L'\n"
            "plot 'fig5_relation.csv' using (strcol(1) eq 'A' ? $4 : 1/0):5 with points pt 6 title 'eta=0.001', "
            "'' using (strcol(1) eq 'B' ? $4 : 1/0):5 with points pt 8 title 't=35', f(x) with lines title 'fit'\n")
    return [path, fit_path, gp]


FIGURES = {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5}


def reproduce(figure: int, out_dir, threads=None):
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure}")
    os.makedirs(out_dir, exist_ok=True)
    return FIGURES[figure](out_dir, threads)
