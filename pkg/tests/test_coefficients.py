import math

import numpy as np
import pytest

from dicke_harmonics.coefficients import (build_table, closed_form_ground_weights, dump_csv, ground_row,
                                          ladder_extend, ladder_step, matrix_power_rows, series_identity_check)
from dicke_harmonics.effective_model import BogoliubovPair, bogoliubov_asymptotic
from dicke_harmonics.errors import TruncationError
from dicke_harmonics.oracle import dense_rotated_number_operator, oracle_eigendecomposition


def test_ground_row_identity():
    g = ground_row(bogoliubov_asymptotic(1.0))
    assert g.coeffs[0] == 1.0 and np.all(g.coeffs[1:] == 0)


def test_ground_row_eta_quarter():
    g = ground_row(bogoliubov_asymptotic(0.25))
    c = g.coeffs
    assert c[0] == pytest.approx(0.970984, abs=1e-6)
    assert c[2] == pytest.approx(-0.228864, abs=1e-6)
    assert c[4] ** 2 == pytest.approx(0.004365, abs=1e-6)
    assert np.all(c[1::2] == 0)
    assert g.mu_max % 2 == 0


def test_ground_row_recursion_and_signs():
    pair = bogoliubov_asymptotic(0.1)
    c = ground_row(pair).coeffs
    for mu in range(2, 40, 2):
        assert c[mu] == pytest.approx(-pair.p1 * math.sqrt(mu - 1) / (pair.p2 * math.sqrt(mu)) * c[mu - 2],
                                      rel=1e-14)
    assert c[0] > 0 and np.all(np.sign(c[0:40:2]) == np.array([(-1) ** k for k in range(20)]))


def test_ground_row_eta_small_cutoff_scale():
    g = ground_row(bogoliubov_asymptotic(0.001), tol=1e-10)
    P = bogoliubov_asymptotic(0.001).ratio_sq
    assert P == pytest.approx(0.8812, abs=1e-4)
    assert 100 <= g.mu_max <= 1024
    assert g.tail < 1e-10
    assert 1 - np.sum(g.coeffs ** 2) < 1e-10


def test_ground_row_normalization_matches_tail():
    for eta in (0.5, 0.1, 0.01, 0.002):
        g = ground_row(bogoliubov_asymptotic(eta), tol=1e-12)
        deficit = 1 - math.fsum(g.coeffs ** 2)
        assert deficit < 1e-12 + 1e-15


def test_ground_row_rejects_divergent():
    with pytest.raises(ValueError):
        ground_row(BogoliubovPair(1.0, 1.0))


def test_ground_row_cap_reports_tail():
    with pytest.raises(TruncationError) as info:
        ground_row(bogoliubov_asymptotic(1e-7), tol=1e-14, mu_cap=128)
    assert info.value.achieved > 1e-14


def test_closed_form_weights():
    w = closed_form_ground_weights(0.0, 10)
    assert w[0] == 1 and np.all(w[1:] == 0)
    w = closed_form_ground_weights(1 / 9, 10)
    assert w[2] == pytest.approx((1 / 9) * 0.5 * math.sqrt(8 / 9), rel=1e-13)
    assert w[2] == pytest.approx(0.052378, abs=1e-6)
    with pytest.raises(ValueError):
        closed_form_ground_weights(1.0, 10)


def test_closed_form_matches_ground_row():
    for P in (0.5, 0.9, 0.99):
        p1 = math.sqrt(P / (1 - P))
        pair = BogoliubovPair(p1, math.sqrt(1 + p1 * p1))
        g = ground_row(pair)
        w = closed_form_ground_weights(P, g.mu_max)
        assert np.max(np.abs(w - g.coeffs ** 2)) < 1e-13


def test_closed_form_no_overflow_large_mu():
    w = closed_form_ground_weights(0.999, 5000)
    assert np.all(np.isfinite(w)) and w[5000] > 0


def test_series_identities():
    a, b, _, _ = series_identity_check(0.0)
    assert (a, b) == (1.0, 1.0)
    a, b, r1, r2 = series_identity_check(0.5)
    assert a == pytest.approx(1 / math.sqrt(0.5), abs=1e-12)
    assert b == pytest.approx(1 / math.sqrt(1.5), abs=1e-12)
    for P in (0.1, 0.5, 0.9):
        _, _, r1, r2 = series_identity_check(P)
        assert r1 < 1e-12 and r2 < 1e-12


def test_ladder_identity_table():
    tab = build_table(bogoliubov_asymptotic(1.0), 5)
    assert np.allclose(tab.entries[:, :6], np.eye(6)[:, :6])
    assert tab.row(1)[1] == 1.0 and np.all(tab.row(1)[[0, 2, 3]] == 0)


def test_first_excited_row_against_dense_oracle():
    pair = bogoliubov_asymptotic(0.25)
    tab = build_table(pair, 4)
    assert tab.row(1)[1] == pytest.approx(0.9155, abs=1e-4)
    _, vecs = oracle_eigendecomposition(dense_rotated_number_operator(pair, 200))
    assert abs(tab.row(1)[1] - vecs[1, 1]) < 1e-12


def test_parity_is_exact():
    tab = build_table(bogoliubov_asymptotic(0.1), 15)
    E = tab.entries
    n, mu = np.indices(E.shape)
    assert np.all(E[(n + mu) % 2 == 1] == 0.0)


@pytest.mark.parametrize("eta", [0.25, 0.1, 0.02])
def test_rows_match_matrix_powers(eta):
    pair = bogoliubov_asymptotic(eta)
    tab = build_table(pair, 10)
    ref = matrix_power_rows(tab.row(0), pair, 10)
    assert np.max(np.abs(ref[:, : tab.mu_max - 20] - tab.entries[:, : tab.mu_max - 20])) < 1e-10


def test_rows_satisfy_ladder_step():
    pair = bogoliubov_asymptotic(0.05)
    tab = build_table(pair, 200)
    for n in (0, 13, 99, 150, 199):
        step = ladder_step(tab.row(n), pair, n)
        assert np.max(np.abs(step[:-2] - tab.row(n + 1)[:-2])) < 1e-10


@pytest.mark.parametrize("eta", [0.25, 0.1])
def test_rows_match_dense_oracle(eta):
    pair = bogoliubov_asymptotic(eta)
    tab = build_table(pair, 20)
    _, vecs = oracle_eigendecomposition(dense_rotated_number_operator(pair, 400))
    E = tab.entries
    for n in range(21):
        row = np.zeros(400)
        k = min(400, E.shape[1])
        row[:k] = E[n, :k]
        row = row if row[np.argmax(np.abs(row))] >= 0 else -row
        assert np.max(np.abs(row - vecs[:, n])) < 1e-8


def test_row_tails_recorded_and_small():
    tab = build_table(bogoliubov_asymptotic(0.01), 300, sectors=(0,))
    t = tab.row_tail_mass
    assert np.all(np.isnan(t[1::2]))
    assert np.all(t[0::2] >= 0) and np.all(t[0::2] <= tab.eps_row)
    assert tab.ground_tail < 1e-12


def test_large_rows_match_gaussian_populations():
    from dicke_harmonics.harmonics import survival_even
    from dicke_harmonics.oracle import squeezed_populations
    pair = bogoliubov_asymptotic(0.01)
    tab = build_table(pair, 1024, sectors=(0,))
    w = np.abs(survival_even(tab, 1.0, [math.pi / 2])[0]) ** 2
    assert np.max(np.abs(w - squeezed_populations(pair, math.pi / 2, w.size - 1))) < 1e-12


def test_small_cutoff_rejected():
    with pytest.raises(TruncationError, match="increase mu_max"):
        build_table(bogoliubov_asymptotic(0.1), 40, mu_max=40)


def test_ladder_extend_appends_rows():
    pair = bogoliubov_asymptotic(0.2)
    tab = build_table(pair, 6, mu_max=200)
    ext = ladder_extend(tab, 12)
    full = build_table(pair, 12, mu_max=200)
    assert ext.n_max == 12
    assert np.max(np.abs(ext.entries - full.entries)) < 1e-14
    assert ladder_extend(ext, 5) is ext


def test_cos_factor_pair_uses_canonical_rows():
    pair = BogoliubovPair(0.3 * 0.9, math.sqrt(1.09) * 0.9, True)
    tab = build_table(pair, 4)
    assert abs(tab.pair.commutator - 1) < 1e-12
    assert tab.source_pair is pair


def test_gauge_flip_leaves_observables():
    from dicke_harmonics.harmonics import survival_even
    pair = bogoliubov_asymptotic(0.2)
    tab = build_table(pair, 60, sectors=(0,))
    w = np.abs(survival_even(tab, 1.0, [0.7])[0]) ** 2
    flipped = tab.sectors[0].copy()
    flipped[3] *= -1
    flipped[7] *= -1
    from dicke_harmonics.coefficients import CoefficientTable
    tab2 = CoefficientTable(tab.pair, tab.mu_max, tab.n_max, {0: flipped}, tab.row_tail_mass, tab.ground_tail)
    w2 = np.abs(survival_even(tab2, 1.0, [0.7])[0]) ** 2
    assert np.array_equal(w, w2)


def test_csv_dump(tmp_path):
    tab = build_table(bogoliubov_asymptotic(0.5), 3, mu_max=64)
    path = tmp_path / "c.csv"
    dump_csv(tab, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,mu,C"
    n, mu, c = lines[1].split(",")
    assert (n, mu) == ("0", "0") and float(c) == pytest.approx(tab.ground[0], rel=1e-11)
    assert len(lines) == 1 + 4 * 33 - 2
