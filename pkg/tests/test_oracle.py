import math

import numpy as np
import pytest

from dicke_harmonics.coefficients import build_table
from dicke_harmonics.effective_model import ModelParams, BogoliubovPair, bogoliubov_asymptotic, mode_energies
from dicke_harmonics.harmonics import harmonic_weights, survival_amplitudes
from dicke_harmonics.oracle import (DenseOperator, dense_rotated_number_operator, density_matrix_harmonics,
                                    oracle_eigendecomposition, williamson_frequencies)


def test_identity_pair_is_number_operator():
    A = dense_rotated_number_operator(BogoliubovPair(0.0, 1.0), 8).entries
    assert np.array_equal(A, np.diag(np.arange(8.0)))


def test_ground_entry_and_band_structure():
    A = dense_rotated_number_operator(bogoliubov_asymptotic(0.25), 6).entries
    assert A[0, 0] == pytest.approx(0.125)
    i, j = np.nonzero(A)
    assert set(np.abs(i - j)) <= {0, 2}
    assert np.array_equal(A, A.T)


def test_eigendecomposition_of_diagonal():
    vals, vecs = oracle_eigendecomposition(DenseOperator(3, np.diag([0.0, 1.0, 2.0])))
    assert np.allclose(vals, [0, 1, 2])
    assert np.allclose(vecs, np.eye(3))


def test_nonsymmetric_rejected():
    with pytest.raises(ValueError):
        oracle_eigendecomposition(DenseOperator(2, np.array([[0.0, 1.0], [0.0, 0.0]])))
    with pytest.raises(ValueError):
        dense_rotated_number_operator(BogoliubovPair(0.0, 1.0), 2)


@pytest.mark.parametrize("eta", [0.25, 0.1])
def test_integer_spectrum(eta):
    vals, _ = oracle_eigendecomposition(dense_rotated_number_operator(bogoliubov_asymptotic(eta), 400))
    assert abs(vals[0]) < 1e-8
    assert np.max(np.abs(np.diff(vals[:21]) - 1)) < 1e-8


def test_truncation_stability():
    pair = bogoliubov_asymptotic(0.1)
    _, v4 = oracle_eigendecomposition(dense_rotated_number_operator(pair, 400))
    _, v6 = oracle_eigendecomposition(dense_rotated_number_operator(pair, 600))
    assert np.max(np.abs(v4[:, :21] - v6[:400, :21])) < 1e-10


@pytest.mark.parametrize("eta", [0.25, 0.1])
def test_recursion_matches_oracle(eta):
    pair = bogoliubov_asymptotic(eta)
    tab = build_table(pair, 20)
    _, vecs = oracle_eigendecomposition(dense_rotated_number_operator(pair, 400))
    E = tab.entries
    k = min(400, E.shape[1])
    for n in range(21):
        row = np.zeros(400)
        row[:k] = E[n, :k]
        if row[np.argmax(np.abs(row))] < 0:
            row = -row
        assert np.max(np.abs(row - vecs[:, n])) < 1e-8


def test_williamson_decoupled():
    for w, w0 in ((1.0, 1.0), (2.0, 0.5), (0.3, 1.7)):
        e = williamson_frequencies(ModelParams(w, w0), 0.0)
        assert e == pytest.approx((min(w, w0), max(w, w0)), rel=1e-12)


def test_williamson_matches_closed_forms():
    p = ModelParams()
    assert williamson_frequencies(p, 0.375) == pytest.approx((0.5, 1.3228756), abs=1e-7)
    for lam in (0.1, 0.3, 0.49):
        e = mode_energies(p, lam)
        w = williamson_frequencies(p, lam)
        assert abs(w[0] / e.e1 - 1) < 1e-10 and abs(w[1] / e.e2 - 1) < 1e-10
    q = ModelParams(2.0, 0.5)
    lam = 0.8 * q.lambda_c
    e = mode_energies(q, lam)
    assert williamson_frequencies(q, lam) == pytest.approx((e.e1, e.e2), rel=1e-10)


def test_williamson_rejects_non_normal():
    with pytest.raises(ValueError):
        williamson_frequencies(ModelParams(), 0.5)
    with pytest.raises(ValueError):
        williamson_frequencies(ModelParams(), 0.6)


def test_density_matrix_trivial_cases():
    tab = build_table(bogoliubov_asymptotic(0.25), 32, sectors=(0,))
    W = density_matrix_harmonics(survival_amplitudes(tab, 1.0, 0.0))
    assert abs(W[0] - 1) < 1e-12 and np.max(W[1:]) < 1e-12
    one = build_table(bogoliubov_asymptotic(1.0), 16)
    for t in (0.5, 2.0):
        assert density_matrix_harmonics(survival_amplitudes(one, 1.0, t), 0) == 1.0


def test_density_matrix_matches_factorized_weights():
    tab = build_table(bogoliubov_asymptotic(0.25), 64, sectors=(0,))
    for t in (0.4, math.pi / 2, 2.5):
        g = survival_amplitudes(tab, 1.0, t)
        W = density_matrix_harmonics(g)
        F = harmonic_weights(np.abs(g.g[0::2]) ** 2)
        F = F / F.sum()
        assert np.max(np.abs(W[:21] - F[:21])) < 1e-12
