import math

import numpy as np
import pytest

from dicke_harmonics.effective_model import (BogoliubovPair, ModelParams, Phase, bogoliubov_asymptotic,
                                             bogoliubov_exact, bogoliubov_pair, classify_phase,
                                             coupling_from_eta, critical_coupling, mixing_angle,
                                             mode_energies, near_critical_e1, scaling_eta)
from dicke_harmonics.errors import CriticalPointError, SamePhaseError

P = ModelParams()


@pytest.mark.parametrize("w,w0,expected", [(1, 1, 0.5), (4, 1, 1.0), (2, 0.5, 0.5)])
def test_critical_coupling(w, w0, expected):
    params = ModelParams(w, w0)
    assert critical_coupling(params) == pytest.approx(expected, rel=1e-15)
    assert params.lambda_c == pytest.approx(expected, rel=1e-15)


def test_params_reject_nonpositive():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, -1.0)


@pytest.mark.parametrize("lam,phase", [(0.4, Phase.NORMAL), (0.5, Phase.CRITICAL), (0.6, Phase.SUPERRADIANT),
                                       (0.5 + 5e-13, Phase.CRITICAL), (0.5 + 1e-11, Phase.SUPERRADIANT)])
def test_classify_phase(lam, phase):
    assert classify_phase(P, lam) is phase


def test_classify_rejects_negative():
    with pytest.raises(ValueError):
        classify_phase(P, -0.1)


def test_mode_energies_examples():
    s = mode_energies(P, 0.0)
    assert (s.e1, s.e2) == pytest.approx((1.0, 1.0), rel=1e-15)
    s = mode_energies(P, 0.375)
    assert s.e1 == pytest.approx(0.5, rel=1e-14)
    assert s.e2 == pytest.approx(1.3228756555322954, rel=1e-14)
    s = mode_energies(P, 0.6)
    assert s.e1 == pytest.approx(0.633902, abs=1e-6)
    assert s.e2 == pytest.approx(1.634555, abs=1e-6)
    s = mode_energies(P, 0.5)
    assert s.e1 == 0.0 and s.e2 == pytest.approx(math.sqrt(2), rel=1e-15)


def _ep_direct(w, w0, lam):
    kappa = w * w0 / (4 * lam * lam)
    s = w0 ** 2 / kappa ** 2
    return math.sqrt(0.5 * (w ** 2 + s - math.sqrt((s - w ** 2) ** 2 + 4 * w ** 2 * w0 ** 2)))


@pytest.mark.parametrize("w,w0,lam", [(1, 1, 0.75), (1, 1, 0.6), (2, 0.5, 0.9), (0.7, 1.3, 1.2)])
def test_superradiant_matches_direct_formula(w, w0, lam):
    params = ModelParams(w, w0)
    assert mode_energies(params, lam).e1 == pytest.approx(_ep_direct(w, w0, lam), rel=1e-12)


def test_equal_frequency_closed_form():
    for lam in np.linspace(0, 0.4999, 50):
        e1 = mode_energies(P, lam).e1
        assert e1 == pytest.approx(math.sqrt(1 - 2 * lam), rel=1e-14)


def test_e1_monotone_and_vanishes_only_at_critical():
    normal = [mode_energies(P, lam).e1 for lam in np.linspace(0, 0.4999, 200)]
    superr = [mode_energies(P, lam).e1 for lam in np.linspace(0.5001, 2.0, 200)]
    assert np.all(np.diff(normal) < 0) and np.all(np.diff(superr) > 0)
    assert min(normal) > 0 and min(superr) > 0


def test_e1_below_e2():
    for lam in np.concatenate([np.linspace(0, 0.49, 20), np.linspace(0.51, 3, 20)]):
        s = mode_energies(ModelParams(1.3, 0.8), lam * math.sqrt(1.3 * 0.8))
        assert s.e1 < s.e2


def test_near_critical_examples():
    assert near_critical_e1(P, 0.5) == 0.0
    assert near_critical_e1(P, 0.49) == pytest.approx(math.sqrt(0.02), rel=1e-12)
    exact = mode_energies(P, 0.49).e1
    assert abs(near_critical_e1(P, 0.49) / exact - 1) < 0.02


@pytest.mark.parametrize("side", [-1.0, 1.0])
def test_near_critical_gap_shrinks(side):
    # unequal frequencies: for omega = omega0 the normal-phase forms coincide exactly
    params = ModelParams(1.0, 2.0)
    lc = params.lambda_c
    gaps = []
    for d in np.geomspace(1e-2, 1e-7, 12):
        lam = lc + side * d
        gaps.append(abs(near_critical_e1(params, lam) / mode_energies(params, lam).e1 - 1))
    assert np.all(np.diff(gaps) < 0)


def test_near_critical_exact_for_equal_frequencies_normal():
    for lam in (0.3, 0.45, 0.4999):
        assert near_critical_e1(P, lam) == pytest.approx(mode_energies(P, lam).e1, rel=1e-12)


def test_scaling_eta():
    lc = 0.5
    assert scaling_eta(lc - 1e-4, lc - 1e-3, lc) == pytest.approx(0.1, rel=1e-12)
    assert scaling_eta(0.3, 0.3, lc) == 1.0
    with pytest.raises(SamePhaseError, match="same-phase comparison required"):
        scaling_eta(lc - 1e-4, lc + 1e-3, lc)
    with pytest.raises(SamePhaseError):
        scaling_eta(lc, lc - 1e-3, lc)


def test_coupling_from_eta_inverts_scaling():
    lam = coupling_from_eta(0.25, 0.49, 0.5)
    assert scaling_eta(lam, 0.49, 0.5) == pytest.approx(0.25, rel=1e-12)


def test_bogoliubov_exact_example():
    pair = bogoliubov_exact(P, 0.4, 0.45)
    assert pair.p1 == pytest.approx(0.174155, abs=1e-6)
    assert pair.p2 == pytest.approx(1.015052, abs=1e-6)
    assert abs(pair.commutator - 1) < 1e-12


def test_bogoliubov_identity():
    pair = bogoliubov_exact(P, 0.3, 0.3)
    assert (pair.p1, pair.p2) == (0.0, 1.0)


def test_bogoliubov_exact_canonical_on_grid():
    for params in (P, ModelParams(2.0, 0.5), ModelParams(0.6, 1.7)):
        lc = params.lambda_c
        for lam0, lam in [(0.2 * lc, 0.9 * lc), (0.9 * lc, 0.2 * lc), (1.1 * lc, 2 * lc), (3 * lc, 1.01 * lc)]:
            assert abs(bogoliubov_exact(params, lam0, lam).commutator - 1) < 1e-12


def test_bogoliubov_exact_critical_rejected():
    with pytest.raises((CriticalPointError, SamePhaseError)):
        bogoliubov_exact(P, 0.5, 0.4)


def test_exact_matches_asymptotic_normal_equal_frequencies():
    for lam0, lam in [(0.499, 0.4999), (0.4, 0.45), (0.1, 0.3), (0.45, 0.2)]:
        a = bogoliubov_asymptotic(scaling_eta(lam, lam0, 0.5))
        e = bogoliubov_exact(P, lam0, lam)
        assert abs(a.p1 - e.p1) < 1e-12 and abs(a.p2 - e.p2) < 1e-12


def test_bogoliubov_asymptotic_examples():
    assert bogoliubov_asymptotic(1.0).p1 == 0.0 and bogoliubov_asymptotic(1.0).p2 == 1.0
    pair = bogoliubov_asymptotic(0.01)
    assert pair.p1 == pytest.approx(1.423025, abs=1e-6)
    assert pair.p2 == pytest.approx(1.739253, abs=1e-6)
    pair = bogoliubov_asymptotic(0.25)
    assert pair.p1 == pytest.approx(0.353553, abs=1e-6)
    assert pair.p2 == pytest.approx(1.060660, abs=1e-6)
    assert pair.p1 / pair.p2 == pytest.approx(1 / 3, rel=1e-14)
    with pytest.raises(ValueError):
        bogoliubov_asymptotic(0.0)


def test_cos_factor_breaks_canonical_condition_only_when_requested():
    pair = bogoliubov_exact(ModelParams(1.0, 2.0), 0.5, 0.6, apply_cos=True)
    assert pair.cos_factor_applied
    r, r0 = mixing_angle(ModelParams(1.0, 2.0), 0.6), mixing_angle(ModelParams(1.0, 2.0), 0.5)
    assert pair.commutator == pytest.approx(math.cos(r - r0) ** 2, rel=1e-12)
    canon = pair.canonical()
    assert abs(canon.commutator - 1) < 1e-12 and canon.p1 / canon.p2 == pytest.approx(pair.p1 / pair.p2)


def test_mixing_angle_equal_frequency_limit():
    assert mixing_angle(P, 0.3) == pytest.approx(math.pi / 4)


def test_bogoliubov_pair_dispatch():
    assert bogoliubov_pair(P, 0.49, 0.499) == bogoliubov_asymptotic(scaling_eta(0.499, 0.49, 0.5))
    assert bogoliubov_pair(P, 0.49, 0.499, mode="exact") == bogoliubov_exact(P, 0.49, 0.499)
    with pytest.raises(ValueError):
        bogoliubov_pair(P, 0.49, 0.499, mode="other")


def test_pair_is_immutable():
    pair = BogoliubovPair(0.1, 1.0)
    with pytest.raises(AttributeError):
        pair.p1 = 0.2
