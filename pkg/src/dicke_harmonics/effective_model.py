"""Thermodynamic-limit Dicke model as a pair of effective oscillators.

Units are hbar = 1. Couplings, frequencies and mode energies share one
energy unit; times are in its inverse.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import CriticalPointError, SamePhaseError

#: Absolute tolerance on ``lam - lambda_c`` for the Critical classification.
CRITICAL_ATOL = 1e-12


class Phase(enum.Enum):
    NORMAL = "normal"
    CRITICAL = "critical"
    SUPERRADIANT = "superradiant"


@dataclass(frozen=True)
class ModelParams:
    """Field-mode frequency ``omega`` and atomic splitting ``omega0``."""

    omega: float = 1.0
    omega0: float = 1.0

    def __post_init__(self):
        if not (self.omega > 0 and self.omega0 > 0):
            raise ValueError(f"frequencies must be positive, got omega={self.omega}, omega0={self.omega0}")

    @property
    def lambda_c(self) -> float:
        return critical_coupling(self)


@dataclass(frozen=True)
class EffectiveSpectrum:
    e1: float
    e2: float
    phase: Phase


@dataclass(frozen=True)
class BogoliubovPair:
    """Coefficients of ``c(lam0) = p1 * c(lam)^dag + p2 * c(lam)``."""

    p1: float
    p2: float
    cos_factor_applied: bool = False

    @property
    def ratio_sq(self) -> float:
        """``(p1 / p2)**2``, the geometric ratio of the ground-row weights."""
        return (self.p1 / self.p2) ** 2

    @property
    def commutator(self) -> float:
        """``p2**2 - p1**2``; equals 1 for a canonical transformation."""
        return (self.p2 - self.p1) * (self.p2 + self.p1)

    def canonical(self) -> "BogoliubovPair":
        """Rescale to ``p2**2 - p1**2 = 1`` keeping ``p1 / p2``."""
        norm = math.sqrt(self.commutator)
        return BogoliubovPair(self.p1 / norm, self.p2 / norm, self.cos_factor_applied)


def critical_coupling(params: ModelParams) -> float:
    return 0.5 * math.sqrt(params.omega * params.omega0)


def classify_phase(params: ModelParams, lam: float, atol: float = CRITICAL_ATOL) -> Phase:
    if lam < 0:
        raise ValueError(f"coupling must be non-negative, got {lam}")
    delta = lam - params.lambda_c
    if abs(delta) <= atol:
        return Phase.CRITICAL
    return Phase.NORMAL if delta < 0 else Phase.SUPERRADIANT


def mode_energies(params: ModelParams, lam: float) -> EffectiveSpectrum:
    """Effective mode energies ``e1 < e2`` at coupling ``lam``.

    The lower energy is obtained from the product ``e1**2 * e2**2``, which
    factorizes through ``lam - lambda_c`` and so keeps full relative
    precision next to the critical point.
    """
    w, w0 = params.omega, params.omega0
    lc = params.lambda_c
    phase = classify_phase(params, lam)
    if phase is Phase.CRITICAL:
        return EffectiveSpectrum(0.0, math.sqrt(w * w + w0 * w0), phase)
    if phase is Phase.NORMAL:
        radicand = (w0 * w0 - w * w) ** 2 + 16.0 * lam * lam * w * w0
        e2_sq = 0.5 * ((w * w + w0 * w0) + math.sqrt(radicand))
        prod = 4.0 * w * w0 * (lc - lam) * (lc + lam)
    else:
        kappa = w * w0 / (4.0 * lam * lam)
        s = w0 * w0 / (kappa * kappa)
        radicand = (s - w * w) ** 2 + 4.0 * w * w * w0 * w0
        e2_sq = 0.5 * (w * w + s + math.sqrt(radicand))
        prod = 4.0 * (lam - lc) * (lam + lc) * (4.0 * lam * lam + w * w0)
    # prod > 0 off the critical point by construction
    if prod < 0:
        raise ArithmeticError(f"negative e1**2 at lam={lam}")
    return EffectiveSpectrum(math.sqrt(prod / e2_sq), math.sqrt(e2_sq), phase)


def near_critical_e1(params: ModelParams, lam: float) -> float:
    """Leading-order e1 close to lambda_c, for comparison with :func:`mode_energies`."""
    w, w0 = params.omega, params.omega0
    lc = params.lambda_c
    phase = classify_phase(params, lam)
    if phase is Phase.CRITICAL:
        return 0.0
    if phase is Phase.NORMAL:
        return math.sqrt(8.0 * lc * (lc - lam) * w * w0 / (w0 * w0 + w * w))
    return math.sqrt(16.0 * (lam - lc) * (lam + lc) * (lam * lam + lc * lc) / (w * w + w0 * w0))


def scaling_eta(lam: float, lam0: float, lambda_c: float) -> float:
    """``(lam - lambda_c) / (lam0 - lambda_c)`` for a same-phase pair."""
    d, d0 = lam - lambda_c, lam0 - lambda_c
    if d == 0 or d0 == 0 or (d > 0) != (d0 > 0):
        raise SamePhaseError("same-phase comparison required")
    return d / d0


def coupling_from_eta(eta: float, lam0: float, lambda_c: float) -> float:
    """Coupling ``lam`` such that ``scaling_eta(lam, lam0, lambda_c) == eta``."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return lambda_c + eta * (lam0 - lambda_c)


def _half_angle(num: float, den: float) -> float:
    # 2r in (-pi/2, pi/2); den == 0 resolved by continuity to +pi/2
    if den == 0:
        return 0.25 * math.pi
    return 0.5 * math.atan(num / den)


def mixing_angle(params: ModelParams, lam: float) -> float:
    """Two-mode rotation angle ``r`` at ``lam`` (normal or superradiant form)."""
    w, w0 = params.omega, params.omega0
    phase = classify_phase(params, lam)
    if phase is Phase.SUPERRADIANT:
        kappa = w * w0 / (4.0 * lam * lam)
        return _half_angle(2.0 * w * w0 * kappa * kappa, w0 * w0 - kappa * kappa * w * w)
    return _half_angle(4.0 * lam * math.sqrt(w * w0), w0 * w0 - w * w)


def bogoliubov_exact(params: ModelParams, lam0: float, lam: float, apply_cos: bool = False) -> BogoliubovPair:
    """Bogoliubov pair from the exact mode energies at ``lam0`` and ``lam``."""
    scaling_eta(lam, lam0, params.lambda_c)
    e_lam = mode_energies(params, lam).e1
    e_lam0 = mode_energies(params, lam0).e1
    if e_lam == 0 or e_lam0 == 0:
        raise CriticalPointError("critical point not representable")
    sx = math.sqrt(e_lam0 / e_lam)
    cos = 1.0
    if apply_cos:
        cos = math.cos(mixing_angle(params, lam) - mixing_angle(params, lam0))
    return BogoliubovPair(0.5 * cos * (sx - 1.0 / sx), 0.5 * cos * (sx + 1.0 / sx), apply_cos)


def bogoliubov_asymptotic(eta: float) -> BogoliubovPair:
    """Near-critical Bogoliubov pair, a function of ``eta`` only."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    q = eta ** 0.25
    # 1/q - q written without cancellation near eta = 1
    p1 = 0.5 * (1.0 - eta) / ((1.0 + math.sqrt(eta)) * q)
    return BogoliubovPair(p1, 0.5 * (1.0 / q + q))


def bogoliubov_pair(params: ModelParams, lam0: float, lam: float, mode: str = "asymptotic",
                    apply_cos: bool = False) -> BogoliubovPair:
    """Dispatch on ``mode`` in {"asymptotic", "exact"}."""
    if mode == "asymptotic":
        return bogoliubov_asymptotic(scaling_eta(lam, lam0, params.lambda_c))
    if mode == "exact":
        return bogoliubov_exact(params, lam0, lam, apply_cos=apply_cos)
    raise ValueError(f"unknown Bogoliubov mode {mode!r}")
