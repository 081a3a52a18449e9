"""Overlap tables ``C[n][mu] = <Phi_mu(lam) | Phi_n(lam0)>`` for one effective mode.

Rows are eigenvectors of the rotated number operator ``c(lam0)^dag c(lam0)``
written in the number basis of the ``lam`` mode. Entries vanish identically
unless ``n`` and ``mu`` share parity, so tables are stored per parity sector:
sector ``p`` holds rows ``n = p, p + 2, ...`` on columns ``mu = p, p + 2, ...``.

The ground row follows the two-term recursion

    C[0][mu] = -(p1 sqrt(mu - 1)) / (p2 sqrt(mu)) * C[0][mu - 2],

anchored at ``C[0][0] = (1 - P)**(1/4)`` with ``P = (p1 / p2)**2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .effective_model import BogoliubovPair
from .errors import TruncationError

MU_START = 64
MU_CAP = 2 ** 16
EPS_ROW = 1e-8
GROUND_ATOL = 1e-18


class GroundRow(NamedTuple):
    coeffs: np.ndarray
    mu_max: int
    tail: float


def _check_ratio(P: float) -> None:
    if not 0 <= P < 1:
        raise ValueError(f"(p1/p2)**2 = {P} is outside [0, 1); the ground-row series does not converge")


def log_double_factorial_ratio(count: int) -> np.ndarray:
    """``ln((2k - 1)!! / (2k)!!)`` for ``k = 0 .. count - 1``."""
    k = np.arange(1, count, dtype=float)
    steps = np.log(2.0 * k - 1.0) - np.log(2.0 * k)
    return np.concatenate(([0.0], np.cumsum(steps)))


def _ground_values(pair: BogoliubovPair, mu_max: int) -> np.ndarray:
    P = pair.ratio_sq
    _check_ratio(P)
    c = np.zeros(mu_max + 1)
    c[0] = (1.0 - P) ** 0.25
    ratio = -pair.p1 / pair.p2
    for mu in range(2, mu_max + 1, 2):
        c[mu] = ratio * math.sqrt((mu - 1) / mu) * c[mu - 2]
    return c


def ground_row(pair: BogoliubovPair, tol: float = 1e-12, mu_start: int = MU_START,
               mu_cap: int = MU_CAP) -> GroundRow:
    """Ground-row overlaps with an adaptively chosen even cutoff.

    The cutoff doubles from ``mu_start`` until the geometric bound
    ``C[mu_max]**2 * P / (1 - P)`` on the discarded weight is below ``tol``.
    """
    P = pair.ratio_sq
    _check_ratio(P)
    mu_max = mu_start + mu_start % 2
    while True:
        c = _ground_values(pair, mu_max)
        tail = c[mu_max] ** 2 * P / (1.0 - P)
        if tail <= tol:
            return GroundRow(c, mu_max, tail)
        if mu_max >= mu_cap:
            raise TruncationError(f"ground-row tail {tail:.3e} above tol {tol:.1e} at mu_max={mu_max}",
                                  achieved=tail)
        mu_max = min(2 * mu_max, mu_cap)


def closed_form_ground_weights(P: float, mu_max: int) -> np.ndarray:
    """``|C[0][mu]|**2 = P**(mu/2) (mu-1)!!/mu!! sqrt(1 - P)`` evaluated in log space."""
    _check_ratio(P)
    w = np.zeros(mu_max + 1)
    half = mu_max // 2 + 1
    if P == 0:
        w[0] = 1.0
        return w
    k = np.arange(half)
    w[0::2] = np.exp(k * math.log(P) + log_double_factorial_ratio(half) + 0.5 * math.log1p(-P))
    return w


def series_identity_check(P: float, tol: float = 1e-17, max_terms: int = 10 ** 6):
    """Partial sums of ``sum_k (+-P)^k (2k-1)!!/(2k)!!`` against ``1/sqrt(1 -+ P)``.

    Returns ``(plain, alternating, plain_residual, alternating_residual)``.
    """
    _check_ratio(P)
    plain = [1.0]
    alt = [1.0]
    term = 1.0
    k = 0
    while k < max_terms:
        k += 1
        term *= P * (2 * k - 1) / (2 * k)
        plain.append(term)
        alt.append(term if k % 2 == 0 else -term)
        if term < tol:
            break
    s_plain = math.fsum(plain)
    s_alt = math.fsum(alt)
    return (s_plain, s_alt, abs(s_plain - 1.0 / math.sqrt(1.0 - P)),
            abs(s_alt - 1.0 / math.sqrt(1.0 + P)))


def _row_anchors(pair: BogoliubovPair, parity: int, k_lo: int, k_hi: int):
    """First nonzero entry of rows ``n = parity + 2k``: ``<0|n>`` or ``<1|n>`` in closed form."""
    P = pair.ratio_sq
    k = np.arange(k_lo, k_hi)
    log_d = log_double_factorial_ratio(k_hi)[k_lo:k_hi]
    log_b = 0.25 * math.log1p(-P) + k * math.log(abs(pair.p1 / pair.p2)) + 0.5 * log_d
    if parity:
        log_b = log_b + 0.5 * np.log(2.0 * k + 1.0) - math.log(pair.p2)
    sign = np.where((k % 2 == 1) & (pair.p1 < 0), -1.0, 1.0)
    return log_b, sign


def estimate_mu_max(pair: BogoliubovPair, n_max: int) -> int:
    """Cutoff covering row ``n_max`` past its upper turning point ``n (p1 + p2)**2``."""
    P = pair.ratio_sq
    mu_hi = n_max * (pair.p2 + abs(pair.p1)) ** 2
    tail = 2.0 * 46.0 / -math.log(P) if P > 0 else 0.0
    mu = int(math.ceil(1.15 * mu_hi + tail + MU_START))
    return mu + mu % 2


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Truncated overlap table for a canonical Bogoliubov pair.

    ``sectors[p]`` has shape ``(rows, columns)`` with row ``i`` holding
    ``n = p + 2 i`` and column ``j`` holding ``mu = p + 2 j``. Rows are not
    renormalized after truncation; ``row_tail_mass[n] = 1 - sum_mu C[n][mu]**2``
    (NaN for rows of a sector that was not built).
    """

    pair: BogoliubovPair
    mu_max: int
    n_max: int
    sectors: dict
    row_tail_mass: np.ndarray
    ground_tail: float
    eps_row: float = EPS_ROW
    source_pair: BogoliubovPair | None = field(default=None)

    @property
    def P(self) -> float:
        return self.pair.ratio_sq

    @property
    def ground(self) -> np.ndarray:
        """Even-column ground row ``C[0][0], C[0][2], ...``."""
        return self.sectors[0][0]

    def ground_support(self, atol: float = GROUND_ATOL) -> np.ndarray:
        """Leading even-column ground entries; the dropped ones sum to at most ``atol`` in modulus.

        Since ``|C[n][mu]| <= 1``, every amplitude ``sum_mu C[n][mu] C[0][mu] z_mu``
        with ``|z_mu| = 1`` changes by at most ``atol`` when summed over this support.
        """
        c0 = self.ground
        tail = np.cumsum(np.abs(c0[::-1]))[::-1]
        keep = int(np.count_nonzero(tail > atol))
        return np.ascontiguousarray(c0[: max(keep, 1)])

    def has_row(self, n: int) -> bool:
        return 0 <= n <= self.n_max and (n % 2) in self.sectors

    def row(self, n: int) -> np.ndarray:
        """Row ``n`` on all columns ``0 .. mu_max``."""
        if not self.has_row(n):
            raise IndexError(f"row {n} not in table")
        p = n % 2
        full = np.zeros(self.mu_max + 1)
        full[p::2] = self.sectors[p][n // 2]
        return full

    @property
    def entries(self) -> np.ndarray:
        """Dense ``(n_max + 1, mu_max + 1)`` matrix; rows of missing sectors are zero."""
        out = np.zeros((self.n_max + 1, self.mu_max + 1))
        for p, block in self.sectors.items():
            out[p::2, p::2] = block
        return out

    def max_tail(self) -> float:
        return float(np.nanmax(self.row_tail_mass))


def _sector_width(mu_max: int, parity: int) -> int:
    return (mu_max - parity) // 2 + 1


def _compute_rows(pair, parity, k_lo, k_hi, mu_max):
    out = np.zeros((k_hi - k_lo, _sector_width(mu_max, parity)))
    if k_hi <= k_lo:
        return out
    if pair.p1 == 0:
        for i, k in enumerate(range(k_lo, k_hi)):
            if k < out.shape[1]:
                out[i, k] = 1.0
        return out
    log_anchor, sign = _row_anchors(pair, parity, k_lo, k_hi)
    _kernels.sector_rows(pair.p1, pair.p2, parity, k_lo, log_anchor, sign, out)
    return out


def _tails(block: np.ndarray) -> np.ndarray:
    return np.array([1.0 - _kernels.kahan_sum(r * r) for r in block])


def ladder_extend(table: CoefficientTable, n_target: int) -> CoefficientTable:
    """Return a copy of ``table`` with rows up to ``n_target``.

    New rows are the normalizable eigenvectors at integer eigenvalue ``n`` and so
    satisfy ``sqrt(n + 1) C[n + 1] = C[n] X`` with ``X`` the tridiagonal ladder
    matrix. Raises :class:`TruncationError` when a new row loses more than
    ``table.eps_row`` of its weight to the cutoff.
    """
    if n_target <= table.n_max:
        return table
    sectors = {}
    tails = np.full(n_target + 1, np.nan)
    tails[: table.n_max + 1] = table.row_tail_mass
    for p, block in table.sectors.items():
        k_lo = block.shape[0]
        k_hi = (n_target - p) // 2 + 1
        new = _compute_rows(table.pair, p, k_lo, k_hi, table.mu_max)
        t = _tails(new)
        # small negative deficits are rounding in the anchor scaling, not truncation
        bad = np.flatnonzero(~(np.abs(t) <= table.eps_row))
        if bad.size:
            n_bad = p + 2 * (k_lo + bad[0])
            worst = t[bad[0]]
            raise TruncationError(
                f"row {n_bad} has tail mass {worst:.3e} > {table.eps_row:.1e} at mu_max={table.mu_max}; "
                "increase mu_max", achieved=worst)
        tails[p + 2 * k_lo: p + 2 * k_hi: 2] = np.clip(t, 0.0, None)
        sectors[p] = np.vstack([block, new])
    return CoefficientTable(table.pair, table.mu_max, n_target, sectors, tails, table.ground_tail,
                            table.eps_row, table.source_pair)


def build_table(pair: BogoliubovPair, n_max: int, tol: float = 1e-12, eps_row: float = EPS_ROW,
                sectors=(0, 1), mu_max: int | None = None, mu_cap: int = MU_CAP) -> CoefficientTable:
    """Ground row plus ladder rows ``1 .. n_max`` in the requested parity sectors.

    With ``mu_max=None`` the cutoff starts from the larger of the ground-row
    cutoff and the turning-point estimate for row ``n_max`` and doubles until
    every row meets ``eps_row``. A fixed ``mu_max`` is used as given.

    A pair carrying the two-mode ``cos(r - r0)`` factor is not canonical; the
    single-mode table uses its canonical rescaling, which has the same
    ``p1 / p2`` and hence the same ground row.
    """
    if 0 not in sectors:
        raise ValueError("the even sector holds the ground row and is required")
    source = pair
    if abs(pair.commutator - 1.0) > 1e-12:
        pair = pair.canonical()
    g = ground_row(pair, tol)
    fixed = mu_max is not None
    if not fixed:
        mu_max = max(g.mu_max, estimate_mu_max(pair, n_max))
    mu_max = mu_max + mu_max % 2
    while True:
        c0 = _ground_values(pair, mu_max)
        ground_tail = g.tail if mu_max >= g.mu_max else max(c0[mu_max] ** 2 * pair.ratio_sq / (1 - pair.ratio_sq),
                                                         1.0 - float(np.sum(c0 ** 2)))
        blocks = {0: c0[0::2][None, :].copy()}
        tails = np.array([max(0.0, 1.0 - _kernels.kahan_sum(c0 * c0))])
        if 1 in sectors:
            blocks[1] = np.zeros((0, _sector_width(mu_max, 1)))
            tails = np.append(tails, np.nan)
        n0 = 1 if 1 in sectors else 0
        base = CoefficientTable(pair, mu_max, n0, blocks, tails, ground_tail, eps_row, source)
        try:
            return ladder_extend(base, n_max)
        except TruncationError:
            if fixed or mu_max >= mu_cap:
                raise
            mu_max = min(2 * mu_max, mu_cap)


def ladder_step(row: np.ndarray, pair: BogoliubovPair, n: int) -> np.ndarray:
    """One application of ``c(lam0)^dag / sqrt(n + 1)`` in the ``lam`` basis.

    Exact in arithmetic but unstable when iterated many times; kept for
    short cross-checks.
    """
    mu = np.arange(row.shape[0], dtype=float)
    out = np.zeros_like(row)
    out[:-1] += pair.p1 * np.sqrt(mu[:-1] + 1.0) * row[1:]
    out[1:] += pair.p2 * np.sqrt(mu[1:]) * row[:-1]
    return out / math.sqrt(n + 1)


def ladder_matrix(pair: BogoliubovPair, size: int) -> np.ndarray:
    """Tridiagonal ``X`` with ``X[mu, mu+1] = sqrt(mu+1) p2`` and ``X[mu+1, mu] = sqrt(mu+1) p1``."""
    off = np.sqrt(np.arange(1, size, dtype=float))
    return np.diag(pair.p2 * off, 1) + np.diag(pair.p1 * off, -1)


def matrix_power_rows(ground: np.ndarray, pair: BogoliubovPair, n_max: int) -> np.ndarray:
    """Rows ``C0 X**n / sqrt(n!)`` for ``n <= n_max`` by explicit matrix products."""
    X = ladder_matrix(pair, ground.shape[0])
    rows = [ground]
    v = ground
    for n in range(1, n_max + 1):
        v = v @ X
        rows.append(v / math.sqrt(math.factorial(n)))
    return np.array(rows)


def dump_csv(table: CoefficientTable, path) -> None:
    """Write parity-allowed entries as ``n, mu, C`` rows (debugging aid)."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "mu", "C"])
        for n in range(table.n_max + 1):
            if not table.has_row(n):
                continue
            block = table.sectors[n % 2][n // 2]
            for j, c in enumerate(block):
                w.writerow([n, n % 2 + 2 * j, f"{c:.11e}"])
