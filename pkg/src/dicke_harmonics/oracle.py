"""Brute-force references for the recursion-based pipeline.

Nothing here is used to produce results; every function recomputes a
quantity by a slower, independent route so it can be cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .coefficients import CoefficientTable, log_double_factorial_ratio
from .effective_model import BogoliubovPair, ModelParams, Phase, classify_phase
from .errors import ConvergenceError

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class DenseOperator:
    dim: int
    entries: np.ndarray


def dense_rotated_number_operator(pair: BogoliubovPair, N: int) -> DenseOperator:
    """``c(lam0)^dag c(lam0)`` on the first ``N`` number states of the ``lam`` mode.

    With ``c(lam0) = p1 a^dag + p2 a`` this is
    ``p1**2 a a^dag + p2**2 a^dag a + p1 p2 (a**2 + a^dag**2)``, a matrix with
    non-zero entries only on the main diagonal and the second off-diagonals.
    """
    if N < 4:
        raise ValueError("truncation N must be at least 4")
    mu = np.arange(N, dtype=float)
    diag = pair.p1 ** 2 * (mu + 1.0) + pair.p2 ** 2 * mu
    off = pair.p1 * pair.p2 * np.sqrt((mu[:-2] + 1.0) * (mu[:-2] + 2.0))
    A = np.diag(diag) + np.diag(off, 2) + np.diag(off, -2)
    return DenseOperator(N, A)


def align_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its largest-magnitude component is positive."""
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def oracle_eigendecomposition(op: DenseOperator, residual_tol: float = RESIDUAL_TOL):
    """Ascending eigenvalues and sign-aligned orthonormal eigenvectors (columns)."""
    A = op.entries
    if not np.allclose(A, A.T, rtol=0, atol=1e-14):
        raise ValueError("operator is not symmetric")
    vals, vecs = linalg.eigh(A)
    res = np.linalg.norm(A @ vecs - vecs * vals, axis=0)
    if np.any(res > residual_tol):
        raise ConvergenceError(f"eigen-residual {res.max():.3e} above {residual_tol:.1e}",
                               diagnostics={"max_residual": float(res.max())})
    for j in range(vecs.shape[1]):
        vecs[:, j] = align_sign(vecs[:, j])
    return vals, vecs


def quadratic_form(params: ModelParams, lam: float) -> np.ndarray:
    """Hessian of the normal-phase two-mode Hamiltonian in ``(x_a, x_b, p_a, p_b)``."""
    w, w0 = params.omega, params.omega0
    return np.array([[w, 2.0 * lam, 0.0, 0.0],
                     [2.0 * lam, w0, 0.0, 0.0],
                     [0.0, 0.0, w, 0.0],
                     [0.0, 0.0, 0.0, w0]])


def williamson_frequencies(params: ModelParams, lam: float):
    """Symplectic eigenvalues ``(e1, e2)`` of the normal-phase quadratic form.

    For positive ``M`` the eigenvalues of ``i M**(1/2) J M**(1/2)`` are
    ``+-e1, +-e2``; the Hermitian form keeps the computation well conditioned.
    """
    if classify_phase(params, lam) is not Phase.NORMAL:
        raise ValueError(f"lambda={lam} is not below lambda_c; the normal-phase form is not positive")
    M = quadratic_form(params, lam)
    J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    root = linalg.sqrtm(M).real
    nu = linalg.eigvalsh(1j * (root @ J @ root))
    pos = np.sort(nu[nu > 0])
    return float(pos[0]), float(pos[1])


def density_matrix_harmonics(g, m=None):
    """Harmonic weights ``W_m`` from the explicit pure-state density matrix.

    ``g`` holds the amplitudes ``g_n`` (array or object with a ``g`` attribute).
    Returns ``W_m`` for one ``m``, or the whole sequence when ``m`` is None.
    """
    g = np.asarray(getattr(g, "g", g), dtype=complex)
    rho = np.outer(g, g.conj())
    n = g.size
    per_m = np.array([np.sum(np.abs(np.diagonal(rho, -k)) ** 2) for k in range(n)])
    W = per_m / math.fsum(per_m)
    return W if m is None else float(W[m]) if m < n else 0.0


def direct_f(table: CoefficientTable, e1: float, m: int, t: float) -> float:
    """``F(m, t) = sum_n |sum_{mu,nu} K[n,m][mu,nu] exp(-i (mu - nu) e1 t)|**2`` by the full double sum.

    ``K[n,m][mu,nu] = C[n+m][mu] C[0][mu] C[n][nu] C[0][nu]`` (``mu, nu`` even).
    """
    if m % 2:
        return 0.0
    E = table.entries
    c0 = E[0]
    mu = np.arange(c0.size)
    phase = np.exp(-1j * np.subtract.outer(mu, mu) * e1 * t)
    total = []
    for n in range(0, table.n_max - m + 1, 2):
        K = np.outer(E[n + m] * c0, E[n] * c0)
        total.append(abs(np.sum(K * phase)) ** 2)
    return math.fsum(total)


def squeezed_populations(pair: BogoliubovPair, theta: float, k_max: int) -> np.ndarray:
    """``|g_{2k}|**2`` for ``k <= k_max`` from the Gaussian form of the evolved state.

    The evolved ground state is a squeezed vacuum of the ``lam0`` mode with
    squeezing ratio ``q = |v / u|**2``; its populations are
    ``sqrt(1 - q) q**k (2k-1)!!/(2k)!!``.
    """
    p11, p22, p12 = pair.p1 ** 2, pair.p2 ** 2, pair.p1 * pair.p2
    u = p22 * np.exp(1j * theta) - p11 * np.exp(-1j * theta)
    v = p12 * (np.exp(-1j * theta) - np.exp(1j * theta))
    q = abs(v / u) ** 2
    k = np.arange(k_max + 1)
    if q == 0:
        out = np.zeros(k_max + 1)
        out[0] = 1.0
        return out
    return np.exp(0.5 * math.log1p(-q) + k * math.log(q) + log_double_factorial_ratio(k_max + 1))


def squeezed_second_moment(pair: BogoliubovPair, theta: float, k_max: int) -> float:
    """``<m^2>`` from :func:`squeezed_populations` via ``sum_{k,k'} (2(k - k'))^2 w_k w_k'`` over ``m >= 0``."""
    w = squeezed_populations(pair, theta, k_max)
    k = np.arange(w.size, dtype=float)
    s0, s1, s2 = w.sum(), (k * w).sum(), (k * k * w).sum()
    num = 4.0 * (s0 * s2 - s1 * s1)
    den = 0.5 * (s0 * s0 + (w * w).sum())
    return num / den
