"""Seeded generation of the benchmark matrices.

randsvd_spd draws a Haar-random orthogonal matrix (sign-corrected QR of a
standard normal matrix, PCG64 stream) and plants a spectrum with a prescribed
condition number; the five modes select the classical singular value
distributions.  The named special matrices (Hilbert, inverse Hilbert, Pascal,
Lauchli Gram) cover the extremely ill-conditioned regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .multiprec import DDArray, DDNumber


@dataclass(frozen=True)
class RandSvdSpec:
    n: int
    kappa: float
    mode: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kappa < 1.0:
            raise ValueError("kappa must be >= 1")
        if self.mode not in (1, 2, 3, 4, 5):
            raise ValueError("mode must be in 1..5")


def _haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    return Q * np.where(d < 0.0, -1.0, 1.0)


def _spectrum(spec: RandSvdSpec, rng: np.random.Generator) -> np.ndarray:
    n, kappa, mode = spec.n, spec.kappa, spec.mode
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    if mode == 1:
        lam = np.full(n, 1.0 / kappa)
        lam[0] = 1.0
    elif mode == 2:
        lam = np.ones(n)
        lam[-1] = 1.0 / kappa
    elif mode == 3:
        lam = kappa ** (-k / (n - 1))
    elif mode == 4:
        lam = 1.0 - k * (1.0 - 1.0 / kappa) / (n - 1)
    else:
        lam = np.exp(rng.uniform(math.log(1.0 / kappa), 0.0, size=n))
        lam = np.sort(lam)[::-1]
    return lam


def randsvd_spd(spec: RandSvdSpec) -> np.ndarray:
    """Random s.p.d. matrix Q diag(lam) Q' with prescribed condition number.

    Deterministic: the same spec always yields the bit-identical matrix
    (PCG64 stream seeded by spec.seed).
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    Q = _haar_orthogonal(spec.n, rng)
    lam = _spectrum(spec, rng)
    A = (Q * lam) @ Q.T
    return (A + A.T) / 2.0


def hilbert(n: int) -> np.ndarray:
    """h_ij = 1/(i+j-1)."""
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(1, n + 1)
    return 1.0 / (i[:, None] + i[None, :] - 1.0)


def hilbert_dd(n: int) -> DDArray:
    """The Hilbert matrix with entries formed in double-double.

    The binary64 Hilbert matrix is exactly indefinite for n >= 16 (the
    entrywise rounding exceeds the smallest eigenvalue), so condition-number
    measurements at extreme kappa need the entries at higher precision.
    """
    if n < 1:
        raise ValueError("n must be positive")
    hi = np.empty((n, n))
    lo = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = DDNumber(1.0) / DDNumber(float(i + j + 1))
            hi[i, j] = hi[j, i] = v.hi
            lo[i, j] = lo[j, i] = v.lo
    return DDArray(hi, lo)


def _int_to_dd(v: int) -> tuple[float, float]:
    hi = float(v)
    lo = float(v - int(hi))
    return hi, lo


def invhilbert_dd(n: int) -> DDArray:
    """The inverse Hilbert matrix with its exact integer entries in double-double."""
    if not 1 <= n <= 30:
        raise ValueError("n must be in 1..30")
    hi = np.empty((n, n))
    lo = np.empty((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            v = (
                (-1) ** (i + j)
                * (i + j - 1)
                * math.comb(n + i - 1, n - j)
                * math.comb(n + j - 1, n - i)
                * math.comb(i + j - 2, i - 1) ** 2
            )
            hi[i - 1, j - 1], lo[i - 1, j - 1] = _int_to_dd(v)
    return DDArray(hi, lo)


def invhilbert(n: int) -> np.ndarray:
    """Inverse of the Hilbert matrix via the closed-form binomial formula."""
    if not 1 <= n <= 30:
        raise ValueError("n must be in 1..30 to keep entries finite in binary64")
    H = np.empty((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            v = (
                (-1) ** (i + j)
                * (i + j - 1)
                * math.comb(n + i - 1, n - j)
                * math.comb(n + j - 1, n - i)
                * math.comb(i + j - 2, i - 1) ** 2
            )
            H[i - 1, j - 1] = float(v)
    return H


def pascal(n: int) -> np.ndarray:
    """p_ij = C(i+j-2, i-1); exact in binary64 only for n <= 29."""
    if not 1 <= n <= 29:
        raise ValueError("pascal entries exceed 2**53 for n > 29")
    P = np.empty((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            P[i - 1, j - 1] = float(math.comb(i + j - 2, i - 1))
    return P


def lauchli_gram(n: int, mu: float) -> np.ndarray:
    """Gram matrix L'L of the (n+1) x n Lauchli matrix.

    a_ii = 1 + mu^2 and a_ij = 1 elsewhere; the eigenvalues are n + mu^2 and
    n-1 copies of mu^2, so kappa_2 = (n + mu^2)/mu^2.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    A = np.ones((n, n))
    np.fill_diagonal(A, 1.0 + mu * mu)
    return A
