"""Accuracy and conditioning measurements.

Condition numbers are computed from double-double Jacobi eigenvalues rather
than working-precision solves: binary64 cannot resolve kappa near 1e16, while
the double-double oracle stays trustworthy up to roughly 1e12 and degrades
gracefully beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .densecore import check_symmetric
from .jacobi import NotPositiveDefiniteError, cyclic_jacobi_dd, off
from .multiprec import U_WORK, DDArray

# measurements above this kappa are indicative only (double-double limit)
ORACLE_KAPPA_LIMIT = 1e12


@dataclass
class ErrorProfile:
    per_eigenvalue_rel_error: np.ndarray
    max_rel_error: float
    bound_7n_kappaS_u: Optional[float]


def _as_dd_matrix(A) -> DDArray:
    if isinstance(A, DDArray):
        return A.copy()
    return DDArray.from_float64(check_symmetric(A))


def _dd_extreme_ratio(M: DDArray, max_sweeps: int = 60) -> float:
    """lambda_1 / lambda_n by the double-double Jacobi oracle."""
    report = cyclic_jacobi_dd(M, max_sweeps=max_sweeps, accumulate=False)
    lam = report.lambda_
    lo = lam[-1]
    if lo.hi <= 0.0:
        raise NotPositiveDefiniteError("smallest eigenvalue is not positive")
    return float(lam[0] / lo)


def cond2(A) -> float:
    """kappa_2(A) = lambda_1/lambda_n via the double-double oracle."""
    return _dd_extreme_ratio(_as_dd_matrix(A))


def scaled_cond(A) -> float:
    """kappa_2(D A D) with D = diag(a_ii^{-1/2}), via the double-double oracle.

    Invariant under symmetric diagonal scaling of A; for a nearly diagonal
    matrix it is close to 1 no matter how ill-conditioned A is.
    """
    M = _as_dd_matrix(A)
    n = M.hi.shape[0]
    Ch = np.empty((n, n))
    Cl = np.empty((n, n))
    status = _kernels.unit_diag_scale_dd(M.hi, M.lo, Ch, Cl)
    if status != 0:
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    return _dd_extreme_ratio(DDArray(Ch, Cl))


# shift used by the magnitude-ratio fallback: 2**-48 of the largest diagonal
# entry, above the eigenvalue scatter caused by binary64 entry rounding
_INDICATIVE_SHIFT_EXP = -48


def _magnitude_ratio(M: DDArray, max_sweeps: int = 80) -> float:
    n = M.hi.shape[0]
    sigma = math.ldexp(float(np.max(M.hi.diagonal())), _INDICATIVE_SHIFT_EXP)
    Bh = M.hi.copy()
    Bl = M.lo.copy()
    for k in range(n):
        Bh[k, k], Bl[k, k] = _kernels.dd_add_k(Bh[k, k], Bl[k, k], sigma, 0.0)
    rep = cyclic_jacobi_dd(DDArray(Bh, Bl), max_sweeps=max_sweeps,
                           accumulate=False)
    lam = np.empty(n)
    for k in range(n):
        lam[k], _ = _kernels.dd_add_k(rep.lambda_.hi[k], rep.lambda_.lo[k],
                                      -sigma, 0.0)
    small = float(np.min(np.abs(lam)))
    if small == 0.0:
        return float("inf")
    return float(lam[0]) / small


def cond2_magnitude(A) -> float:
    """lambda_1 / min_k |lambda_k| via a shifted double-double solve.

    Equals cond2(A) for positive definite input, but also tolerates matrices
    whose smallest eigenvalues were scattered across zero by binary64 entry
    rounding (for example the stored Hilbert matrix for n >= 16).  Such
    measurements are indicative only.
    """
    return _magnitude_ratio(_as_dd_matrix(A))


def scaled_cond_magnitude(A) -> float:
    """Magnitude-ratio counterpart of scaled_cond; indicative only."""
    M = _as_dd_matrix(A)
    n = M.hi.shape[0]
    Ch = np.empty((n, n))
    Cl = np.empty((n, n))
    status = _kernels.unit_diag_scale_dd(M.hi, M.lo, Ch, Cl)
    if status != 0:
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    return _magnitude_ratio(DDArray(Ch, Cl))


def theta_sdd(A) -> float:
    """off(A) / min_i a_ii, the scaled diagonal dominance ratio.

    If theta < 1, then kappa_2^S(A) <= (1+theta)/(1-theta).
    """
    if isinstance(A, DDArray):
        dmin = float(np.min(A.hi.diagonal()))
        o = off(A)
    else:
        A = check_symmetric(A)
        dmin = float(np.min(np.diagonal(A)))
        o = off(A)
    if dmin <= 0.0:
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    return o / dmin


def hadamard_bound(A) -> float:
    """n * e * prod_i d_i/lambda_i, an a-priori bound on scaled_cond(A).

    d_i and lambda_i are the diagonal entries and eigenvalues, both in
    descending order; eigenvalues come from the double-double oracle.
    Returns +inf if the product overflows.
    """
    M = _as_dd_matrix(A)
    n = M.hi.shape[0]
    d = np.sort(M.hi.diagonal())[::-1]
    report = cyclic_jacobi_dd(M, max_sweeps=60, accumulate=False)
    lam = report.lambda_
    if lam[-1].hi <= 0.0:
        raise NotPositiveDefiniteError("smallest eigenvalue is not positive")
    prod = 1.0
    for i in range(n):
        prod *= d[i] / lam[i].hi
        if math.isinf(prod):
            return float("inf")
    return n * math.e * prod


def forward_errors(lambda_computed, lambda_ref,
                   kappaS_At: Optional[float] = None) -> ErrorProfile:
    """Per-eigenvalue relative errors |l_k - ref_k| / ref_k.

    Both inputs must be sorted descending.  lambda_ref may be a DDArray, in
    which case the differences are formed in double-double before rounding.
    When kappaS_At is supplied, the profile carries the working-precision
    bound 7*n*kappaS_At*u.
    """
    lam = np.asarray(lambda_computed, dtype=np.float64)
    if isinstance(lambda_ref, DDArray):
        ref_hi, ref_lo = lambda_ref.hi, lambda_ref.lo
    else:
        ref_hi = np.asarray(lambda_ref, dtype=np.float64)
        ref_lo = np.zeros_like(ref_hi)
    if lam.shape != ref_hi.shape:
        raise ValueError(
            f"length mismatch: {lam.shape} computed vs {ref_hi.shape} reference"
        )
    if np.any(ref_hi <= 0.0):
        raise ValueError("reference eigenvalues must be positive")
    n = lam.shape[0]
    errs = np.empty(n)
    for i in range(n):
        dh, dl = _kernels.dd_sub_k(lam[i], 0.0, ref_hi[i], ref_lo[i])
        rh, _ = _kernels.dd_div_k(dh, dl, ref_hi[i], ref_lo[i])
        errs[i] = abs(rh)
    bound = 7.0 * n * kappaS_At * U_WORK if kappaS_At is not None else None
    return ErrorProfile(
        per_eigenvalue_rel_error=errs,
        max_rel_error=float(np.max(errs)) if n else 0.0,
        bound_7n_kappaS_u=bound,
    )
