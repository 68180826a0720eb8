"""Cyclic Jacobi eigensolver with the relative stopping criterion.

The iteration stops once every off-diagonal pair satisfies

    |a_pq| <= tol * sqrt(a_pp * a_qq)

which, for symmetric positive definite input, makes the computed eigenvalues
accurate relative to the scaled condition number rather than the ordinary
condition number.  The same row-cyclic algorithm is available at working
precision (binary64) and in double-double arithmetic; the latter serves as the
reference oracle for forward-error measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .densecore import check_symmetric
from .multiprec import U_HIGH, U_WORK, DDArray


class NotPositiveDefiniteError(ValueError):
    """The matrix is not symmetric positive definite."""


class JacobiConvergenceError(RuntimeError):
    """The sweep budget was exhausted before the stopping criterion held."""


@dataclass
class JacobiReport:
    """Outcome of a cyclic Jacobi run."""

    lambda_: Union[np.ndarray, DDArray]  # eigenvalues, descending
    Q: Union[np.ndarray, DDArray, None]  # accumulated rotations (None if disabled)
    sweeps: int
    rotations_applied: int
    converged: bool
    final_off: float
    final_matrix: Union[np.ndarray, DDArray]


def off(A) -> float:
    """Frobenius norm of the off-diagonal part of A."""
    if isinstance(A, DDArray):
        return float(_kernels.off_dd(A.hi, A.lo))
    A = np.asarray(A, dtype=np.float64)
    B = A - np.diag(np.diagonal(A))
    m = float(np.max(np.abs(B))) if B.size else 0.0
    if m == 0.0 or not math.isfinite(m):
        return m
    scale = math.ldexp(1.0, -math.frexp(m)[1])
    return float(np.sqrt(np.sum((B * scale) ** 2))) / scale


def default_tol(n: int, unit_roundoff: float = U_WORK) -> float:
    """The stopping tolerance sqrt(n)*u."""
    return math.sqrt(n) * unit_roundoff


def jacobi_rotation(a_pp: float, a_qq: float, a_pq: float) -> tuple[float, float]:
    """Cosine/sine of the rotation annihilating the (p,q) entry.

    Uses the smaller-angle root t = sign(tau)/(|tau| + sqrt(1+tau^2)) of
    t^2 + 2*tau*t - 1 = 0 with tau = (a_qq - a_pp)/(2 a_pq), which avoids
    cancellation and keeps |theta| <= pi/4.
    """
    if a_pq == 0.0:
        raise ValueError("a_pq must be nonzero")
    tau = (a_qq - a_pp) / (2.0 * a_pq)
    t = math.copysign(1.0 / (abs(tau) + math.hypot(1.0, tau)), tau)
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c


def _finalize(lam_raw, Q_raw, final_matrix, sweeps, rotations, status, accumulate):
    converged = status == _kernels.JACOBI_CONVERGED
    order = np.argsort(-lam_raw, kind="stable")
    if isinstance(final_matrix, DDArray):
        lam = DDArray(final_matrix.hi.diagonal()[order].copy(),
                      final_matrix.lo.diagonal()[order].copy())
        Q = DDArray(Q_raw.hi[:, order].copy(), Q_raw.lo[:, order].copy()) if accumulate else None
    else:
        lam = np.diagonal(final_matrix)[order].copy()
        Q = Q_raw[:, order].copy() if accumulate else None
    return JacobiReport(
        lambda_=lam,
        Q=Q,
        sweeps=int(sweeps),
        rotations_applied=int(rotations),
        converged=converged,
        final_off=off(final_matrix),
        final_matrix=final_matrix,
    )


def cyclic_jacobi(A, tol: float | None = None, max_sweeps: int = 30,
                  accumulate: bool = True) -> JacobiReport:
    """Row-cyclic Jacobi at working precision.

    Raises NotPositiveDefiniteError when a non-positive diagonal entry is
    found (on input or mid-iteration).  Exceeding max_sweeps is reported via
    converged=False, not an exception.
    """
    A = check_symmetric(A).copy()
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if np.any(np.diagonal(A) <= 0.0):
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    if tol is None:
        tol = default_tol(n)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    Q = np.eye(n) if accumulate else np.zeros((1, 1))
    sweeps, rotations, status = _kernels.jacobi_f64(
        A, Q, tol, max_sweeps, accumulate
    )
    if status == _kernels.JACOBI_INDEFINITE:
        raise NotPositiveDefiniteError(
            "matrix is indefinite: diagonal became non-positive during sweeps"
        )
    lam_raw = np.diagonal(A).copy()
    return _finalize(lam_raw, Q if accumulate else None, A,
                     sweeps, rotations, status, accumulate)


def cyclic_jacobi_dd(A, tol: float | None = None, max_sweeps: int = 30,
                     accumulate: bool = True) -> JacobiReport:
    """The identical algorithm executed entirely in double-double arithmetic.

    Serves as the reference oracle: with tol defaulting to sqrt(n)*2**-104,
    the eigenvalues carry roughly twice the significand of binary64.
    """
    if isinstance(A, DDArray):
        Ah = A.hi.copy()
        Al = A.lo.copy()
    else:
        Ah = check_symmetric(A).copy()
        Al = np.zeros_like(Ah)
    n = Ah.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if np.any(np.diagonal(Ah) <= 0.0):
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    if tol is None:
        tol = default_tol(n, U_HIGH)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if accumulate:
        Qh = np.eye(n)
        Ql = np.zeros((n, n))
    else:
        Qh = np.zeros((1, 1))
        Ql = np.zeros((1, 1))
    sweeps, rotations, status = _kernels.jacobi_dd(
        Ah, Al, Qh, Ql, tol, max_sweeps, accumulate
    )
    if status == _kernels.JACOBI_INDEFINITE:
        raise NotPositiveDefiniteError(
            "matrix is indefinite: diagonal became non-positive during sweeps"
        )
    final = DDArray(Ah, Al)
    Q = DDArray(Qh, Ql) if accumulate else None
    return _finalize(final.hi.diagonal().copy(), Q, final,
                     sweeps, rotations, status, accumulate)
