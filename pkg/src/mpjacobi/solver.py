"""The mixed-precision preconditioned Jacobi pipeline.

Three solver variants share one entry point:

* ``jacobi`` -- cyclic Jacobi on A at working precision, no preconditioner;
* ``mp2``    -- build a preconditioner Qtilde at low precision, apply it at
  working precision, then run Jacobi (two precisions);
* ``mp3``    -- as mp2 but the product Qtilde' A Qtilde is computed entirely
  in double-double arithmetic before demotion (three precisions).  This is
  the high-accuracy path: the eigenvalue error is governed by the scaled
  condition number of the preconditioned matrix instead of kappa_2(A).

Inputs are scaled by an exact power of two into a safe exponent range
(LAPACK-style) and the eigenvalues are rescaled exactly on output.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .densecore import check_symmetric
from .jacobi import JacobiConvergenceError, JacobiReport, cyclic_jacobi, default_tol, off
from .multiprec import (
    DDArray,
    PrecisionTier,
    U_WORK,
    UnderflowWarning,
    demote_high_to_work,
    gamma,
)
from .precond import PRECOND_METHODS, SPECTRAL_HHQR, Preconditioner, build

VARIANT_JACOBI = "jacobi"
VARIANT_MP2 = "mp2"
VARIANT_MP3 = "mp3"

VARIANTS = (VARIANT_JACOBI, VARIANT_MP2, VARIANT_MP3)


@dataclass
class SolveConfig:
    variant: str = VARIANT_MP3
    precond_method: str = SPECTRAL_HHQR
    tol: Optional[float] = None  # defaults to sqrt(n)*u
    max_sweeps: int = 30
    check_assumptions: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.precond_method not in PRECOND_METHODS:
            raise ValueError(f"unknown preconditioner method {self.precond_method!r}")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SolveDiagnostics:
    scale_exponent: int = 0
    a1: Optional[bool] = None
    a2: Optional[bool] = None
    a3: Optional[bool] = None
    off_ratio: Optional[float] = None
    theta: Optional[float] = None
    underflow_warned: bool = False
    kappa_estimate: Optional[float] = None


@dataclass
class SpectralResult:
    lambda_: np.ndarray  # descending
    Q: np.ndarray
    report: JacobiReport
    diagnostics: SolveDiagnostics
    preconditioner: Optional[Preconditioner] = None


@dataclass
class AssumptionCheck:
    """Evaluation of the sufficient conditions for the error bound.

    a3_bound_input is the factor 14*n*u; the full third condition
    14*n*u*kappaS(Atilde) < 1 needs the scaled condition number of the
    preconditioned matrix, which is only known after a solve.
    """

    a1: bool
    a2: bool
    a3_bound_input: float


def check_assumptions(n: int, kappa_est: float, p1: Optional[float] = None,
                      tier_high: PrecisionTier = PrecisionTier.HIGH) -> AssumptionCheck:
    """Evaluate the input-side sufficient conditions at a condition estimate."""
    if kappa_est < 1.0:
        raise ValueError("kappa_est must be >= 1")
    if p1 is None:
        p1 = 10.0 * n
    u = U_WORK
    g_h = gamma(n, tier_high)
    a1 = 10.0 * n ** 1.5 * u / (1.0 - p1 * u) * kappa_est < 1.0
    a2 = g_h < u * (1.0 - p1 * u) / (16.0 * math.sqrt(n) * kappa_est)
    return AssumptionCheck(a1=bool(a1), a2=bool(a2), a3_bound_input=14.0 * n * u)


def scale_input(A) -> tuple[np.ndarray, int]:
    """Scale A by a power of two so max|a_ij| lies in [2**-512, 2**512].

    Returns (A_scaled, k) with A_scaled = A * 2**k; powers of two scale
    exactly, and eigenvalues are recovered by the exact factor 2**-k.
    """
    A = check_symmetric(A)
    m = float(np.max(np.abs(A)))
    if m == 0.0:
        return A.copy(), 0
    e = math.frexp(m)[1]  # m = f * 2**e with f in [0.5, 1)
    if e - 1 > 512:
        k = 512 - (e - 1)
    elif e - 1 < -512:
        k = -512 - (e - 1)
    else:
        k = 0
    return np.ldexp(A, k), k


def sandwich_high(Qt, A) -> DDArray:
    """Qtilde' A Qtilde computed entirely in double-double arithmetic.

    A may already carry double-double entries.  The result is symmetrized as
    (M + M')/2 in double-double, so demotion preserves symmetry exactly.
    """
    Qt = np.ascontiguousarray(Qt, dtype=np.float64)
    if isinstance(A, DDArray):
        Ah = np.ascontiguousarray(A.hi)
        Al = np.ascontiguousarray(A.lo)
    else:
        Ah = np.ascontiguousarray(A, dtype=np.float64)
        Al = np.zeros_like(Ah)
    n = Ah.shape[0]
    zero = np.zeros((n, n))
    M1h = np.empty((n, n))
    M1l = np.empty((n, n))
    QtT = np.ascontiguousarray(Qt.T)
    _kernels.matmul_dd(QtT, zero, Ah, Al, M1h, M1l)
    M2h = np.empty((n, n))
    M2l = np.empty((n, n))
    _kernels.matmul_dd(M1h, M1l, Qt, zero, M2h, M2l)
    _kernels.symmetrize_dd(M2h, M2l)
    return DDArray(M2h, M2l)


def _sandwich_work(Qt: np.ndarray, A: np.ndarray) -> np.ndarray:
    M = Qt.T @ A @ Qt
    return (M + M.T) / 2.0


def solve(A, cfg: SolveConfig | None = None) -> SpectralResult:
    """Spectral decomposition of a symmetric positive definite matrix.

    Raises NotPositiveDefiniteError if indefiniteness is detected and
    JacobiConvergenceError if the sweep budget is exhausted.
    """
    if cfg is None:
        cfg = SolveConfig()
    A = check_symmetric(A)
    n = A.shape[0]
    diag = SolveDiagnostics()
    As, k = scale_input(A)
    diag.scale_exponent = k
    tol = cfg.tol if cfg.tol is not None else default_tol(n)

    if np.all(As == 0.0):
        raise ValueError("zero matrix is not positive definite")

    precond = None
    if cfg.variant == VARIANT_JACOBI:
        report = cyclic_jacobi(As, tol, cfg.max_sweeps)
        Q = report.Q
        lam_scaled = report.lambda_
    else:
        precond = build(As, cfg.precond_method)
        Qt = precond.Qtilde
        if cfg.variant == VARIANT_MP2:
            At_comp = _sandwich_work(Qt, As)
        else:
            At_high = sandwich_high(Qt, As)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", UnderflowWarning)
                At_comp = demote_high_to_work(At_high)
            if caught:
                diag.underflow_warned = True
                warnings.warn(
                    "underflow detected while demoting the preconditioned "
                    "matrix to working precision",
                    UnderflowWarning,
                    stacklevel=2,
                )
        report = cyclic_jacobi(At_comp, tol, cfg.max_sweeps)
        Q = Qt @ report.Q
        lam_scaled = report.lambda_
        normA = float(np.linalg.norm(As, "fro"))
        diag.off_ratio = off(At_comp) / normA if normA > 0 else 0.0
        dmin = float(np.min(np.diagonal(At_comp)))
        diag.theta = off(At_comp) / dmin if dmin > 0 else float("inf")
        lam_low = precond.lambda_low
        if lam_low[-1] > 0:
            diag.kappa_estimate = float(lam_low[0] / lam_low[-1])
        else:
            diag.kappa_estimate = float("inf")
        if cfg.check_assumptions:
            kappa = max(diag.kappa_estimate, 1.0)
            if math.isfinite(kappa):
                chk = check_assumptions(n, kappa)
                diag.a1 = chk.a1
                diag.a2 = chk.a2
            else:
                diag.a1 = False
                diag.a2 = False
            # A3 via the diagonal-dominance bound on kappaS(Atilde)
            if diag.theta < 1.0:
                bound = (1.0 + diag.theta) / (1.0 - diag.theta)
                diag.a3 = bool(14.0 * n * U_WORK * bound < 1.0)
            else:
                diag.a3 = False
            if not (diag.a1 and diag.a2 and diag.a3):
                warnings.warn(
                    f"error-bound assumptions not all satisfied "
                    f"(A1={diag.a1}, A2={diag.a2}, A3={diag.a3}); results may "
                    f"not reach the advertised accuracy",
                    RuntimeWarning,
                    stacklevel=2,
                )

    if not report.converged:
        raise JacobiConvergenceError(
            f"Jacobi did not satisfy the stopping criterion within "
            f"{cfg.max_sweeps} sweeps"
        )
    lam = np.ldexp(lam_scaled, -k)
    return SpectralResult(
        lambda_=lam,
        Q=Q,
        report=report,
        diagnostics=diag,
        preconditioner=precond,
    )
