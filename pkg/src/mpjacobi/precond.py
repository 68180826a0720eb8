"""Preconditioner construction from low-precision factorizations.

Both constructions produce a working-precision matrix Qtilde that is
orthogonal to working precision (P1) and nearly diagonalizes A, in the sense
that the off-quantity of Qtilde' A Qtilde is a small multiple of the low
precision times ||A||_F (P2):

* spectral route: diagonalize A at simulated binary32, then orthogonalize the
  eigenvector matrix at working precision (Householder QR, modified
  Gram-Schmidt, or Newton-Schulz);
* tridiagonal route: tridiagonalize A at simulated binary32, solve the
  tridiagonal eigenproblem at working precision, and back-transform with the
  stored Householder vectors whose tau scalars are recomputed at working
  precision.  Reflectors are orthogonal to the precision they are applied in,
  regardless of the precision their vectors were computed in, so no explicit
  reorthogonalization is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densecore import (
    PrecisionTier,
    apply_reflectors,
    check_symmetric,
    hhqr_orth,
    mgs_orth,
    newton_schulz_orth,
    recompute_tau,
    sym_eig_low,
    tridiag_eig,
    tridiagonalize,
)
from .jacobi import off
from .multiprec import U_WORK, gamma

SPECTRAL_HHQR = "hhqr"
SPECTRAL_MGS = "mgs"
SPECTRAL_NS = "ns"
TRIDIAG = "tridiag"

PRECOND_METHODS = (SPECTRAL_HHQR, SPECTRAL_MGS, SPECTRAL_NS, TRIDIAG)

_ORTHOGONALIZERS = {
    SPECTRAL_HHQR: hhqr_orth,
    SPECTRAL_MGS: mgs_orth,
    SPECTRAL_NS: newton_schulz_orth,
}


@dataclass
class Preconditioner:
    """Near-orthogonal Qtilde plus provenance.

    lambda_low holds the low-precision eigenvalue estimates; they are
    diagnostic only (condition estimates, tests) and are never consumed by
    the solver pipeline.
    """

    Qtilde: np.ndarray
    method: str
    lambda_low: np.ndarray


@dataclass
class QualityReport:
    """Measured preconditioner quality (see precond_quality)."""

    p1_residual: float
    off_ratio: float
    theta: float
    kappa_limit: float
    kappaS_At_bound: float


def build_spectral(A, orth: str = SPECTRAL_HHQR) -> Preconditioner:
    """Preconditioner from a low-precision spectral decomposition.

    Diagonalizes A at simulated binary32 and orthogonalizes the eigenvector
    matrix at working precision with the selected method.
    """
    if orth not in _ORTHOGONALIZERS:
        raise ValueError(f"unknown orthogonalizer {orth!r}")
    A = check_symmetric(A)
    Q_l, lam_l = sym_eig_low(A)
    Qtilde = _ORTHOGONALIZERS[orth](Q_l)
    return Preconditioner(Qtilde=Qtilde, method=orth, lambda_low=lam_l)


def build_tridiag(A) -> Preconditioner:
    """Preconditioner from a low-precision tridiagonalization.

    The tau scalars are recomputed at working precision before the reflectors
    are applied; using the low-precision ones would spoil orthogonality.
    """
    A = check_symmetric(A)
    T, H = tridiagonalize(A, PrecisionTier.LOW)
    H = recompute_tau(H) if H.count else H
    Q_S, lam_l = tridiag_eig(T)
    if H.count:
        Qtilde = apply_reflectors(H, Q_S, PrecisionTier.WORK)
    else:
        Qtilde = Q_S
    return Preconditioner(Qtilde=Qtilde, method=TRIDIAG, lambda_low=lam_l)


def build(A, method: str = SPECTRAL_HHQR) -> Preconditioner:
    """Dispatch on the method name ('hhqr', 'mgs', 'ns', or 'tridiag')."""
    if method == TRIDIAG:
        return build_tridiag(A)
    return build_spectral(A, method)


def precond_quality(A, P: Preconditioner) -> QualityReport:
    """Measure P1/P2 and the diagonal-dominance ratio for a preconditioner.

    The off-quantity and theta are evaluated on the double-double sandwich
    Qtilde' A Qtilde demoted to working precision.  kappa_limit is the largest
    kappa_2(A) for which the high-precision product still guarantees eigenvalue
    errors at working-precision level (assumption A2 solved for kappa).
    """
    from .solver import sandwich_high  # local import to avoid a cycle

    A = check_symmetric(A)
    n = A.shape[0]
    Qt = P.Qtilde
    p1_residual = float(np.linalg.norm(Qt.T @ Qt - np.eye(n), 2))
    At = sandwich_high(Qt, A)
    off_At = off(At)
    normA = float(np.linalg.norm(A, "fro"))
    off_ratio = off_At / normA if normA > 0 else 0.0
    diag = At.hi.diagonal()
    theta = off_At / float(np.min(diag)) if np.min(diag) > 0 else float("inf")
    p1 = 10.0 * n
    g_h = gamma(n, PrecisionTier.HIGH)
    kappa_limit = U_WORK * (1.0 - p1 * U_WORK) / (16.0 * np.sqrt(n) * g_h)
    bound = (1.0 + theta) / (1.0 - theta) if theta < 1.0 else float("inf")
    return QualityReport(
        p1_residual=p1_residual,
        off_ratio=off_ratio,
        theta=theta,
        kappa_limit=float(kappa_limit),
        kappaS_At_bound=float(bound),
    )
