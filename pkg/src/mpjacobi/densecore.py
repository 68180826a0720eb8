"""Dense symmetric linear algebra primitives.

Householder tridiagonalization and the implicit-QL tridiagonal eigensolver run
either at working precision (binary64) or at simulated low precision
(binary32, rounding after every scalar operation).  Inputs are pre-scaled by
an exact power of two so intermediate quantities stay well inside the exponent
range of the active format; the scaling commutes bit-for-bit with both
arithmetics and is undone on output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .multiprec import U_WORK, PrecisionTier


class ConvergenceError(RuntimeError):
    """An iterative method exhausted its iteration budget."""


@dataclass
class TridiagMatrix:
    """Symmetric tridiagonal matrix: main diagonal and first subdiagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        T = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        T[idx, idx + 1] = self.offdiag
        T[idx + 1, idx] = self.offdiag
        return T


@dataclass
class HouseholderSet:
    """Householder vectors as columns of V (unit pivot entry) plus scalars tau."""

    V: np.ndarray
    tau: np.ndarray

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def count(self) -> int:
        return self.V.shape[1]


def check_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not bitwise symmetric")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _pow2_scale(maxabs: float) -> int:
    """Exponent k such that maxabs * 2**k lies in [1, 2)."""
    if maxabs == 0.0:
        return 0
    return 1 - math.frexp(maxabs)[1]


def _round_low_array(A: np.ndarray) -> np.ndarray:
    return np.float32(A).astype(np.float64)


def _is_low(tier: PrecisionTier) -> bool:
    if tier == PrecisionTier.LOW:
        return True
    if tier == PrecisionTier.WORK:
        return False
    raise ValueError(f"tier {tier} is not supported for this operation")


# ---------------------------------------------------------------------------
# Householder reflectors
# ---------------------------------------------------------------------------


def householder_vector(x) -> tuple[np.ndarray, float, float]:
    """Reflector (v, tau, beta) with (I - tau v v^T) x = beta e1 and v[0] = 1.

    The sign of beta is chosen opposite to x[0] so forming v is free of
    cancellation.
    """
    x = np.asarray(x, dtype=np.float64)
    v = np.zeros_like(x)
    v[0] = 1.0
    if x.shape[0] == 1:
        return v, 0.0, float(x[0])
    sigma = float(np.dot(x[1:], x[1:]))
    if sigma == 0.0:
        return v, 0.0, float(x[0])
    beta = -math.copysign(math.hypot(x[0], math.sqrt(sigma)), x[0])
    v0 = x[0] - beta
    v[1:] = x[1:] / v0
    tau = 2.0 / (1.0 + float(np.dot(v[1:], v[1:])))
    return v, tau, beta


def recompute_tau(H: HouseholderSet) -> HouseholderSet:
    """Recompute tau_j = 2/||v_j||^2 at working precision; V is unchanged.

    This restores reflector orthogonality at working precision even when V was
    computed and stored at low precision.  tau_j = 0 marks an identity
    reflector (LAPACK convention) and is preserved as-is.
    """
    V = H.V
    tau = np.empty(H.count)
    for j in range(H.count):
        if H.tau[j] == 0.0:
            tau[j] = 0.0
            continue
        nrm2 = float(np.dot(V[:, j], V[:, j]))
        if nrm2 == 0.0:
            raise ValueError(f"Householder column {j} has zero norm")
        tau[j] = 2.0 / nrm2
    return HouseholderSet(V, tau)


def apply_reflectors(H: HouseholderSet, B, tier: PrecisionTier = PrecisionTier.WORK) -> np.ndarray:
    """Apply the product of the stored reflectors to B from the left."""
    low = _is_low(tier)
    B = np.array(B, dtype=np.float64, copy=True, order="C")
    if B.ndim == 1:
        out = apply_reflectors(H, B[:, None], tier)
        return out[:, 0]
    if B.shape[0] != H.n:
        raise ValueError("B has incompatible row count")
    k = _pow2_scale(float(np.max(np.abs(B))) if B.size else 0.0)
    Bs = np.ldexp(B, k)
    if low:
        Bs = _round_low_array(Bs)
    _kernels.apply_reflectors_k(H.V, H.tau, Bs, low)
    return np.ldexp(Bs, -k)


# ---------------------------------------------------------------------------
# tridiagonalization and the tridiagonal eigensolver
# ---------------------------------------------------------------------------


def tridiagonalize(A, tier: PrecisionTier = PrecisionTier.WORK) -> tuple[TridiagMatrix, HouseholderSet]:
    """Householder reduction of a symmetric matrix to tridiagonal form."""
    low = _is_low(tier)
    A = check_symmetric(A)
    n = A.shape[0]
    m = max(n - 2, 0)
    V = np.zeros((n, m))
    taus = np.zeros(m)
    if n <= 2:
        d = np.diagonal(A).copy()
        e = np.array([A[1, 0]]) if n == 2 else np.zeros(0)
        return TridiagMatrix(d, e), HouseholderSet(V, taus)
    k = _pow2_scale(float(np.max(np.abs(A))))
    As = np.ldexp(A, k)
    if low:
        As = _round_low_array(As)
    As = np.ascontiguousarray(As)
    _kernels.householder_tridiag(As, V, taus, low)
    d = np.ldexp(np.diagonal(As).copy(), -k)
    idx = np.arange(n - 1)
    e = np.ldexp(As[idx + 1, idx].copy(), -k)
    return TridiagMatrix(d, e), HouseholderSet(V, taus)


def _tridiag_eig_impl(T: TridiagMatrix, low: bool) -> tuple[np.ndarray, np.ndarray]:
    n = T.n
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0)
    maxabs = max(
        float(np.max(np.abs(T.diag))),
        float(np.max(np.abs(T.offdiag))) if n > 1 else 0.0,
    )
    k = _pow2_scale(maxabs)
    d = np.ldexp(T.diag, k)
    e = np.zeros(n)
    e[: n - 1] = np.ldexp(T.offdiag, k)
    if low:
        d = _round_low_array(d)
        e = _round_low_array(e)
    Z = np.eye(n)
    status, _ = _kernels.tridiag_ql(d, e, Z, low, 30 * n)
    if status != 0:
        raise ConvergenceError(
            f"implicit QL did not converge within {30 * n} iterations"
        )
    lam = np.ldexp(d, -k)
    return Z, lam


def tridiag_eig(T: TridiagMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a symmetric tridiagonal matrix.

    Implicit QL with Wilkinson shift, eigenvalues returned in descending
    order with the accumulated rotations as columns of Q_S.
    """
    Z, lam = _tridiag_eig_impl(T, low=False)
    order = np.argsort(-lam, kind="stable")
    return Z[:, order], lam[order]


def sym_eig_low(A) -> tuple[np.ndarray, np.ndarray]:
    """Full spectral decomposition executed at simulated low precision.

    Tridiagonalization, implicit QL, and the back-transformation all run at
    binary32; returns (Q_l, lambda_l) with eigenvalues descending.
    """
    A = check_symmetric(A)
    n = A.shape[0]
    T, H = tridiagonalize(A, PrecisionTier.LOW)
    Z, lam = _tridiag_eig_impl(T, low=True)
    if n > 2:
        Z = apply_reflectors(H, Z, PrecisionTier.LOW)
    order = np.argsort(-lam, kind="stable")
    return Z[:, order], lam[order]


# ---------------------------------------------------------------------------
# orthogonalization of a nearly orthogonal matrix
# ---------------------------------------------------------------------------


def _check_near_orthogonal(Q: np.ndarray) -> None:
    n = Q.shape[0]
    res = np.linalg.norm(Q.T @ Q - np.eye(n), 2)
    if not res < 0.5:
        raise ValueError(
            f"input is too far from orthogonal: ||Q'Q - I|| = {res:.3g} >= 1/2"
        )


def hhqr_orth(Q_l) -> np.ndarray:
    """Orthogonal factor of the Householder QR of Q_l, with diag(R) > 0."""
    Q_l = np.asarray(Q_l, dtype=np.float64)
    n = Q_l.shape[0]
    _check_near_orthogonal(Q_l)
    Q, R = np.linalg.qr(Q_l)
    r = np.diagonal(R)
    if np.min(np.abs(r)) < n * U_WORK * np.linalg.norm(Q_l, 2):
        raise ValueError("rank-deficient input to hhqr_orth")
    return Q * np.where(r < 0.0, -1.0, 1.0)


def mgs_orth(Q_l) -> np.ndarray:
    """Single-pass modified Gram-Schmidt orthogonalization of Q_l."""
    Q_l = np.asarray(Q_l, dtype=np.float64)
    n = Q_l.shape[0]
    _check_near_orthogonal(Q_l)
    Q = Q_l.copy()
    floor = n * U_WORK * np.linalg.norm(Q_l, 2)
    for i in range(n):
        nrm = float(np.linalg.norm(Q[:, i]))
        if nrm < floor:
            raise ValueError("rank-deficient input to mgs_orth")
        Q[:, i] /= nrm
        if i + 1 < n:
            r = Q[:, i] @ Q[:, i + 1:]
            Q[:, i + 1:] -= np.outer(Q[:, i], r)
    return Q


def _newton_schulz(Q_l: np.ndarray, max_iterations: int = 20) -> tuple[np.ndarray, int]:
    n = Q_l.shape[0]
    X = Q_l.copy()
    if np.linalg.norm(X, 2) > 1.5:
        X = X / np.linalg.norm(X, "fro")
    eye = np.eye(n)
    target = n * U_WORK
    prev = math.inf
    for it in range(max_iterations + 1):
        G = X.T @ X
        res = float(np.linalg.norm(G - eye, "fro"))
        if res <= target:
            return X, it
        # rounding floor: quadratic convergence has stalled at a level that
        # still satisfies the preconditioner contract
        if res <= 10.0 * n * U_WORK and res >= 0.5 * prev:
            return X, it
        if it == max_iterations:
            break
        prev = res
        X = X @ (1.5 * eye - 0.5 * G)
    raise ConvergenceError(
        f"Newton-Schulz did not converge in {max_iterations} iterations "
        f"(residual {prev:.3g}); input too far from orthogonal"
    )


def newton_schulz_orth(Q_l) -> np.ndarray:
    """Orthogonalize Q_l by the Newton-Schulz iteration X <- X(3I - X'X)/2."""
    Q_l = np.asarray(Q_l, dtype=np.float64)
    X, _ = _newton_schulz(Q_l)
    return X
