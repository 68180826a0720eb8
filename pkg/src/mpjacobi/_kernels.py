"""Compiled numerical kernels.

Everything here is scalar-loop code compiled with numba (fastmath stays off,
so operations are strict IEEE 754 binary64 with no reassociation or FMA
contraction -- the error-free transformations below depend on that).

Two arithmetic styles appear:

* double-double: a value is an unevaluated sum ``hi + lo`` of two binary64
  numbers, giving roughly 106 significand bits.  Helpers follow the usual
  two_sum / two_prod constructions (Dekker splitting, no FMA).
* simulated binary32: every scalar operation is computed in binary64 and then
  rounded through binary32 (``low=True`` paths).  Double rounding is innocuous
  here because binary64 carries more than 2*24+2 significand bits, so the
  result is bit-identical to native binary32 arithmetic, but the evaluation
  order is fixed by these loops and therefore reproducible everywhere.
"""

import math

import numpy as np
from numba import njit

_SPLITTER = 134217729.0  # 2**27 + 1


# ---------------------------------------------------------------------------
# error-free transforms and double-double scalar helpers
# ---------------------------------------------------------------------------


@njit(cache=True)
def two_sum_k(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True)
def quick_two_sum_k(a, b):
    # requires |a| >= |b| or a == 0
    s = a + b
    return s, b - (s - a)


@njit(cache=True)
def two_prod_k(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


@njit(cache=True)
def dd_add_k(ah, al, bh, bl):
    sh, se = two_sum_k(ah, bh)
    th, te = two_sum_k(al, bl)
    se += th
    sh, se = quick_two_sum_k(sh, se)
    se += te
    return quick_two_sum_k(sh, se)


@njit(cache=True)
def dd_sub_k(ah, al, bh, bl):
    return dd_add_k(ah, al, -bh, -bl)


@njit(cache=True)
def dd_mul_k(ah, al, bh, bl):
    ph, pe = two_prod_k(ah, bh)
    pe += ah * bl + al * bh
    return quick_two_sum_k(ph, pe)


@njit(cache=True)
def dd_mul_f_k(ah, al, b):
    ph, pe = two_prod_k(ah, b)
    pe += al * b
    return quick_two_sum_k(ph, pe)


@njit(cache=True)
def dd_div_k(ah, al, bh, bl):
    q1 = ah / bh
    th, tl = dd_mul_f_k(bh, bl, q1)
    rh, rl = dd_sub_k(ah, al, th, tl)
    q2 = rh / bh
    th, tl = dd_mul_f_k(bh, bl, q2)
    rh, rl = dd_sub_k(rh, rl, th, tl)
    q3 = rh / bh
    q1, q2 = quick_two_sum_k(q1, q2)
    return dd_add_k(q1, q2, q3, 0.0)


@njit(cache=True)
def dd_sqrt_k(ah, al):
    # one Newton correction on the binary64 square root
    if ah == 0.0:
        return 0.0, 0.0
    x0 = math.sqrt(ah)
    sh, sl = two_prod_k(x0, x0)
    eh, el = dd_sub_k(ah, al, sh, sl)
    corr = eh / (2.0 * x0)
    return quick_two_sum_k(x0, corr)


# ---------------------------------------------------------------------------
# tier-aware scalar operations (low=True rounds through binary32)
# ---------------------------------------------------------------------------


@njit(cache=True)
def rnd32(x):
    return np.float64(np.float32(x))


@njit(cache=True)
def _add(a, b, low):
    s = a + b
    if low:
        return rnd32(s)
    return s


@njit(cache=True)
def _sub(a, b, low):
    s = a - b
    if low:
        return rnd32(s)
    return s


@njit(cache=True)
def _mul(a, b, low):
    s = a * b
    if low:
        return rnd32(s)
    return s


@njit(cache=True)
def _div(a, b, low):
    s = a / b
    if low:
        return rnd32(s)
    return s


@njit(cache=True)
def _sqrt(a, low):
    s = math.sqrt(a)
    if low:
        return rnd32(s)
    return s


# ---------------------------------------------------------------------------
# cyclic Jacobi, working precision
# ---------------------------------------------------------------------------

JACOBI_CONVERGED = 0
JACOBI_MAXSWEEPS = 1
JACOBI_INDEFINITE = 2


@njit(cache=True, nogil=True)
def jacobi_f64(A, Q, tol, max_sweeps, accumulate):
    """Row-cyclic two-sided Jacobi on a full symmetric matrix, in place.

    Rotations are skipped for pairs with |a_pq| <= tol*sqrt(a_pp)*sqrt(a_qq).
    Returns (sweeps, rotations, status); sweeps counts passes that applied at
    least one rotation, and status reflects whether the final matrix satisfies
    the stopping criterion for every pair.
    """
    n = A.shape[0]
    sweeps = 0
    rotations = 0
    while sweeps < max_sweeps:
        changed = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = A[p, p]
                aqq = A[q, q]
                if app <= 0.0 or aqq <= 0.0:
                    return sweeps, rotations, JACOBI_INDEFINITE
                apq = A[p, q]
                # sqrt(app)*sqrt(aqq) rather than sqrt(app*aqq): the product
                # can overflow for entries near 2**512
                if abs(apq) <= tol * (math.sqrt(app) * math.sqrt(aqq)):
                    continue
                tau = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0 / (abs(tau) + math.hypot(1.0, tau)), tau)
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                tapq = t * apq
                A[p, p] = app - tapq
                A[q, q] = aqq + tapq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = A[k, p]
                    akq = A[k, q]
                    x = c * akp - s * akq
                    y = s * akp + c * akq
                    A[k, p] = x
                    A[p, k] = x
                    A[k, q] = y
                    A[q, k] = y
                if accumulate:
                    for k in range(n):
                        qkp = Q[k, p]
                        qkq = Q[k, q]
                        Q[k, p] = c * qkp - s * qkq
                        Q[k, q] = s * qkp + c * qkq
                rotations += 1
                changed = True
        if not changed:
            break
        sweeps += 1
    # comparison-only scan so that "converged" is exact on the final matrix
    for p in range(n - 1):
        for q in range(p + 1, n):
            app = A[p, p]
            aqq = A[q, q]
            if app <= 0.0 or aqq <= 0.0:
                return sweeps, rotations, JACOBI_INDEFINITE
            if abs(A[p, q]) > tol * (math.sqrt(app) * math.sqrt(aqq)):
                return sweeps, rotations, JACOBI_MAXSWEEPS
    return sweeps, rotations, JACOBI_CONVERGED


# ---------------------------------------------------------------------------
# cyclic Jacobi, double-double (same sweep structure as jacobi_f64)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def jacobi_dd(Ah, Al, Qh, Ql, tol, max_sweeps, accumulate):
    n = Ah.shape[0]
    sweeps = 0
    rotations = 0
    while sweeps < max_sweeps:
        changed = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apph = Ah[p, p]
                appl = Al[p, p]
                aqqh = Ah[q, q]
                aqql = Al[q, q]
                if apph <= 0.0 or aqqh <= 0.0:
                    return sweeps, rotations, JACOBI_INDEFINITE
                apqh = Ah[p, q]
                apql = Al[p, q]
                rph, rpl = dd_sqrt_k(apph, appl)
                rqh, rql = dd_sqrt_k(aqqh, aqql)
                gh, gl = dd_mul_k(rph, rpl, rqh, rql)
                thresh = tol * gh
                if abs(apqh) <= thresh:
                    continue
                # tau = (aqq - app) / (2 apq)
                dh, dl = dd_sub_k(aqqh, aqql, apph, appl)
                tauh, taul = dd_div_k(dh, dl, 2.0 * apqh, 2.0 * apql)
                # t = sign(tau) / (|tau| + sqrt(1 + tau^2))
                sqh_, sql_ = dd_mul_k(tauh, taul, tauh, taul)
                sqh_, sql_ = dd_add_k(sqh_, sql_, 1.0, 0.0)
                sqh_, sql_ = dd_sqrt_k(sqh_, sql_)
                ath = abs(tauh)
                atl = taul if tauh >= 0.0 else -taul
                deh, del_ = dd_add_k(ath, atl, sqh_, sql_)
                th, tl = dd_div_k(1.0, 0.0, deh, del_)
                if tauh < 0.0:
                    th = -th
                    tl = -tl
                # c = 1/sqrt(1 + t^2), s = t*c
                uh, ul = dd_mul_k(th, tl, th, tl)
                uh, ul = dd_add_k(uh, ul, 1.0, 0.0)
                uh, ul = dd_sqrt_k(uh, ul)
                ch, cl = dd_div_k(1.0, 0.0, uh, ul)
                sh, sl = dd_mul_k(th, tl, ch, cl)
                # diagonal update: app -= t*apq, aqq += t*apq
                tph, tpl = dd_mul_k(th, tl, apqh, apql)
                nh, nl = dd_sub_k(apph, appl, tph, tpl)
                Ah[p, p] = nh
                Al[p, p] = nl
                nh, nl = dd_add_k(aqqh, aqql, tph, tpl)
                Ah[q, q] = nh
                Al[q, q] = nl
                Ah[p, q] = 0.0
                Al[p, q] = 0.0
                Ah[q, p] = 0.0
                Al[q, p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    xh = Ah[k, p]
                    xl = Al[k, p]
                    yh = Ah[k, q]
                    yl = Al[k, q]
                    axh, axl = dd_mul_k(ch, cl, xh, xl)
                    byh, byl = dd_mul_k(sh, sl, yh, yl)
                    nxh, nxl = dd_sub_k(axh, axl, byh, byl)
                    axh, axl = dd_mul_k(sh, sl, xh, xl)
                    byh, byl = dd_mul_k(ch, cl, yh, yl)
                    nyh, nyl = dd_add_k(axh, axl, byh, byl)
                    Ah[k, p] = nxh
                    Al[k, p] = nxl
                    Ah[p, k] = nxh
                    Al[p, k] = nxl
                    Ah[k, q] = nyh
                    Al[k, q] = nyl
                    Ah[q, k] = nyh
                    Al[q, k] = nyl
                if accumulate:
                    for k in range(n):
                        xh = Qh[k, p]
                        xl = Ql[k, p]
                        yh = Qh[k, q]
                        yl = Ql[k, q]
                        axh, axl = dd_mul_k(ch, cl, xh, xl)
                        byh, byl = dd_mul_k(sh, sl, yh, yl)
                        nxh, nxl = dd_sub_k(axh, axl, byh, byl)
                        axh, axl = dd_mul_k(sh, sl, xh, xl)
                        byh, byl = dd_mul_k(ch, cl, yh, yl)
                        nyh, nyl = dd_add_k(axh, axl, byh, byl)
                        Qh[k, p] = nxh
                        Ql[k, p] = nxl
                        Qh[k, q] = nyh
                        Ql[k, q] = nyl
                rotations += 1
                changed = True
        if not changed:
            break
        sweeps += 1
    for p in range(n - 1):
        for q in range(p + 1, n):
            apph = Ah[p, p]
            aqqh = Ah[q, q]
            if apph <= 0.0 or aqqh <= 0.0:
                return sweeps, rotations, JACOBI_INDEFINITE
            rph, rpl = dd_sqrt_k(apph, Al[p, p])
            rqh, rql = dd_sqrt_k(aqqh, Al[q, q])
            gh, gl = dd_mul_k(rph, rpl, rqh, rql)
            if abs(Ah[p, q]) > tol * gh:
                return sweeps, rotations, JACOBI_MAXSWEEPS
    return sweeps, rotations, JACOBI_CONVERGED


# ---------------------------------------------------------------------------
# double-double matrix helpers
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def matmul_dd(Ah, Al, Bh, Bl, Ch, Cl):
    """C = A @ B with every product and accumulation in double-double."""
    m = Ah.shape[0]
    n = Bh.shape[1]
    kk = Ah.shape[1]
    for i in range(m):
        for j in range(n):
            sh = 0.0
            sl = 0.0
            for k in range(kk):
                ph, pl = dd_mul_k(Ah[i, k], Al[i, k], Bh[k, j], Bl[k, j])
                sh, sl = dd_add_k(sh, sl, ph, pl)
            Ch[i, j] = sh
            Cl[i, j] = sl


@njit(cache=True, nogil=True)
def symmetrize_dd(Ah, Al):
    """A <- (A + A^T)/2 elementwise in double-double, in place."""
    n = Ah.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            sh, sl = dd_add_k(Ah[i, j], Al[i, j], Ah[j, i], Al[j, i])
            sh *= 0.5
            sl *= 0.5
            Ah[i, j] = sh
            Al[i, j] = sl
            Ah[j, i] = sh
            Al[j, i] = sl


@njit(cache=True, nogil=True)
def off_dd(Ah, Al):
    """Frobenius norm of the off-diagonal part, accumulated in double-double."""
    n = Ah.shape[0]
    m = 0.0
    for i in range(n):
        for j in range(n):
            if i != j and abs(Ah[i, j]) > m:
                m = abs(Ah[i, j])
    if m == 0.0:
        return 0.0
    if not math.isfinite(m):
        return m
    # exact power-of-two scaling avoids overflow when squaring
    scale = 1.0
    while m * scale > 1.0:
        scale *= 0.5
    while m * scale < 0.5:
        scale *= 2.0
    sh = 0.0
    sl = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            eh = Ah[i, j] * scale
            el = Al[i, j] * scale
            ph, pl = dd_mul_k(eh, el, eh, el)
            sh, sl = dd_add_k(sh, sl, ph, pl)
    rh, rl = dd_sqrt_k(sh, sl)
    return rh / scale


@njit(cache=True, nogil=True)
def unit_diag_scale_dd(Ah, Al, Ch, Cl):
    """C = D A D with D = diag(a_ii^{-1/2}), all in double-double.

    Returns 0 on success, 2 if a diagonal entry is not positive.
    """
    n = Ah.shape[0]
    dh = np.empty(n)
    dl = np.empty(n)
    for i in range(n):
        if Ah[i, i] <= 0.0:
            return 2
        rh, rl = dd_sqrt_k(Ah[i, i], Al[i, i])
        dh[i], dl[i] = dd_div_k(1.0, 0.0, rh, rl)
    for i in range(n):
        for j in range(n):
            ph, pl = dd_mul_k(dh[i], dl[i], Ah[i, j], Al[i, j])
            ph, pl = dd_mul_k(ph, pl, dh[j], dl[j])
            Ch[i, j] = ph
            Cl[i, j] = pl
    return 0


# ---------------------------------------------------------------------------
# Householder tridiagonalization (works at binary64 or simulated binary32)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def householder_tridiag(A, V, taus, low):
    """Reduce symmetric A to tridiagonal form in place.

    Column k of V receives the Householder vector (unit pivot entry, zeros
    above).  On exit the tridiagonal part of A holds the result; entries
    outside it are zeroed.
    """
    n = A.shape[0]
    for k in range(n - 2):
        piv = k + 1
        sigma = 0.0
        for i in range(piv + 1, n):
            sigma = _add(sigma, _mul(A[i, k], A[i, k], low), low)
        x0 = A[piv, k]
        if sigma == 0.0:
            V[piv, k] = 1.0
            taus[k] = 0.0
            continue
        nrm = _sqrt(_add(_mul(x0, x0, low), sigma, low), low)
        beta = -math.copysign(nrm, x0)
        v0 = _sub(x0, beta, low)
        V[piv, k] = 1.0
        vnorm2 = 1.0
        for i in range(piv + 1, n):
            vi = _div(A[i, k], v0, low)
            V[i, k] = vi
            vnorm2 = _add(vnorm2, _mul(vi, vi, low), low)
        tau = _div(2.0, vnorm2, low)
        taus[k] = tau
        # p = tau * A[piv:, piv:] v
        for i in range(piv, n):
            s = 0.0
            for j in range(piv, n):
                s = _add(s, _mul(A[i, j], V[j, k], low), low)
            A[k, i] = _mul(tau, s, low)  # stash p in the dead row k
        # alpha = tau * (v' p) / 2 ;  w = p - alpha v
        alpha = 0.0
        for i in range(piv, n):
            alpha = _add(alpha, _mul(V[i, k], A[k, i], low), low)
        alpha = _mul(_mul(0.5, tau, low), alpha, low)
        for i in range(piv, n):
            A[k, i] = _sub(A[k, i], _mul(alpha, V[i, k], low), low)
        # A <- A - v w' - w v'  on the trailing block
        for i in range(piv, n):
            wi = A[k, i]
            vi = V[i, k]
            for j in range(piv, i + 1):
                aij = _sub(
                    _sub(A[i, j], _mul(vi, A[k, j], low), low),
                    _mul(wi, V[j, k], low),
                    low,
                )
                A[i, j] = aij
                A[j, i] = aij
        A[piv, k] = beta
        A[k, piv] = beta
        for i in range(piv + 1, n):
            A[i, k] = 0.0
            A[k, i] = 0.0


@njit(cache=True, nogil=True)
def apply_reflectors_k(V, taus, B, low):
    """B <- (H_0 H_1 ... H_{m-1}) B with H_j = I - tau_j v_j v_j'."""
    n = B.shape[0]
    ncols = B.shape[1]
    m = V.shape[1]
    for j in range(m - 1, -1, -1):
        if taus[j] == 0.0:
            continue
        piv = j + 1
        for col in range(ncols):
            s = 0.0
            for i in range(piv, n):
                s = _add(s, _mul(V[i, j], B[i, col], low), low)
            s = _mul(taus[j], s, low)
            for i in range(piv, n):
                B[i, col] = _sub(B[i, col], _mul(V[i, j], s, low), low)


# ---------------------------------------------------------------------------
# implicit QL with Wilkinson shift (binary64 or simulated binary32)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def tridiag_ql(d, e, Z, low, max_total):
    """Eigenvalues of a symmetric tridiagonal matrix by implicit QL.

    d (length n) holds the diagonal and receives the eigenvalues; e (length n)
    holds the subdiagonal in e[0..n-2].  Accumulates the rotations into Z.
    Returns (status, iterations): status 0 on success, 1 if the iteration
    budget max_total was exhausted.
    """
    n = d.shape[0]
    nz = Z.shape[0]
    eps = 2.0 ** -23 if low else 2.0 ** -52
    e[n - 1] = 0.0
    total = 0
    for l in range(n):
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd_ = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= eps * dd_:
                    m = mm
                    break
            if m == l:
                break
            total += 1
            if total > max_total:
                return 1, total
            g = _div(_sub(d[l + 1], d[l], low), _mul(2.0, e[l], low), low)
            r = _sqrt(_add(_mul(g, g, low), 1.0, low), low)
            g = _add(
                _sub(d[m], d[l], low),
                _div(e[l], _add(g, math.copysign(r, g), low), low),
                low,
            )
            s = 1.0
            c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = _mul(s, e[i], low)
                b = _mul(c, e[i], low)
                r = _sqrt(_add(_mul(f, f, low), _mul(g, g, low), low), low)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] = _sub(d[i + 1], p, low)
                    e[m] = 0.0
                    broke = True
                    break
                s = _div(f, r, low)
                c = _div(g, r, low)
                g = _sub(d[i + 1], p, low)
                r = _add(
                    _mul(_sub(d[i], g, low), s, low),
                    _mul(_mul(2.0, c, low), b, low),
                    low,
                )
                p = _mul(s, r, low)
                d[i + 1] = _add(g, p, low)
                g = _sub(_mul(c, r, low), b, low)
                for kz in range(nz):
                    f2 = Z[kz, i + 1]
                    Z[kz, i + 1] = _add(
                        _mul(s, Z[kz, i], low), _mul(c, f2, low), low
                    )
                    Z[kz, i] = _sub(_mul(c, Z[kz, i], low), _mul(s, f2, low), low)
            if not broke:
                d[l] = _sub(d[l], p, low)
                e[l] = g
                e[m] = 0.0
    return 0, total
