"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  The whole suite is deterministic and finishes in a few minutes on a
laptop-class machine; criterion 2 and the 500x500 Gram row of criterion 4
dominate the runtime.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from mpjacobi.cli import main as cli_main
from mpjacobi.jacobi import cyclic_jacobi, cyclic_jacobi_dd, off
from mpjacobi.metrics import (
    cond2,
    cond2_magnitude,
    forward_errors,
    scaled_cond,
    scaled_cond_magnitude,
    theta_sdd,
)
from mpjacobi.multiprec import U_LOW, U_WORK, two_prod, two_sum
from mpjacobi.precond import PRECOND_METHODS, build
from mpjacobi.solver import SolveConfig, sandwich_high, solve
from mpjacobi.testmat import (
    RandSvdSpec,
    hilbert,
    lauchli_gram,
    pascal,
    randsvd_spd,
)


def report(num, name, ok):
    print(f"\nACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} ({name}) failed"


def test_criterion_1_off_quantity_envelope():
    """off(Atilde)/||A||_F <= 5*sqrt(n)*2^-24 for all methods/modes/sizes."""
    ok = True
    for n in (10, 32, 100):
        envelope = 5.0 * math.sqrt(n) * U_LOW
        for mode in (1, 2, 3, 4, 5):
            A = randsvd_spd(RandSvdSpec(n=n, kappa=1e6, mode=mode,
                                        seed=1000 + 10 * n + mode))
            normA = float(np.linalg.norm(A, "fro"))
            for method in PRECOND_METHODS:
                P = build(A, method)
                ratio = off(sandwich_high(P.Qtilde, A)) / normA
                if not ratio <= envelope:
                    print(f"  n={n} mode={mode} {method}: "
                          f"{ratio:.3e} > {envelope:.3e}")
                    ok = False
    report(1, "P2 envelope 5*sqrt(n)*u_low", ok)


def test_criterion_2_main_theorem_bound():
    """MP3 max forward error <= 7n*kappaS(Atilde)*u, n=100, kappa to 1e10."""
    n = 100
    ok = True
    for kappa in (1e2, 1e4, 1e6, 1e8, 1e10):
        for mode in (1, 2, 3, 4, 5):
            A = randsvd_spd(RandSvdSpec(n=n, kappa=kappa, mode=mode,
                                        seed=2000 + mode))
            ref = cyclic_jacobi_dd(A, max_sweeps=60, accumulate=False).lambda_
            res = solve(A, SolveConfig(variant="mp3", max_sweeps=60,
                                       check_assumptions=False))
            At = sandwich_high(res.preconditioner.Qtilde, A)
            kS = scaled_cond(At)
            bound = 7.0 * n * kS * U_WORK
            err = forward_errors(res.lambda_, ref).max_rel_error
            if not err <= bound:
                print(f"  kappa={kappa:g} mode={mode}: "
                      f"err {err:.3e} > bound {bound:.3e}")
                ok = False
    report(2, "main-theorem bound 7n*kappaS(At)*u", ok)


def test_criterion_3_high_accuracy_separation():
    """MP3 error <= 1e-13 while plain Jacobi error >= 1e-11 (mode 3, 1e8)."""
    A = randsvd_spd(RandSvdSpec(n=100, kappa=1e8, mode=3, seed=3000))
    ref = cyclic_jacobi_dd(A, max_sweeps=60, accumulate=False).lambda_
    err = {}
    for variant in ("jacobi", "mp3"):
        res = solve(A, SolveConfig(variant=variant, max_sweeps=60,
                                   check_assumptions=False))
        err[variant] = forward_errors(res.lambda_, ref).max_rel_error
    print(f"  mp3 err {err['mp3']:.3e}, jacobi err {err['jacobi']:.3e}")
    report(3, "MP3 vs Jacobi separation",
           err["mp3"] <= 1e-13 and err["jacobi"] >= 1e-11)


def test_criterion_4_table_rows():
    """Order-of-magnitude rows: pascal(15), lauchli_gram(500), Hilbert(20)."""
    ok = True

    # NOTE: the pascal(15) upper gate of 1e6 is known not to hold for this
    # implementation (measured 3.2e6).  kappaS(Atilde) for kappa_2(A) ~ 2.8e15
    # is dominated by how the binary32-unresolvable eigenvalue cluster happens
    # to rotate: genuine LAPACK binary32 eigensolvers measure 1.3e6 - 2.0e6
    # across drivers, all outside the gate as well.  See the decisions ledger.
    Ap = pascal(15)
    kS_A = scaled_cond(Ap)
    kS_At = scaled_cond(sandwich_high(build(Ap, "hhqr").Qtilde, Ap))
    print(f"  pascal15: kappaS(A)={kS_A:.3e} kappaS(At)={kS_At:.3e}")
    if not (kS_A >= 1e11 and 1e3 <= kS_At <= 1e6):
        print("  pascal15 kappaS(At) outside [1e3, 1e6]; see decisions ledger")
        ok = False

    Al = lauchli_gram(500, 1e-3)
    k2 = cond2(Al)
    kS_Atl = scaled_cond(sandwich_high(build(Al, "hhqr").Qtilde, Al))
    print(f"  lauchli500: kappa2(A)={k2:.3e} kappaS(At)={kS_Atl:.3e}")
    if not (1e8 <= k2 <= 1e9 and kS_Atl <= 2.0):
        ok = False

    # indicative rows: the binary64 Hilbert's smallest eigenvalues are
    # rounding scatter, so the magnitude-ratio measurement is used
    Ah = hilbert(20)
    k2_h = cond2_magnitude(Ah)
    kS_h = scaled_cond_magnitude(Ah)
    print(f"  hilbert20 (indicative): kappa2~{k2_h:.3e} kappaS~{kS_h:.3e}")
    if not (1.08e17 <= k2_h <= 1.08e19 and 3.56e17 <= kS_h <= 3.56e19):
        ok = False

    report(4, "Table rows pascal/lauchli/hilbert", ok)


def test_criterion_5_theta_sdd_implication():
    """Whenever theta < 1/2, the measured kappaS(Atilde) is below 3."""
    rng = np.random.default_rng(5000)
    ok = True
    checked = 0
    for _ in range(200):
        n = int(rng.integers(5, 25))
        kappa = 10.0 ** rng.integers(1, 10)
        mode = int(rng.integers(1, 6))
        method = PRECOND_METHODS[int(rng.integers(0, 4))]
        A = randsvd_spd(RandSvdSpec(n=n, kappa=kappa, mode=mode,
                                    seed=int(rng.integers(0, 2 ** 31))))
        At = sandwich_high(build(A, method).Qtilde, A)
        theta = theta_sdd(At)
        if theta < 0.5:
            checked += 1
            if not scaled_cond(At) < 3.0:
                print(f"  violation: n={n} kappa={kappa:g} mode={mode} "
                      f"theta={theta:.3f}")
                ok = False
    print(f"  {checked}/200 instances had theta < 1/2")
    report(5, "theta-s.d.d. implies kappaS < 3", ok and checked > 0)


def test_criterion_6_componentwise_product_bound():
    """|At_comp - At| <= u|At| + 4*gamma_h*|Qt'||A||Qt| (exact rational)."""
    u = Fraction(1, 2 ** 53)
    uh = Fraction(1, 2 ** 104)
    n = 20
    gh = (n * uh) / (1 - n * uh)
    ok = True
    rng = np.random.default_rng(6000)
    for trial in range(50):
        kappa = 10.0 ** rng.integers(1, 9)
        mode = int(rng.integers(1, 6))
        A = randsvd_spd(RandSvdSpec(n=n, kappa=kappa, mode=mode,
                                    seed=int(rng.integers(0, 2 ** 31))))
        Qt = build(A, "hhqr").Qtilde
        At_comp = sandwich_high(Qt, A).to_float64()
        Qf = [[Fraction(Qt[i, j]) for j in range(n)] for i in range(n)]
        Af = [[Fraction(A[i, j]) for j in range(n)] for i in range(n)]
        QfT = [list(r) for r in zip(*Qf)]
        QA = [[sum(QfT[i][t] * Af[t][j] for t in range(n)) for j in range(n)]
              for i in range(n)]
        exact = [[sum(QA[i][t] * Qf[t][j] for t in range(n)) for j in range(n)]
                 for i in range(n)]
        aQfT = [[abs(x) for x in row] for row in QfT]
        aAf = [[abs(x) for x in row] for row in Af]
        aQf = [[abs(x) for x in row] for row in Qf]
        aQA = [[sum(aQfT[i][t] * aAf[t][j] for t in range(n))
                for j in range(n)] for i in range(n)]
        absprod = [[sum(aQA[i][t] * aQf[t][j] for t in range(n))
                    for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                lhs = abs(Fraction(At_comp[i, j]) - exact[i][j])
                rhs = u * abs(exact[i][j]) + 4 * gh * absprod[i][j]
                if not lhs <= rhs:
                    print(f"  trial {trial} entry ({i},{j}): violation")
                    ok = False
    report(6, "componentwise product error bound", ok)


def test_criterion_7_property_suites():
    """EFT exactness, Jacobi invariants, and the eigenvalue sandwich."""
    ok = True

    # two_sum / two_prod exactness on 1e4 random pairs
    rng = np.random.default_rng(7000)
    mantissas = rng.standard_normal(10000)
    exponents = rng.integers(-300, 300, size=10000)
    failures = 0
    for m, e in zip(mantissas, exponents):
        a = float(np.ldexp(m, int(e)))
        b = float(np.ldexp(rng.standard_normal(), int(rng.integers(-300, 300))))
        s, err = two_sum(a, b)
        if Fraction(s) + Fraction(err) != Fraction(a) + Fraction(b):
            failures += 1
        p, err = two_prod(a, b)
        if Fraction(p) + Fraction(err) != Fraction(a) * Fraction(b):
            failures += 1
    print(f"  EFT failures: {failures}/20000 checks")
    if failures:
        ok = False

    # Jacobi invariants on 100 random s.p.d. matrices with n <= 50
    for i in range(100):
        n = int(rng.integers(3, 51))
        A = randsvd_spd(RandSvdSpec(
            n=n, kappa=10.0 ** rng.integers(1, 9),
            mode=int(rng.integers(1, 6)),
            seed=int(rng.integers(0, 2 ** 31))))
        rep = cyclic_jacobi(A)
        normA = float(np.linalg.norm(A, "fro"))
        if not rep.converged:
            ok = False
            continue
        if abs(float(np.sum(rep.lambda_)) - float(np.trace(A))) \
                > 10 * n * U_WORK * normA:
            print(f"  trace violation at i={i}")
            ok = False
        if np.linalg.norm(rep.Q.T @ rep.Q - np.eye(n), "fro") \
                > 10 * n ** 1.5 * U_WORK:
            print(f"  orthogonality violation at i={i}")
            ok = False
        if np.linalg.norm((rep.Q * rep.lambda_) @ rep.Q.T - A, "fro") \
                > 100 * n * U_WORK * normA:
            print(f"  backward residual violation at i={i}")
            ok = False
        prev = off(A)
        for k in range(1, rep.sweeps + 1):
            cur = off(cyclic_jacobi(A, max_sweeps=k,
                                    accumulate=False).final_matrix)
            if cur > prev + n * U_WORK * normA:
                print(f"  off monotonicity violation at i={i} sweep {k}")
                ok = False
            prev = cur

    # Ostrowski sandwich on n <= 50
    for i in range(10):
        n = int(rng.integers(5, 51))
        A = randsvd_spd(RandSvdSpec(
            n=n, kappa=10.0 ** rng.integers(1, 7),
            mode=int(rng.integers(1, 6)),
            seed=int(rng.integers(0, 2 ** 31))))
        At = sandwich_high(build(A, "hhqr").Qtilde, A)
        lam_A = cyclic_jacobi_dd(A, max_sweeps=60, accumulate=False).lambda_.hi
        lam_At = cyclic_jacobi_dd(At, max_sweeps=60, accumulate=False).lambda_.hi
        r = lam_At / lam_A
        if not (np.all(r >= 1 - 10 * n * U_WORK)
                and np.all(r <= 1 + 10 * n * U_WORK)):
            print(f"  Ostrowski violation at i={i}: range "
                  f"[{r.min():.17f}, {r.max():.17f}]")
            ok = False

    report(7, "property suites", ok)


def test_criterion_8_cli_determinism(tmp_path):
    """Same seed implies byte-identical CSV for every experiment command."""
    ok = True
    grids = [
        ["off-experiment", "--n", "8,12", "--mode", "1,3",
         "--precond", "hhqr,tridiag", "--seed", "9"],
        ["fwd-vs-kappa", "--n", "10", "--kappa", "1e2,1e6", "--mode", "3",
         "--seed", "9"],
        ["fwd-vs-n", "--n", "8,12", "--kappa", "1e4", "--mode", "2",
         "--variant", "jacobi,mp3", "--seed", "9"],
        ["cond-reduction", "--n", "8", "--kappa", "1e2,1e6", "--mode", "1,5",
         "--specials", "", "--seed", "9"],
    ]
    for i, args in enumerate(grids):
        a = tmp_path / f"{i}_a.csv"
        b = tmp_path / f"{i}_b.csv"
        cli_main(args + ["--out", str(a), "--no-plot"])
        cli_main(args + ["--out", str(b), "--no-plot", "--workers", "3"])
        if a.read_bytes() != b.read_bytes():
            print(f"  {args[0]}: outputs differ")
            ok = False
    report(8, "CLI determinism", ok)
