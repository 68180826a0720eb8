"""Mixed-precision preconditioned Jacobi eigensolver.

A symmetric positive definite eigensolver whose eigenvalue accuracy is
governed by the scaled condition number of the preconditioned matrix rather
than the condition number of the input: a low-precision factorization builds
the preconditioner, the preconditioner is applied in double-double arithmetic,
and a working-precision cyclic Jacobi with a relative stopping criterion
finishes the job.
"""

from .densecore import (
    ConvergenceError,
    HouseholderSet,
    TridiagMatrix,
    apply_reflectors,
    hhqr_orth,
    householder_vector,
    mgs_orth,
    newton_schulz_orth,
    recompute_tau,
    sym_eig_low,
    tridiag_eig,
    tridiagonalize,
)
from .jacobi import (
    JacobiConvergenceError,
    JacobiReport,
    NotPositiveDefiniteError,
    cyclic_jacobi,
    cyclic_jacobi_dd,
    default_tol,
    jacobi_rotation,
    off,
)
from .metrics import (
    ErrorProfile,
    cond2,
    cond2_magnitude,
    forward_errors,
    hadamard_bound,
    scaled_cond,
    scaled_cond_magnitude,
    theta_sdd,
)
from .multiprec import (
    DDArray,
    DDNumber,
    PrecisionTier,
    U_HIGH,
    U_LOW,
    U_WORK,
    UnderflowWarning,
    dd_add,
    dd_div,
    dd_mul,
    dd_sub,
    demote_high_to_work,
    gamma,
    round_low,
    two_prod,
    two_sum,
)
from .precond import (
    PRECOND_METHODS,
    Preconditioner,
    QualityReport,
    build,
    build_spectral,
    build_tridiag,
    precond_quality,
)
from .solver import (
    VARIANTS,
    AssumptionCheck,
    SolveConfig,
    SolveDiagnostics,
    SpectralResult,
    check_assumptions,
    sandwich_high,
    scale_input,
    solve,
)
from .testmat import (
    RandSvdSpec,
    hilbert,
    hilbert_dd,
    invhilbert,
    invhilbert_dd,
    lauchli_gram,
    pascal,
    randsvd_spd,
)

__version__ = "0.1.0"
