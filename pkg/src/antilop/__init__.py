"""Anti-lopsided non-negative least squares.

Solve ``min 0.5||Ax - b||^2`` subject to ``x >= 0`` by rescaling the normal
equations to unit column length and running projected gradient descent with
exact line search. Active-set and accelerated baselines, a test-case
generator and a benchmark CLI are included.
"""

from .baselines import (
    SOLVERS,
    solve,
    solve_accelerated,
    solve_accelerated_nnls,
    solve_anti_accelerated,
    solve_fast_activeset,
)
from .linalg import OpCounter, frobenius_norm, gram, masked_matvec, matvec
from .nnls import NnlsResult, ScaledSystem, rescale, solve_nnls, unscale
from .nqp import (
    IterRecord,
    NqpProblem,
    NumericalFailure,
    SolveResult,
    SolverConfig,
    Termination,
    ZeroCurvature,
    exact_step,
    objective,
    passive_mask,
    solve_nqp,
)

__version__ = "0.1.0"
