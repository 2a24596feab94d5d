"""Reference solvers used for comparison.

* ``fast``: active-set NNLS working on the normal equations (the Lawson-Hanson
  scheme with Bro and de Jong's precomputed ``A'A`` and ``A'b``).
* ``accer``: projected Nesterov acceleration on ``(A'A, -A'b)``.
* ``anti-accer``: the same accelerated iteration on the cosine-rescaled
  problem.
"""

import enum
import math
import time
import warnings
from typing import Optional

import numpy as np
import scipy.linalg

from .linalg import as_matrix, as_vector, frobenius_norm, gram
from .nnls import NnlsResult, empty_result, rescale, residual_sq, solve_nnls, unscale
from .nqp import (
    IterRecord,
    NqpProblem,
    NumericalFailure,
    SolveResult,
    SolverConfig,
    Termination,
    passive_mask,
)

__all__ = [
    "BaselineKind",
    "solve_fast_activeset",
    "solve_accelerated",
    "solve_accelerated_nnls",
    "solve_anti_accelerated",
    "SOLVERS",
    "solve",
]


class BaselineKind(str, enum.Enum):
    FAST_ACTIVE_SET = "fast"
    ACCELERATED = "accer"
    ANTI_ACCELERATED = "anti-accer"


def _check_inputs(A, b):
    A = as_matrix(A, name="A")
    b = as_vector(b, name="b")
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
    return A, b


def _solve_passive(H, Atb, P):
    """Solve ``H[P, P] s = Atb[P]`` by pivoted symmetric elimination.

    The block is Jacobi-equilibrated first so badly scaled columns do not
    cost accuracy. On near-singularity the diagonal is shifted by
    ``1e-12 * trace / |P|`` and the solve retried once.
    """
    HPP = H[np.ix_(P, P)]
    d = np.sqrt(np.diag(HPP))
    d[d == 0] = 1.0
    S = HPP / np.outer(d, d)
    rhs = Atb[P] / d
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            z = scipy.linalg.solve(S, rhs, assume_a="sym", check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        S = S + (1e-12 * np.trace(S) / P.size) * np.eye(P.size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            z = scipy.linalg.solve(S, rhs, assume_a="sym", check_finite=False)
    return z / d


def _fast_activeset(H, Atb, config):
    n = Atb.shape[0]
    # optimality is judged per unit column length, so short columns are not
    # declared converged just because their raw gradients are small
    lengths = np.sqrt(np.diag(H)).copy()
    lengths[lengths == 0] = 1.0
    tol = 1e-10 * (1.0 + float(np.max(np.abs(Atb / lengths))))
    max_iters = config.max_iters_for(n)
    h = -Atb

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = Atb.copy()  # negative gradient
    banned = np.zeros(n, dtype=bool)
    trace = []
    start = time.perf_counter()
    k = 0

    while True:
        grad = -w
        f = float(0.5 * (x @ (grad + h)))
        mask = passive_mask(x, grad)
        gsq = float(grad[mask] @ grad[mask])
        elapsed = time.perf_counter() - start
        if not math.isfinite(f):
            raise NumericalFailure(f"non-finite objective at iteration {k}", trace, x)

        candidates = ~passive & ~banned
        termination = None
        if not np.any(candidates) or (w[candidates] / lengths[candidates]).max() <= tol:
            termination = Termination.KKT_SATISFIED
        elif k >= max_iters:
            termination = Termination.MAX_ITERS
        elif config.time_cap is not None and elapsed >= config.time_cap:
            termination = Termination.TIME_CAP
        if termination is not None:
            trace.append(IterRecord(k, f, gsq, int(passive.sum()), elapsed))
            break
        record = (k, f, gsq, int(passive.sum()), elapsed)

        open_ = np.flatnonzero(candidates & (w > tol * lengths))
        j = open_[np.argmax(w[open_])]
        passive[j] = True
        P = np.flatnonzero(passive)
        s = np.zeros(n)
        s[P] = _solve_passive(H, Atb, P)
        step = 1.0

        moved = True
        for _ in range(n + 1):
            bad = passive & (s <= 0)
            if not np.any(bad):
                break
            idx = np.flatnonzero(bad)
            ratios = x[idx] / (x[idx] - s[idx])
            step = float(ratios.min())
            if step <= 0 and idx[np.argmin(ratios)] == j and x[j] == 0:
                # the variable just admitted cannot move; skip it until x changes
                passive[j] = False
                banned[j] = True
                moved = False
                break
            x = x + step * (s - x)
            x[idx[ratios <= step]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
            P = np.flatnonzero(passive)
            s = np.zeros(n)
            if P.size:
                s[P] = _solve_passive(H, Atb, P)
        if not moved:
            continue

        if k % config.trace_every == 0:
            trace.append(IterRecord(*record, step))
        x = s
        banned[:] = False
        w = Atb - H @ x
        if not np.all(np.isfinite(w)):
            raise NumericalFailure(f"non-finite gradient at iteration {k}", trace, x)
        k += 1

    return SolveResult(x=x, trace=trace, termination=termination, iterations=k, grad=-w)


def solve_fast_activeset(A, b, config: Optional[SolverConfig] = None) -> NnlsResult:
    """Active-set NNLS on the precomputed normal equations.

    The passive set grows one variable at a time (the one with the most
    negative gradient); whenever the unconstrained solution on the passive
    set leaves the orthant the iterate moves to the boundary and the
    offending variables are released. Stops once every active variable ``j``
    has ``grad_j / ||A_j|| >= -1e-10 * (1 + max_i |A_i'b| / ||A_i||)``.
    """
    config = config or SolverConfig()
    A, b = _check_inputs(A, b)
    H = gram(A)
    Atb = A.T @ b
    inner = _fast_activeset(H, Atb, config)
    return NnlsResult(
        x=inner.x,
        residual_sq=residual_sq(A, b, inner.x),
        inner=inner,
        problem=NqpProblem(H, -Atb),
    )


def solve_accelerated(
    problem: NqpProblem, config: Optional[SolverConfig] = None, counter=None, callback=None
) -> SolveResult:
    """Projected Nesterov iteration with fixed step ``1 / ||Q||_F``.

    Stopping tests and trace records match :func:`antilop.nqp.solve_nqp`; the
    ``alpha`` column holds the fixed step. With ``config.restart`` the
    momentum is reset whenever the objective goes up. ``callback(k, x, grad)``
    sees every projected iterate.
    """
    config = config or SolverConfig()
    Q, q = problem.Q, problem.q
    n = problem.n
    eps = config.epsilon_for(n)
    max_iters = config.max_iters_for(n)
    M = frobenius_norm(Q)

    x = np.zeros(n)
    gx = q.copy()
    y = x.copy()
    gy = gx.copy()
    t = 1.0
    trace = []
    start = time.perf_counter()
    best_gsq = math.inf
    since_best = 0
    k = 0

    while True:
        f = float(0.5 * (x @ (gx + q)))
        mask = passive_mask(x, gx)
        gsq = float(gx[mask] @ gx[mask])
        elapsed = time.perf_counter() - start
        if not (math.isfinite(f) and math.isfinite(gsq)):
            raise NumericalFailure(f"non-finite state at iteration {k}", trace, x)

        termination = None
        if mask.size == 0:
            termination = Termination.EMPTY_PASSIVE_SET
        elif gsq < eps:
            termination = Termination.GRADIENT_BELOW_EPSILON
        elif M == 0:
            termination = Termination.ZERO_CURVATURE
        elif k >= max_iters:
            termination = Termination.MAX_ITERS
        elif config.time_cap is not None and elapsed >= config.time_cap:
            termination = Termination.TIME_CAP
        else:
            if gsq < best_gsq:
                best_gsq, since_best = gsq, 0
            else:
                since_best += 1
            if config.stall_window is not None and since_best >= config.stall_window:
                termination = Termination.STALLED
        if termination is not None:
            trace.append(IterRecord(k, f, gsq, int(mask.size), elapsed))
            break
        if k % config.trace_every == 0:
            trace.append(IterRecord(k, f, gsq, int(mask.size), elapsed, 1.0 / M))

        x_new = np.maximum(y - gy / M, 0.0)
        if counter is not None:
            counter.add(n * n)
        gx_new = Q @ x_new + q
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if config.restart and 0.5 * (x_new @ (gx_new + q)) > f:
            t_new = 1.0
        beta = (t - 1.0) / t_new
        y = x_new + beta * (x_new - x)
        # the gradient is affine, so it extrapolates with the same weights
        gy = gx_new + beta * (gx_new - gx)
        x, gx, t = x_new, gx_new, t_new
        k += 1
        if callback is not None:
            callback(k, x, gx)

    return SolveResult(x=x, trace=trace, termination=termination, iterations=k, grad=gx)


def solve_accelerated_nnls(A, b, config: Optional[SolverConfig] = None) -> NnlsResult:
    """Accelerated projected gradient applied directly to ``(A'A, -A'b)``."""
    A, b = _check_inputs(A, b)
    problem = NqpProblem(gram(A), -(A.T @ b))
    inner = solve_accelerated(problem, config)
    return NnlsResult(x=inner.x, residual_sq=residual_sq(A, b, inner.x), inner=inner, problem=problem)


def solve_anti_accelerated(A, b, config: Optional[SolverConfig] = None) -> NnlsResult:
    """Accelerated projected gradient on the cosine-rescaled problem."""
    A, b = _check_inputs(A, b)
    n = A.shape[1]
    system = rescale(gram(A), -(A.T @ b))
    problem = None
    if system.retained.size:
        problem = system.problem
        inner = solve_accelerated(problem, config)
        x = unscale(inner.x, system)
    else:
        inner = empty_result()
        x = np.zeros(n)
    return NnlsResult(
        x=x,
        residual_sq=residual_sq(A, b, x),
        inner=inner,
        dropped=tuple(int(i) for i in system.dropped),
        problem=problem,
    )


SOLVERS = {
    "antilop": solve_nnls,
    BaselineKind.FAST_ACTIVE_SET.value: solve_fast_activeset,
    BaselineKind.ACCELERATED.value: solve_accelerated_nnls,
    BaselineKind.ANTI_ACCELERATED.value: solve_anti_accelerated,
}


def solve(algo, A, b, config: Optional[SolverConfig] = None) -> NnlsResult:
    """Dispatch to a solver by name: ``antilop``, ``fast``, ``accer`` or ``anti-accer``."""
    try:
        fn = SOLVERS[algo]
    except KeyError:
        raise ValueError(f"unknown solver {algo!r}; choose from {sorted(SOLVERS)}") from None
    return fn(A, b, config)
