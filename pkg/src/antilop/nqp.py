"""Non-negative quadratic programs: minimize ``0.5 x'Qx + q'x`` subject to ``x >= 0``.

The solver is a projected first-order method. Each iteration restricts the
gradient to the passive variables (positive, or with a negative gradient
component), takes the exact minimizing step of the quadratic along that
direction, clips at zero and updates the gradient incrementally.
"""

import csv
import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .linalg import as_matrix, as_vector, masked_matvec

__all__ = [
    "Termination",
    "NqpProblem",
    "SolverConfig",
    "IterRecord",
    "SolveResult",
    "NumericalFailure",
    "ZeroCurvature",
    "passive_mask",
    "exact_step",
    "objective",
    "solve_nqp",
    "steepest_descent",
    "kkt_tolerance",
    "kkt_violation",
    "satisfies_kkt",
    "write_trace_csv",
    "TRACE_HEADER",
]

TRACE_HEADER = ("iter", "elapsed_ms", "f", "grad_bar_sq", "passive_count", "alpha")


class Termination(str, enum.Enum):
    EMPTY_PASSIVE_SET = "EmptyPassiveSet"
    GRADIENT_BELOW_EPSILON = "GradientBelowEpsilon"
    MAX_ITERS = "MaxIters"
    TIME_CAP = "TimeCap"
    STALLED = "Stalled"
    ZERO_CURVATURE = "ZeroCurvature"
    # reported by the active-set baseline, which has no epsilon test
    KKT_SATISFIED = "KKTSatisfied"

    @property
    def converged(self):
        return self in (
            Termination.EMPTY_PASSIVE_SET,
            Termination.GRADIENT_BELOW_EPSILON,
            Termination.KKT_SATISFIED,
        )

    def __str__(self):
        return self.value


class NumericalFailure(RuntimeError):
    """A non-finite value appeared mid-solve. ``trace`` holds the records so far."""

    def __init__(self, message, trace=None, x=None):
        super().__init__(message)
        self.trace = list(trace or [])
        self.x = x


class ZeroCurvature(ArithmeticError):
    """The quadratic has no positive curvature along the search direction."""


@dataclass(frozen=True)
class NqpProblem:
    Q: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, name="Q")
        q = as_vector(self.q, name="q")
        n = Q.shape[0]
        if Q.shape != (n, n):
            raise ValueError(f"Q must be square, got {Q.shape}")
        if q.shape[0] != n:
            raise ValueError(f"q has length {q.shape[0]}, expected {n}")
        scale = max(1.0, float(np.max(np.abs(Q))))
        if np.max(np.abs(Q - Q.T)) > 1e-12 * scale:
            raise ValueError("Q must be symmetric")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)

    @property
    def n(self):
        return self.q.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules shared by all solvers.

    ``epsilon`` thresholds the squared norm of the masked gradient and
    defaults to ``1e-12 * n``; ``max_iters`` defaults to ``5 * n``.
    ``time_cap`` is in seconds (``None`` for no cap). A run is declared
    stalled when the smallest masked-gradient norm seen has not improved for
    ``stall_window`` consecutive iterations. The rule is off by default:
    projected steepest descent routinely goes thousands of iterations
    between new minima of the gradient norm while still making progress.
    """

    epsilon: Optional[float] = None
    max_iters: Optional[int] = None
    time_cap: Optional[float] = None
    stall_window: Optional[int] = None
    trace_every: int = 1
    restart: bool = False

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.time_cap is not None and not self.time_cap > 0:
            raise ValueError("time_cap must be positive")
        if self.stall_window is not None and self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")

    def epsilon_for(self, n):
        return self.epsilon if self.epsilon is not None else 1e-12 * n

    def max_iters_for(self, n):
        return self.max_iters if self.max_iters is not None else 5 * n


@dataclass(frozen=True)
class IterRecord:
    k: int
    f: float
    grad_bar_sq: float
    passive_count: int
    elapsed: float
    alpha: Optional[float] = None


@dataclass
class SolveResult:
    x: np.ndarray
    trace: List[IterRecord]
    termination: Termination
    iterations: int
    grad: np.ndarray = field(repr=False)

    @property
    def f(self):
        return self.trace[-1].f


def passive_mask(x, grad):
    """Indices with ``x_i > 0`` or ``grad_i < 0``."""
    if x.shape != grad.shape:
        raise ValueError("x and grad must have the same length")
    return np.flatnonzero((x > 0) | (grad < 0))


def _step_and_product(Q, grad_bar, mask, counter=None):
    Qg = masked_matvec(Q, grad_bar, mask, counter)
    num = float(grad_bar[mask] @ grad_bar[mask])
    den = float(grad_bar @ Qg)
    if not den > 0:
        raise ZeroCurvature(f"non-positive curvature {den!r} along the masked gradient")
    return num / den, Qg


def exact_step(Q, grad_bar):
    """Minimizing step length ``||g||^2 / (g'Qg)`` along ``-g``.

    Raises :class:`ZeroCurvature` when ``g'Qg <= 0``.
    """
    grad_bar = np.asarray(grad_bar, dtype=np.float64)
    mask = np.flatnonzero(grad_bar)
    if mask.size == 0:
        raise ValueError("grad_bar must be nonzero")
    alpha, _ = _step_and_product(Q, grad_bar, mask)
    return alpha


def objective(problem, x):
    """``0.5 x'Qx + q'x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != problem.q.shape:
        raise ValueError(f"x has shape {x.shape}, expected {problem.q.shape}")
    return float(0.5 * (x @ (problem.Q @ x)) + problem.q @ x)


def kkt_tolerance(q, epsilon):
    return math.sqrt(epsilon) * (1.0 + float(np.linalg.norm(q)))


def kkt_violation(x, grad):
    """Largest breach of ``x >= 0``, ``grad_i >= 0`` where ``x_i = 0``, ``grad_i = 0`` where ``x_i > 0``."""
    x = np.asarray(x)
    grad = np.asarray(grad)
    pos = x > 0
    worst = max(0.0, float(-x.min())) if x.size else 0.0
    if np.any(pos):
        worst = max(worst, float(np.abs(grad[pos]).max()))
    if np.any(~pos):
        worst = max(worst, float(-grad[~pos].min()))
    return worst


def satisfies_kkt(x, grad, q, epsilon):
    return bool(np.all(x >= 0)) and kkt_violation(x, grad) <= kkt_tolerance(q, epsilon)


def solve_nqp(
    problem: NqpProblem,
    config: Optional[SolverConfig] = None,
    x0=None,
    counter=None,
    callback: Optional[Callable] = None,
) -> SolveResult:
    """Projected gradient descent with exact line search on the passive set.

    Parameters
    ----------
    problem : NqpProblem
    config : SolverConfig, optional
    x0 : array_like, optional
        Non-negative starting point. Defaults to the origin, where the
        gradient is simply ``q``.
    counter : OpCounter, optional
        Receives the multiply count of every matrix-vector product.
    callback : callable, optional
        Called as ``callback(k, x, grad)`` after iterate ``k`` is formed.
        The arrays are live solver state and must not be modified.

    Returns
    -------
    SolveResult
        One trace record per iteration (every ``trace_every``-th) plus a
        final record without a step length.

    Notes
    -----
    If clipping at zero makes the projected exact step increase the
    objective, the step is shortened to the first point where a variable
    reaches zero. Along that segment no projection is needed, so every
    iteration is a descent step.
    """
    config = config or SolverConfig()
    Q, q = problem.Q, problem.q
    n = problem.n
    eps = config.epsilon_for(n)
    max_iters = config.max_iters_for(n)

    if x0 is None:
        x = np.zeros(n)
        grad = q.copy()
    else:
        x = as_vector(x0, name="x0").copy()
        if x.shape != (n,) or np.any(x < 0):
            raise ValueError("x0 must be a non-negative vector of length n")
        grad = Q @ x + q

    trace = []
    start = time.perf_counter()
    best_gsq = math.inf
    since_best = 0
    k = 0
    termination = Termination.MAX_ITERS

    while True:
        f = float(0.5 * (x @ (grad + q)))
        mask = passive_mask(x, grad)
        grad_bar = np.zeros(n)
        grad_bar[mask] = grad[mask]
        gsq = float(grad_bar[mask] @ grad_bar[mask])
        elapsed = time.perf_counter() - start

        if not (math.isfinite(f) and math.isfinite(gsq)):
            raise NumericalFailure(f"non-finite state at iteration {k}", trace, x)

        if mask.size == 0:
            termination = Termination.EMPTY_PASSIVE_SET
        elif gsq < eps:
            termination = Termination.GRADIENT_BELOW_EPSILON
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
            else:
                termination = None
        if termination is not None:
            trace.append(IterRecord(k, f, gsq, int(mask.size), elapsed))
            break

        try:
            alpha, Qg = _step_and_product(Q, grad_bar, mask, counter)
        except ZeroCurvature:
            trace.append(IterRecord(k, f, gsq, int(mask.size), elapsed))
            termination = Termination.ZERO_CURVATURE
            break
        if not math.isfinite(alpha):
            raise NumericalFailure(f"non-finite step at iteration {k}", trace, x)

        x_trial = x - alpha * grad_bar
        clipped = np.flatnonzero(x_trial < 0)
        x_new = x_trial.copy()
        x_new[clipped] = 0.0
        delta = x_new - x
        # Q delta = -alpha Q g + Q (x_new - x_trial); the correction lives on the clipped set
        Qdelta = -alpha * Qg
        if clipped.size:
            Qdelta += masked_matvec(Q, x_new - x_trial, clipped, counter)
            f_new = f + float(grad @ delta) + 0.5 * float(delta @ Qdelta)
            if f_new > f:
                hit = grad_bar > 0
                alpha = min(alpha, float(np.min(x[hit] / grad_bar[hit])))
                x_new = np.maximum(x - alpha * grad_bar, 0.0)
                delta = x_new - x
                Qdelta = masked_matvec(Q, delta, np.flatnonzero(delta), counter)

        if k % config.trace_every == 0:
            trace.append(IterRecord(k, f, gsq, int(mask.size), elapsed, alpha))

        grad += Qdelta
        x = x_new
        k += 1
        if callback is not None:
            callback(k, x, grad)

    return SolveResult(x=x, trace=trace, termination=termination, iterations=k, grad=grad)


def steepest_descent(problem: NqpProblem, x0, epsilon=1e-10, max_iters=10000) -> SolveResult:
    """Unconstrained gradient descent with exact line search on ``0.5 x'Qx + q'x``.

    No projection and no passive set: this is the textbook iteration whose
    zig-zagging on badly scaled quadratics the cosine rescaling removes.
    Stops when ``||grad||^2 < epsilon``.
    """
    Q, q = problem.Q, problem.q
    x = as_vector(x0, name="x0").copy()
    grad = Q @ x + q
    trace = []
    start = time.perf_counter()
    termination = Termination.MAX_ITERS
    for k in range(max_iters + 1):
        f = float(0.5 * (x @ (grad + q)))
        gsq = float(grad @ grad)
        elapsed = time.perf_counter() - start
        if gsq < epsilon:
            termination = Termination.GRADIENT_BELOW_EPSILON
            break
        if k == max_iters:
            break
        Qg = Q @ grad
        den = float(grad @ Qg)
        if not den > 0:
            termination = Termination.ZERO_CURVATURE
            break
        alpha = gsq / den
        trace.append(IterRecord(k, f, gsq, problem.n, elapsed, alpha))
        x = x - alpha * grad
        grad = grad - alpha * Qg
    trace.append(IterRecord(k, f, gsq, problem.n, elapsed))
    return SolveResult(x=x, trace=trace, termination=termination, iterations=k, grad=grad)


def write_trace_csv(path, trace):
    """Write trace records with 17 significant digits; ``alpha`` is blank on the final row."""

    def fmt(v):
        return "" if v is None else format(v, ".17g")

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for r in trace:
            w.writerow(
                [r.k, fmt(r.elapsed * 1e3), fmt(r.f), fmt(r.grad_bar_sq), r.passive_count, fmt(r.alpha)]
            )
