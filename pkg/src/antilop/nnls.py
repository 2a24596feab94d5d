"""Non-negative least squares through a rescaled quadratic program.

``min 0.5||Ax - b||^2, x >= 0`` is rewritten with ``H = A'A`` and
``h = -A'b``, then each variable is rescaled by the length of its column,
``x_i = y_i / sqrt(H_ii)``. In the new variables the Hessian is the matrix of
column cosines, which has a unit diagonal and no badly scaled directions, and
the projected gradient solver in :mod:`antilop.nqp` converges quickly on it.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import as_matrix, as_vector, gram
from .nqp import IterRecord, NqpProblem, SolveResult, SolverConfig, Termination, solve_nqp

__all__ = ["ScaledSystem", "NnlsResult", "rescale", "unscale", "solve_nnls", "residual_sq"]


@dataclass(frozen=True)
class ScaledSystem:
    """Cosine-form problem plus what is needed to map solutions back.

    ``retained[j]`` is the original column of reduced variable ``j`` and
    ``scale[j]`` its length. Columns of zero length are listed in
    ``dropped``; their coefficients are fixed at zero.
    """

    Q: np.ndarray
    q: np.ndarray
    scale: np.ndarray
    retained: np.ndarray
    dropped: np.ndarray
    n: int

    @property
    def problem(self):
        return NqpProblem(self.Q, self.q)


@dataclass
class NnlsResult:
    x: np.ndarray
    residual_sq: float
    inner: SolveResult
    dropped: tuple = ()
    # the quadratic program ``inner`` was run on; KKT is certified against it
    problem: Optional[NqpProblem] = None

    @property
    def iterations(self):
        return self.inner.iterations

    @property
    def termination(self):
        return self.inner.termination

    def summary(self):
        return {
            "residual_sq": self.residual_sq,
            "iterations": self.inner.iterations,
            "termination": self.inner.termination.value,
            "dropped_columns": [int(i) for i in self.dropped],
        }


def rescale(H, h):
    """Turn ``(H, h)`` into ``Q_ij = H_ij / (D_i D_j)``, ``q_i = h_i / D_i`` with ``D = sqrt(diag H)``."""
    H = np.asarray(H, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = H.shape[0]
    if H.ndim != 2 or H.shape != (n, n):
        raise ValueError(f"H must be square, got {H.shape}")
    if h.shape != (n,):
        raise ValueError(f"h has shape {h.shape}, expected ({n},)")
    diag = np.diag(H)
    if np.any(diag < 0):
        raise ValueError("H has a negative diagonal entry; not a Gram matrix")

    retained = np.flatnonzero(diag > 0)
    dropped = np.flatnonzero(diag == 0)
    D = np.sqrt(diag[retained])
    Q = H[np.ix_(retained, retained)] / np.outer(D, D)
    # cosines: the diagonal is 1 by definition, off-diagonals bounded by 1
    np.fill_diagonal(Q, 1.0)
    np.clip(Q, -1.0, 1.0, out=Q)
    Q = np.asfortranarray(np.triu(Q) + np.triu(Q, 1).T)
    q = h[retained] / D
    return ScaledSystem(Q=Q, q=q, scale=D, retained=retained, dropped=dropped, n=n)


def unscale(y, system, n=None):
    """Map a reduced-space solution back to the original ``n`` coefficients."""
    n = system.n if n is None else n
    y = np.asarray(y, dtype=np.float64)
    if y.shape != system.retained.shape:
        raise ValueError(f"y has length {y.shape[0]}, expected {system.retained.size}")
    x = np.zeros(n)
    x[system.retained] = y / system.scale
    return x


def residual_sq(A, b, x):
    r = A @ x - b
    return float(r @ r)


def empty_result():
    # every column has zero length: the origin is the only sensible answer
    trace = [IterRecord(0, 0.0, 0.0, 0, 0.0)]
    return SolveResult(np.zeros(0), trace, Termination.EMPTY_PASSIVE_SET, 0, np.zeros(0))


def solve_nnls(A, b, config: Optional[SolverConfig] = None) -> NnlsResult:
    """Solve ``min 0.5||Ax - b||^2`` over ``x >= 0`` with the anti-lopsided method.

    >>> import numpy as np
    >>> solve_nnls(np.eye(2), np.array([3.0, -1.0])).x
    array([3., 0.])
    """
    A = as_matrix(A, name="A")
    b = as_vector(b, name="b")
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
    n = A.shape[1]
    system = rescale(gram(A), -(A.T @ b))
    problem = None
    if system.retained.size:
        problem = system.problem
        inner = solve_nqp(problem, config)
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
