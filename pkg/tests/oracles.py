"""Reference computations that share no code path with the solvers."""

import itertools

import numpy as np


def brute_force_nnls(A, b, tol=1e-9):
    """Exact NNLS by enumerating every passive set.

    Each candidate solves the normal equations on its passive set with a
    pseudo-inverse; the best candidate that is feasible and KKT-stationary
    wins. Returns ``(x, objective)`` with objective ``0.5||Ax - b||^2``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    H = A.T @ A
    Atb = A.T @ b
    scale = 1.0 + np.abs(Atb).max() + np.abs(H).max()
    best_x, best_f = np.zeros(n), 0.5 * float(b @ b)
    for size in range(1, n + 1):
        for P in itertools.combinations(range(n), size):
            P = list(P)
            x = np.zeros(n)
            x[P] = np.linalg.pinv(H[np.ix_(P, P)]) @ Atb[P]
            if np.any(x[P] < -tol * scale):
                continue
            x = np.maximum(x, 0.0)
            grad = H @ x - Atb
            if np.any(grad < -tol * scale):
                continue
            r = A @ x - b
            f = 0.5 * float(r @ r)
            if f < best_f:
                best_x, best_f = x, f
    return best_x, best_f


def solve_2x2(M, rhs):
    """Cramer's rule."""
    (a, b), (c, d) = M
    det = a * d - b * c
    return np.array([(rhs[0] * d - b * rhs[1]) / det, (a * rhs[1] - c * rhs[0]) / det])
