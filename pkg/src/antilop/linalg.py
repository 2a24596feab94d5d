"""Dense kernels shared by every solver: Gram products, masked products, norms.

Matrices are plain ``numpy.ndarray`` objects. The ``as_matrix`` and
``as_vector`` helpers validate shape and finiteness once at the boundary, so
the kernels themselves do no checking beyond dimensions.
"""

import numpy as np

__all__ = [
    "OpCounter",
    "as_matrix",
    "as_vector",
    "gram",
    "matvec",
    "masked_matvec",
    "frobenius_norm",
]


class OpCounter:
    """Tally of scalar multiplies performed by the instrumented kernels."""

    def __init__(self):
        self.multiplies = 0

    def add(self, count):
        self.multiplies += int(count)

    def reset(self):
        self.multiplies = 0

    def __repr__(self):
        return f"OpCounter(multiplies={self.multiplies})"


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2-D float64 array (column-major)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.asfortranarray(M)


def as_vector(v, name="vector"):
    """Return `v` as a finite 1-D float64 array."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def gram(A):
    """Gram matrix ``H = A^T A`` with exactly symmetric storage.

    The upper triangle is computed and mirrored onto the lower one, so
    ``H[i, j] == H[j, i]`` holds bitwise.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] < 1:
        raise ValueError(f"gram needs a 2-D matrix with >= 1 column, got {A.shape}")
    H = A.T @ A
    upper = np.triu(H)
    H = upper + np.triu(H, 1).T
    return np.asfortranarray(H)


def matvec(M, v):
    """Plain product ``M v``."""
    if M.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {M.shape} @ {v.shape}")
    return M @ v


def masked_matvec(M, v, mask, counter=None):
    """Product ``M v`` for a vector `v` supported on the column indices `mask`.

    Only the columns listed in `mask` are read, so the cost is
    ``rows * len(mask)`` multiplies. Entries of `v` outside `mask` are
    assumed to be zero and are ignored. A full mask falls through to
    :func:`matvec`, giving bit-identical results.
    """
    n = M.shape[1]
    if n != v.shape[0]:
        raise ValueError(f"dimension mismatch: {M.shape} @ {v.shape}")
    mask = np.asarray(mask, dtype=np.intp)
    if mask.size and (mask.min() < 0 or mask.max() >= n):
        raise IndexError(f"mask index out of range for {n} columns")
    if counter is not None:
        counter.add(M.shape[0] * mask.size)
    if mask.size == n:
        return matvec(M, v)
    if mask.size == 0:
        return np.zeros(M.shape[0])
    return M[:, mask] @ v[mask]


def frobenius_norm(M):
    """Entrywise 2-norm, ``sqrt(sum_ij M_ij^2)``."""
    return float(np.sqrt(np.sum(np.square(M))))
