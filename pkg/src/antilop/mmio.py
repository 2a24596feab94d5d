"""Matrix and vector files: MatrixMarket array format, with a CSV fallback.

MatrixMarket files are read and written through :mod:`scipy.io`. Values are
written with 17 significant digits so a write/read round trip is exact.
"""

import os

import numpy as np
import scipy.io

from .linalg import as_matrix, as_vector

__all__ = ["read_matrix", "write_matrix", "read_vector", "write_vector"]

MM_PRECISION = 17


def _is_csv(path):
    return os.fspath(path).lower().endswith(".csv")


def read_matrix(path):
    """Load a dense matrix from ``.mtx`` (array format) or ``.csv``."""
    if _is_csv(path):
        M = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    else:
        M = scipy.io.mmread(path)
        if hasattr(M, "toarray"):
            M = M.toarray()
    return as_matrix(M, name=os.fspath(path))


def write_matrix(path, M, comment=""):
    """Write a dense matrix; the format follows the file extension."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {M.shape}")
    if _is_csv(path):
        np.savetxt(path, M, delimiter=",", fmt="%.17g")
    else:
        scipy.io.mmwrite(path, M, comment=comment, precision=MM_PRECISION)


def read_vector(path):
    """Load a vector stored as a single column (or a single row)."""
    if _is_csv(path):
        v = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=1)
    else:
        v = np.asarray(scipy.io.mmread(path))
    return as_vector(np.ravel(v), name=os.fspath(path))


def write_vector(path, v, comment=""):
    v = np.asarray(v, dtype=np.float64).ravel()
    if _is_csv(path):
        np.savetxt(path, v, delimiter=",", fmt="%.17g")
    else:
        write_matrix(path, v[:, None], comment=comment)
