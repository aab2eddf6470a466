"""Sparse column-major matrices and the few kernels the solver needs.

Samples are stored as columns (``Z = [z_1, ..., z_n]``), so selecting a
mini-batch is a column slice.  Storage is a :class:`scipy.sparse.csc_matrix`
kept in canonical form (sorted row indices, no explicit zeros).
"""
import warnings

import numpy as np
from scipy import sparse

__all__ = [
    "SparseColumnMatrix",
    "ConvergenceWarning",
    "matvec",
    "matvec_transpose",
    "select_columns",
    "spectral_norm_gram",
]


class ConvergenceWarning(UserWarning):
    """An iterative routine stopped at its iteration cap."""


class SparseColumnMatrix:
    """Immutable p x n matrix stored column by column.

    Parameters
    ----------
    data : array_like or scipy sparse matrix
        Anything :func:`scipy.sparse.csc_matrix` accepts.
    shape : tuple of int, optional
        Required when ``data`` is a ``(values, (rows, cols))`` triplet that
        does not touch the last row or column.
    """

    __slots__ = ("_csc",)

    def __init__(self, data, shape=None):
        csc = sparse.csc_matrix(data, shape=shape, dtype=np.float64, copy=True)
        csc.eliminate_zeros()
        csc.sum_duplicates()
        csc.sort_indices()
        if not np.all(np.isfinite(csc.data)):
            raise ValueError("matrix entries must be finite")
        self._csc = csc

    @classmethod
    def from_dense(cls, array):
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 1:
            array = array[:, None]
        return cls(array)

    @classmethod
    def from_columns(cls, rows, columns):
        """Build from per-column ``[(row, value), ...]`` lists."""
        data, indices, indptr = [], [], [0]
        for col in columns:
            for r, v in col:
                if not 0 <= r < rows:
                    raise ValueError(f"row index {r} out of range for {rows} rows")
                indices.append(r)
                data.append(v)
            indptr.append(len(indices))
        shape = (rows, len(columns))
        return cls(sparse.csc_matrix((data, indices, indptr), shape=shape))

    @classmethod
    def identity(cls, n):
        return cls(sparse.identity(n, format="csc"))

    @property
    def csc(self):
        """The underlying canonical CSC matrix (treat as read-only)."""
        return self._csc

    @property
    def shape(self):
        return self._csc.shape

    @property
    def rows(self):
        return self._csc.shape[0]

    @property
    def cols(self):
        return self._csc.shape[1]

    @property
    def nnz(self):
        return self._csc.nnz

    def column(self, j):
        """Return ``(row_indices, values)`` of column ``j``."""
        start, stop = self._csc.indptr[j], self._csc.indptr[j + 1]
        return self._csc.indices[start:stop].copy(), self._csc.data[start:stop].copy()

    def toarray(self):
        return self._csc.toarray()

    def scaled(self, c):
        return SparseColumnMatrix(self._csc * float(c))

    def __repr__(self):
        return f"SparseColumnMatrix(shape={self.shape}, nnz={self.nnz})"


def _as_vector(v, dim, name):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != dim:
        raise ValueError(f"{name}: expected vector of length {dim}, got shape {v.shape}")
    return v


def matvec(M, v):
    """Return ``M @ v``."""
    v = _as_vector(v, M.cols, "matvec")
    return M.csc @ v


def matvec_transpose(M, v):
    """Return ``M.T @ v``."""
    v = _as_vector(v, M.rows, "matvec_transpose")
    return M.csc.T @ v


def select_columns(M, idx):
    """Return the sub-matrix made of columns ``idx``, in that order."""
    idx = np.asarray(idx, dtype=np.intp).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= M.cols):
        raise IndexError(f"column index out of range for {M.cols} columns")
    if np.unique(idx).size != idx.size:
        raise ValueError("column indices must be distinct")
    return SparseColumnMatrix(M.csc[:, idx])


def spectral_norm_gram(M, tol=1e-12, max_iter=10000, seed=0, return_converged=False):
    """Largest eigenvalue of ``M.T @ M`` by power iteration.

    Iterates ``v <- M.T (M v)`` from a seeded Gaussian start and stops once
    two successive Rayleigh quotients agree to ``tol`` relatively.

    Parameters
    ----------
    M : SparseColumnMatrix
    tol : float
        Relative tolerance on the Rayleigh quotient.
    max_iter : int
    seed : int
        Seed of the starting vector.
    return_converged : bool
        Also return a flag telling whether ``tol`` was met.

    Returns
    -------
    sigma : float
        Estimate of ``sigma_max(M.T M)``, i.e. the squared spectral norm of M.
    converged : bool
        Only when ``return_converged`` is true.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if M.rows == 0 or M.cols == 0:
        raise ValueError("spectral_norm_gram needs a nonempty matrix")
    A = M.csc
    v = np.random.default_rng(seed).standard_normal(M.cols)
    v /= np.linalg.norm(v)
    prev = None
    converged = False
    for _ in range(max_iter):
        Mv = A @ v
        rq = float(Mv @ Mv)
        if rq == 0.0:
            # v landed in the null space; only possible for M == 0 with
            # probability one
            converged = True
            break
        if prev is not None and abs(rq - prev) <= tol * rq:
            converged = True
            break
        prev = rq
        u = A.T @ Mv
        v = u / np.linalg.norm(u)
    if not converged:
        warnings.warn(
            f"power iteration did not reach tol={tol} in {max_iter} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    if return_converged:
        return rq, converged
    return rq
