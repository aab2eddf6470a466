"""Datasets: the synthetic grid generator, LIBSVM I/O and feature graphs."""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .linalg import SparseColumnMatrix

__all__ = [
    "Dataset",
    "gen_synthetic_grid",
    "read_libsvm",
    "write_libsvm",
    "build_edges_by_correlation",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled samples stored as the columns of ``Z`` (p x n)."""

    Z: SparseColumnMatrix
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.float64).ravel()
        if labels.size != self.Z.cols:
            raise ValueError(f"{labels.size} labels for {self.Z.cols} samples")
        if not np.all(np.abs(labels) == 1.0):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "labels", labels)

    @property
    def feature_dim(self):
        return self.Z.rows

    @property
    def sample_count(self):
        return self.Z.cols


def gen_synthetic_grid(grid_rows, grid_cols, n, noise_sd=0.1, rng=None, true_weights=None):
    """Gaussian features with a low-rank "first column" ground truth.

    Features are i.i.d. standard normal.  Unless ``true_weights`` is given,
    the weight image (``grid_rows x grid_cols``, flattened row-major) has a
    standard-normal first column and zeros elsewhere.  Labels are
    ``sign(z^T w0 + noise)`` with ``sign(0) = +1``.

    Returns
    -------
    data : Dataset
    w0 : ndarray of shape (grid_rows * grid_cols,)
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(rng)
    p = grid_rows * grid_cols
    if true_weights is None:
        W = np.zeros((grid_rows, grid_cols))
        W[:, 0] = rng.standard_normal(grid_rows)
        w0 = W.ravel()
    else:
        w0 = np.asarray(true_weights, dtype=np.float64)
        if w0.shape != (p,):
            raise ValueError(f"true_weights must have length {p}")
    Z = rng.standard_normal((p, n))
    score = Z.T @ w0 + noise_sd * rng.standard_normal(n)
    labels = np.where(score >= 0, 1.0, -1.0)
    return Dataset(SparseColumnMatrix(Z), labels), w0


def _map_labels(raw, path):
    values = set(np.unique(raw).tolist())
    if values <= {-1.0, 1.0}:
        return raw
    if values <= {0.0, 1.0}:
        return np.where(raw > 0, 1.0, -1.0)
    if values <= {1.0, 2.0}:
        return np.where(raw > 1, 1.0, -1.0)
    raise ValueError(
        f"{path}: labels {sorted(values)} are not binary in a supported "
        "encoding ({-1,+1}, {0,1} or {1,2})"
    )


def read_libsvm(path, n_features=None):
    """Read a LIBSVM/svmlight file into a :class:`Dataset`.

    Lines look like ``label idx:val idx:val ...`` with 1-based feature
    indices; ``#`` starts a comment.  Labels in {0, 1} map 0 -> -1 and labels
    in {1, 2} map 1 -> -1, 2 -> +1.  The feature dimension is the largest
    index seen unless ``n_features`` is given.
    """
    labels, rows, cols, vals = [], [], [], []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad label {tokens[0]!r}") from None
            j = len(labels)
            last = 0
            for tok in tokens[1:]:
                idx, sep, val = tok.partition(":")
                try:
                    if not sep:
                        raise ValueError
                    idx = int(idx)
                    val = float(val)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: malformed feature {tok!r}") from None
                if idx < 1:
                    raise ValueError(f"{path}:{lineno}: feature index {idx} is not 1-based")
                if idx <= last:
                    raise ValueError(f"{path}:{lineno}: feature indices must increase")
                last = idx
                if val != 0.0:
                    rows.append(idx - 1)
                    cols.append(j)
                    vals.append(val)
            max_index = max(max_index, last)
            labels.append(label)
    if not labels:
        raise ValueError(f"{path}: no samples found")
    p = max_index if n_features is None else int(n_features)
    if p < max_index:
        raise ValueError(f"{path}: feature index {max_index} exceeds n_features={p}")
    Z = sparse.csc_matrix((vals, (rows, cols)), shape=(p, len(labels)))
    return Dataset(SparseColumnMatrix(Z), _map_labels(np.asarray(labels), path))


def write_libsvm(path, data):
    """Write a dataset in LIBSVM format (labels as +1/-1, 1-based indices)."""
    Z = data.Z
    with open(path, "w") as fh:
        for j in range(Z.cols):
            idx, val = Z.column(j)
            feats = " ".join(f"{i + 1}:{v!r}" for i, v in zip(idx.tolist(), val.tolist()))
            label = "+1" if data.labels[j] > 0 else "-1"
            fh.write(f"{label} {feats}\n" if feats else f"{label}\n")


def build_edges_by_correlation(data, threshold, max_edges=None):
    """Feature pairs whose sample correlation is at least ``threshold`` in magnitude.

    Edges come back as ``(i, j)`` with ``i < j``, strongest first, ties in
    lexicographic order, truncated to ``max_edges``.  Zero-variance features
    never get edges.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    X = data.Z.toarray()
    X = X - X.mean(axis=1, keepdims=True)
    sd = np.sqrt(np.sum(X * X, axis=1))
    const = sd == 0
    if np.any(const):
        warnings.warn(
            f"{int(const.sum())} zero-variance feature(s) excluded from the graph",
            RuntimeWarning,
            stacklevel=2,
        )
    keep = np.flatnonzero(~const)
    Xk = X[keep] / sd[keep, None]
    corr = np.clip(Xk @ Xk.T, -1.0, 1.0)
    ii, jj = np.triu_indices(keep.size, k=1)
    strength = np.abs(corr[ii, jj])
    hit = strength >= threshold
    i_sel, j_sel, s_sel = keep[ii[hit]], keep[jj[hit]], strength[hit]
    order = np.lexsort((j_sel, i_sel, -s_sel))
    edges = [(int(i_sel[o]), int(j_sel[o])) for o in order]
    if max_edges is not None:
        edges = edges[: int(max_edges)]
    return edges
