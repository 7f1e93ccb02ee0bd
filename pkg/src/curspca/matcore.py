"""Dense-matrix primitives shared by the samplers and solvers.

Matrices are plain 2-D ``float64`` numpy arrays; :func:`as_matrix` is the
single validation gate. Column index sets are sorted, duplicate-free integer
arrays produced by :func:`as_index_set`.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ParameterError

#: Relative singular-value cutoff used whenever a pseudoinverse is formed.
RCOND = 1e-12


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D float64 array or raise ParameterError."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf entries")
    return arr


def as_index_set(indices, p: int) -> np.ndarray:
    """Validate column indices against a universe of size ``p``.

    Returns a strictly increasing ``int64`` array. Duplicates are collapsed;
    out-of-range indices raise ParameterError.
    """
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= p):
        raise ParameterError(f"column indices must lie in [0, {p})")
    return np.unique(idx)


class SvdFactors(NamedTuple):
    """Top-k singular triple: ``x ≈ u @ diag(sigma) @ v.T``."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def frobenius_norm(m) -> float:
    m = as_matrix(m)
    return float(np.linalg.norm(m, "fro"))


def truncated_svd(m, k: int) -> SvdFactors:
    """Leading ``k`` singular values and vectors of ``m``.

    Singular vector signs are whatever LAPACK returns; callers must not rely
    on them.
    """
    m = as_matrix(m)
    n, p = m.shape
    if not 1 <= k <= min(n, p):
        raise ParameterError(f"rank k={k} must satisfy 1 <= k <= min(n, p) = {min(n, p)}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return SvdFactors(u[:, :k], s[:k], vt[:k].T)


def column_residual(x: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``X - X^I X^{I+} X`` via minimum-norm least squares (``idx`` pre-validated)."""
    if idx.size == 0:
        return x
    coef, *_ = np.linalg.lstsq(x[:, idx], x, rcond=RCOND)
    return x - x[:, idx] @ coef


def column_projection_error(x, i) -> float:
    """``||X - X^I X^{I+} X||_F``: residual after regressing X on columns ``i``.

    An empty ``i`` projects onto the zero subspace, giving ``||X||_F``.
    """
    x = as_matrix(x, "x")
    idx = as_index_set(i, x.shape[1])
    return float(np.linalg.norm(column_residual(x, idx), "fro"))


def projector_onto_columns(w) -> np.ndarray:
    """Orthogonal projector ``W W^+`` onto the column span of ``w``."""
    w = np.asarray(w, dtype=np.float64)
    if not np.any(w):
        return np.zeros((w.shape[0], w.shape[0]))
    return w @ np.linalg.pinv(w, rcond=RCOND)


def factor_projection_error(x, w) -> float:
    """``||X - X W W^+||_F`` for an arbitrary (not necessarily orthogonal) ``w``."""
    x = as_matrix(x, "x")
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != x.shape[1]:
        raise ParameterError(f"w must have {x.shape[1]} rows, got shape {w.shape}")
    return float(np.linalg.norm(x - x @ projector_onto_columns(w), "fro"))


def theorem3_gap(x, i, w) -> float:
    """Gap between the factor-projection and column-projection errors.

    ``w`` must vanish on every row outside ``i``. The gap is nonnegative and
    is zero only when ``span(X^I)`` is orthogonal to the span of the
    remaining columns.
    """
    x = as_matrix(x, "x")
    p = x.shape[1]
    idx = as_index_set(i, p)
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != p:
        raise ParameterError(f"w must have {p} rows, got shape {w.shape}")
    outside = np.ones(p, dtype=bool)
    outside[idx] = False
    if np.any(w[outside] != 0):
        bad = np.flatnonzero(np.any(w[outside] != 0, axis=1))
        raise ParameterError(
            f"w has nonzero rows outside the index set: {np.flatnonzero(outside)[bad][:5].tolist()}"
        )
    return factor_projection_error(x, w) - column_projection_error(x, idx)
