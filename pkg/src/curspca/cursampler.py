"""Leverage-score column sampling (randomized CUR, column side only)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, ParameterError
from .matcore import as_index_set, as_matrix, column_projection_error, truncated_svd

WITH_REPLACEMENT = "with_replacement"
DISTINCT = "distinct"
MODES = (WITH_REPLACEMENT, DISTINCT)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64-backed generator; the only randomness source in the package."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class LeverageScores:
    scores: np.ndarray
    k: int


@dataclass(frozen=True)
class CurResult:
    selected: np.ndarray
    error: float
    scores: LeverageScores
    seed: int
    draws: int


def leverage_scores(v_k, tol: float = 1e-8) -> LeverageScores:
    """Normalized leverage scores ``||row_i(V_k)||^2 / k``.

    ``v_k`` must have orthonormal columns to within ``tol`` (max-abs entry of
    ``V^T V - I``), which is what makes the scores sum to one.
    """
    v = as_matrix(v_k, "v_k")
    k = v.shape[1]
    dev = np.abs(v.T @ v - np.eye(k)).max()
    if dev > tol:
        raise ParameterError(
            f"v_k columns are not orthonormal: max|V^T V - I| = {dev:.3e} exceeds tolerance {tol:g}"
        )
    scores = np.einsum("ij,ij->i", v, v) / k
    return LeverageScores(scores, k)


def _categorical(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    # side="right" never lands on a zero-probability index
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def sample_columns(scores, c: int, mode: str = WITH_REPLACEMENT, seed: int = 0):
    """Draw ``c`` columns with probabilities ``scores``.

    ``with_replacement`` makes ``c`` i.i.d. draws and collapses repeats, so
    fewer than ``c`` distinct columns may come back. ``distinct`` keeps
    drawing, skipping columns already taken, until exactly ``c`` are held;
    it is realized as sequential draws from the renormalized remaining mass,
    which has the same law as rejecting repeats.

    Returns ``(indices, draws)``.
    """
    probs = np.asarray(scores.scores if isinstance(scores, LeverageScores) else scores, dtype=np.float64)
    p = probs.size
    if mode not in MODES:
        raise ParameterError(f"unknown sampling mode {mode!r}; expected one of {MODES}")
    if not 1 <= c <= p:
        raise ParameterError(f"c={c} must satisfy 1 <= c <= p = {p}")
    if np.any(probs < 0) or probs.sum() <= 0:
        raise ParameterError("scores must be nonnegative with positive total")
    rng = make_rng(seed)

    if mode == WITH_REPLACEMENT:
        cdf = np.cumsum(probs)
        cdf /= cdf[-1]
        draws = _categorical(cdf, rng.random(c))
        return as_index_set(draws, p), c

    nonzero = int(np.count_nonzero(probs))
    if nonzero < c:
        raise InfeasibleError(f"distinct mode needs c={c} columns but only {nonzero} have nonzero score")
    remaining = probs.copy()
    chosen = []
    for u in rng.random(c):
        cdf = np.cumsum(remaining)
        j = int(_categorical(cdf / cdf[-1], u))
        chosen.append(j)
        remaining[j] = 0.0
    return as_index_set(chosen, p), c


def cur_decompose(x, k: int, c: int, mode: str = WITH_REPLACEMENT, seed: int = 0) -> CurResult:
    """Leverage-score column selection followed by the column-projection error."""
    x = as_matrix(x, "x")
    p = x.shape[1]
    if not 1 <= c <= p:
        raise ParameterError(f"c={c} must satisfy 1 <= c <= p = {p}")
    svd = truncated_svd(x, k)
    lev = leverage_scores(svd.v)
    selected, draws = sample_columns(lev, c, mode, seed)
    return CurResult(selected, column_projection_error(x, selected), lev, seed, draws)
