"""Row-grouped lasso solvers: GL-SPCA (alternating) and GL-REG (self-regression).

Both problems share one W-step. With ``A`` held fixed (orthonormal columns)

    ||X - X W A^T||_F^2 + lam ||W||_F^2 + lam1 * sum_i ||W_(i)||_2

is minimized one row at a time in closed form. GL-SPCA alternates that with an
orthogonal Procrustes update of ``A``; GL-REG fixes ``A = I``.

Internally the Gram matrix is carried as a square root ``Z`` with
``Z^T Z = X^T X`` and ``min(n, p)`` rows, so a row update costs
``O(min(n, p) * k)`` rather than ``O(p * k)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, ParameterError
from .matcore import RCOND, as_matrix, truncated_svd

SPCA = "spca"
REG = "reg"


@dataclass(frozen=True)
class GlConfig:
    """Solver settings.

    ``lam`` is the ridge weight and ``lam1`` the row-group weight. ``tol`` is
    the relative objective change that ends the outer loop. If ``kkt_tol`` is
    given, the loop also waits until the stationarity residual drops below it.
    ``k`` is the number of components (GL-SPCA only).
    """

    lam: float = 0.0
    lam1: float = 0.0
    k: int | None = None
    tol: float = 1e-7
    max_iter: int = 500
    kkt_tol: float | None = None
    inner_max: int = 200

    def __post_init__(self):
        if not (self.lam >= 0 and np.isfinite(self.lam)):
            raise ParameterError(f"lam must be finite and >= 0, got {self.lam}")
        if not (self.lam1 >= 0 and np.isfinite(self.lam1)):
            raise ParameterError(f"lam1 must be finite and >= 0, got {self.lam1}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.k is not None and self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.kkt_tol is not None and not self.kkt_tol > 0:
            raise ParameterError(f"kkt_tol must be > 0, got {self.kkt_tol}")

    def replace(self, **changes) -> "GlConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class FactorPair:
    a: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        w = np.asarray(self.w, dtype=np.float64)
        if a.shape != w.shape or a.ndim != 2:
            raise ParameterError(f"a and w must be p x k with equal shapes, got {a.shape} and {w.shape}")
        dev = np.abs(a.T @ a - np.eye(a.shape[1])).max()
        if dev > 1e-8:
            raise ParameterError(f"a must have orthonormal columns (max|A^T A - I| = {dev:.3e})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "w", w)


@dataclass
class GlSolution:
    factors: FactorPair
    active_rows: np.ndarray
    objective_trace: list[float]
    iterations: int
    converged: bool
    kkt_residual: float
    lam: float
    lam1: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def w(self) -> np.ndarray:
        return self.factors.w

    @property
    def a(self) -> np.ndarray:
        return self.factors.a

    @property
    def active_count(self) -> int:
        return int(self.active_rows.size)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def block_update(g_i, col_normsq: float, lam: float, lam1: float) -> np.ndarray:
    """Exact minimizer of the objective over a single row of W.

    ``g_i`` is ``A^T X^T x_i - b_i`` where ``b_i`` collects the contribution
    of all other rows. The row is zero when ``||g_i|| <= lam1 / 2``; otherwise
    it points along ``g_i`` with norm ``(||g_i|| - lam1/2) / (col_normsq + lam)``.
    """
    g_i = np.asarray(g_i, dtype=np.float64)
    denom = col_normsq + lam
    if not denom > 0:
        raise DegenerateError("row update undefined: ||x_i||^2 + lam == 0")
    norm = float(np.linalg.norm(g_i))
    half = 0.5 * lam1
    if norm <= half:
        return np.zeros_like(g_i)
    return g_i * ((norm - half) / (denom * norm))


def polar_factor(m) -> tuple[np.ndarray, int]:
    """Orthogonal factor ``U V^T`` of ``m = U D V^T`` and the numerical rank of ``m``."""
    m = np.asarray(m, dtype=np.float64)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise DegenerateError("orthogonal factor of a zero matrix is undefined")
    rank = int(np.count_nonzero(s > RCOND * s[0]))
    return u @ vt, rank


def procrustes_step(m) -> np.ndarray:
    """Maximizer of ``trace(A^T m)`` over ``A`` with orthonormal columns.

    For rank-deficient ``m`` the maximizer is not unique; one valid choice is
    returned and a RuntimeWarning is issued.
    """
    q, rank = polar_factor(m)
    if rank < q.shape[1]:
        warnings.warn(f"procrustes_step: input has rank {rank} < {q.shape[1]}; orthogonal factor not unique",
                      RuntimeWarning, stacklevel=2)
    return q


def gl_objective(x, a, w, lam: float, lam1: float) -> float:
    """``||X - X W A^T||_F^2 + lam ||W||_F^2 + lam1 * sum_i ||W_(i)||_2``."""
    x = as_matrix(x, "x")
    a = np.asarray(a, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if a.shape != w.shape or a.shape[0] != x.shape[1]:
        raise ParameterError(f"a and w must both be {x.shape[1]} x k, got {a.shape} and {w.shape}")
    fit = np.linalg.norm(x - (x @ w) @ a.T, "fro") ** 2
    return float(fit + lam * np.sum(w * w) + lam1 * np.linalg.norm(w, axis=1).sum())


def stationarity_residuals(x, a, w, lam: float, lam1: float) -> np.ndarray:
    """Per-row violation of the blockwise optimality conditions for W given A.

    Nonzero rows: ``||g_i - (||x_i||^2 + lam) W_i - (lam1/2) W_i/||W_i|| ||``.
    Zero rows: ``max(0, ||g_i|| - lam1/2)``.
    """
    x = as_matrix(x, "x")
    gram = x.T @ x
    return _residuals(gram @ np.asarray(a, dtype=np.float64), gram @ np.asarray(w, dtype=np.float64),
                      np.diag(gram), np.asarray(w, dtype=np.float64), lam, lam1)


def _residuals(c, gw, gdiag, w, lam, lam1):
    g = c - gw + gdiag[:, None] * w
    wn = np.linalg.norm(w, axis=1)
    gn = np.linalg.norm(g, axis=1)
    nz = wn > 0
    out = np.maximum(gn - 0.5 * lam1, 0.0)
    if np.any(nz):
        wz = w[nz]
        r = g[nz] - (gdiag[nz] + lam)[:, None] * wz - (0.5 * lam1 / wn[nz])[:, None] * wz
        out[nz] = np.linalg.norm(r, axis=1)
    return out


def _gram_root(x: np.ndarray) -> np.ndarray:
    n, p = x.shape
    if n <= p:
        return x.copy()
    return np.linalg.qr(x, mode="r")


class _Problem:
    """W-step state for a fixed data matrix; ``A`` may be swapped between sweeps."""

    def __init__(self, x, lam, lam1):
        self.z = _gram_root(x)
        self.zt = np.ascontiguousarray(self.z.T)
        self.gdiag = np.einsum("ij,ij->j", self.z, self.z)
        self.total = float(self.gdiag.sum())
        self.lam = lam
        self.lam1 = lam1
        self.degenerate = np.flatnonzero(self.gdiag + lam <= 0)

    def set_a(self, a):
        self.a = a
        self.za = self.z @ a
        self.c = self.zt @ self.za

    def objective(self, w, m):
        fit = self.total - np.sum(self.za * self.za) + np.sum((self.za - m) ** 2)
        return float(fit + self.lam * np.sum(w * w) + self.lam1 * np.linalg.norm(w, axis=1).sum())

    def sweep(self, w, m, rows):
        """One Gauss-Seidel pass over ``rows``; updates ``w`` and ``m = Z w`` in place."""
        zt, c, gd = self.zt, self.c, self.gdiag
        lam, half = self.lam, 0.5 * self.lam1
        for i in rows:
            denom = gd[i] + lam
            if denom <= 0:
                continue
            zi = zt[i]
            wi = w[i]
            g = c[i] - zi @ m + gd[i] * wi
            norm = np.sqrt(g @ g)
            if norm <= half:
                if wi.any():
                    m -= np.outer(zi, wi)
                    w[i] = 0.0
                continue
            new = g * ((norm - half) / (denom * norm))
            m += np.outer(zi, new - wi)
            w[i] = new

    def residuals(self, w, m):
        return _residuals(self.c, self.zt @ m, self.gdiag, w, self.lam, self.lam1)

    def w_step(self, w, m, tol, inner_max):
        """Full sweep, then sweeps over the active rows until they settle."""
        p = w.shape[0]
        self.sweep(w, m, range(p))
        sweeps = 1
        prev = self.objective(w, m)
        for _ in range(inner_max):
            active = np.flatnonzero(np.any(w != 0, axis=1))
            if active.size == 0:
                break
            self.sweep(w, m, active)
            sweeps += 1
            cur = self.objective(w, m)
            if prev - cur <= 0.1 * tol * max(abs(prev), 1e-300):
                break
            prev = cur
        return sweeps


def _run(prob: _Problem, a, w, config: GlConfig, update_a: bool) -> GlSolution:
    w = np.array(w, dtype=np.float64, copy=True)
    w[prob.degenerate] = 0.0
    m = prob.z @ w
    prob.set_a(a)
    trace = [prob.objective(w, m)]
    diag = {"rank_deficient_a_steps": 0, "degenerate_rows": prob.degenerate.tolist(), "sweeps": 0}
    converged = False
    it = 0
    kkt = float("inf")
    for it in range(1, config.max_iter + 1):
        if update_a and np.any(w):
            q, rank = polar_factor(prob.zt @ m)
            if rank < q.shape[1]:
                diag["rank_deficient_a_steps"] += 1
            prob.set_a(q)
        diag["sweeps"] += prob.w_step(w, m, config.tol, config.inner_max)
        # re-sync the running product to keep rounding from accumulating
        m = prob.z @ w
        trace.append(prob.objective(w, m))
        prev, cur = trace[-2], trace[-1]
        rel = abs(prev - cur) / max(abs(prev), 1e-300)
        if rel < config.tol:
            kkt = float(prob.residuals(w, m).max())
            if config.kkt_tol is None or kkt <= config.kkt_tol:
                converged = True
                break
    kkt = float(prob.residuals(w, m).max())
    active = np.flatnonzero(np.any(w != 0, axis=1))
    return GlSolution(
        factors=FactorPair(prob.a, w),
        active_rows=active,
        objective_trace=trace,
        iterations=it,
        converged=converged,
        kkt_residual=kkt,
        lam=prob.lam,
        lam1=prob.lam1,
        diagnostics=diag,
    )


def _check_x(x):
    return as_matrix(x, "x")


def glspca_solve(x, config: GlConfig, init: FactorPair | None = None) -> GlSolution:
    """Group-lasso sparse PCA by alternating Procrustes and row-wise W updates.

    Starts from ``A = W = V_k`` unless ``init`` is given. Each outer
    iteration sets ``A`` to the orthogonal factor of ``X^T X W`` and then
    minimizes over W for that ``A``; the returned W is therefore blockwise
    optimal for the returned A.
    """
    x = _check_x(x)
    n, p = x.shape
    k = config.k
    if k is None:
        k = init.w.shape[1] if init is not None else None
    if k is None or not 1 <= k <= min(n, p):
        raise ParameterError(f"rank k={k} must satisfy 1 <= k <= min(n, p) = {min(n, p)}")
    if init is None:
        v = truncated_svd(x, k).v
        init = FactorPair(v, v.copy())
    elif init.a.shape != (p, k):
        raise ParameterError(f"init factors must be {p} x {k}, got {init.a.shape}")
    prob = _Problem(x, config.lam, config.lam1)
    sol = _run(prob, init.a, init.w, config, update_a=True)
    sol.diagnostics["mode"] = SPCA
    return sol


def _row_space(x):
    _, s, vt = np.linalg.svd(x, full_matrices=False)
    r = int(np.count_nonzero(s > RCOND * s[0])) if s[0] > 0 else 0
    return vt[:max(r, 1)].T


def glreg_solve(x, config: GlConfig, init=None) -> GlSolution:
    """Group-lasso self-regression ``min ||X - X B||^2 + lam ||B||^2 + lam1 sum ||B_(i)||``.

    The right factor of ``B`` is confined to the row space of ``X`` (any
    component outside it only raises the objective), so the solve runs on
    ``B V_r`` with ``r = rank(X)`` and maps back with ``B = W V_r^T``.
    ``init`` is an optional p x p warm start; the default is ``B = 0``.
    The returned factors carry ``a = I_p`` and ``w = B``.
    """
    x = _check_x(x)
    p = x.shape[1]
    vr = _row_space(x)
    if init is None:
        w0 = np.zeros((p, vr.shape[1]))
    else:
        b0 = np.asarray(init.w if isinstance(init, FactorPair) else init, dtype=np.float64)
        if b0.shape != (p, p):
            raise ParameterError(f"init must be {p} x {p}, got {b0.shape}")
        w0 = b0 @ vr
    prob = _Problem(x, config.lam, config.lam1)
    sol = _run(prob, vr, w0, config, update_a=False)
    b = sol.factors.w @ vr.T
    sol.factors = FactorPair(np.eye(p), b)
    sol.active_rows = np.flatnonzero(np.any(b != 0, axis=1))
    sol.diagnostics["mode"] = REG
    sol.diagnostics["row_space_rank"] = vr.shape[1]
    return sol


def lambda1_max(x, a=None) -> float:
    """Smallest ``lam1`` for which ``W = 0`` is optimal given ``A``.

    ``2 * max_i ||A^T X^T x_i||``; ``a=None`` means ``A = I`` (GL-REG).
    """
    x = _check_x(x)
    gram = x.T @ x
    c = gram if a is None else gram @ np.asarray(a, dtype=np.float64)
    return float(2.0 * np.linalg.norm(c, axis=1).max())


class TuneResult(NamedTuple):
    lam1: float
    solution: GlSolution
    gap: int
    probes: list


def tune_lambda1(x, config: GlConfig, target_rows: int, mode: str = SPCA,
                 max_probes: int = 40, init=None) -> TuneResult:
    """Bisect ``lam1`` on ``[0, lam1_max]`` for ``target_rows`` nonzero rows.

    Each probe warm-starts from the previous probe's solution. Returns the
    probed ``lam1`` whose active-row count is closest to the target (ties go
    to the smaller ``lam1``), with ``gap = active - target`` and the full
    list of ``(lam1, active_count)`` probes.
    """
    x = _check_x(x)
    n, p = x.shape
    if mode not in (SPCA, REG):
        raise ParameterError(f"mode must be {SPCA!r} or {REG!r}, got {mode!r}")
    if not 0 <= target_rows <= p:
        raise ParameterError(f"target_rows={target_rows} must satisfy 0 <= c <= p = {p}")

    if mode == REG:
        solve = glreg_solve
        lmax = lambda1_max(x)
    else:
        solve = glspca_solve
        if init is None:
            if config.k is None:
                raise ParameterError("GL-SPCA tuning needs config.k")
            v = truncated_svd(x, config.k).v
            init = FactorPair(v, v.copy())
        lmax = lambda1_max(x, init.a)

    if target_rows == 0:
        lam1 = lmax * (1 + 1e-6)
        if mode == REG:
            sol = solve(x, config.replace(lam1=lam1))
        else:
            sol = solve(x, config.replace(lam1=lam1), FactorPair(init.a, np.zeros_like(init.a)))
        return TuneResult(lam1, sol, sol.active_count, [(lam1, sol.active_count)])

    probes = []
    best = None
    lo, hi = 0.0, lmax
    warm = init
    for j in range(max_probes):
        lam1 = 0.0 if (j == 0 and target_rows == p) else 0.5 * (lo + hi)
        sol = solve(x, config.replace(lam1=lam1), warm)
        count = sol.active_count
        probes.append((lam1, count))
        key = (abs(count - target_rows), lam1)
        if best is None or key < best[0]:
            best = (key, lam1, sol)
        if count == target_rows:
            break
        if count > target_rows:
            lo = lam1
        else:
            hi = lam1
        warm = sol.factors
    _, lam1, sol = best
    return TuneResult(lam1, sol, sol.active_count - target_rows, probes)
