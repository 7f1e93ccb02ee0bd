"""Synthetic signal-plus-noise benchmarks and the metrics used to score them.

Three signal families are generated, each observed as ``X = Xhat + E`` with
standard normal noise ``E``:

* Case I   -- ``Xhat`` has ``c`` nonzero (Gaussian) columns, the rest zero.
* Case II  -- ``Xhat = amp * U V^T`` with ``V`` row-sparse (``c`` shared rows).
* Case III -- ``Xhat = amp * U V^T`` with each column of ``V`` supported on its
  own disjoint set of ``c`` rows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cursampler import DISTINCT, cur_decompose, make_rng
from .errors import ParameterError
from .glsolver import GlConfig, REG, SPCA, glspca_solve, tune_lambda1
from .matcore import column_residual, as_index_set, as_matrix, projector_onto_columns

log = logging.getLogger(__name__)

CASES = ("I", "II", "III")
METHODS = ("cur", "glreg", "spca_oracle", "glpca")


@dataclass(frozen=True)
class SignalSpec:
    case: str
    n: int = 100
    p: int = 1000
    k: int = 10
    c: int = 200
    amplitude: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.case not in CASES:
            raise ParameterError(f"case must be one of {CASES}, got {self.case!r}")
        if self.n < 1 or self.p < 1:
            raise ParameterError("n and p must be positive")
        if not 0 <= self.c <= self.p:
            raise ParameterError(f"c={self.c} must lie in [0, p={self.p}]")
        if self.amplitude is not None and not self.amplitude > 0:
            raise ParameterError("amplitude must be > 0")
        if self.case != "I":
            if not 1 <= self.k < self.p or self.k > self.n:
                raise ParameterError(f"k={self.k} must satisfy 1 <= k < p and k <= n")
            if self.case == "II" and self.c < self.k:
                raise ParameterError(f"Case II needs c >= k to hold {self.k} orthonormal columns, got c={self.c}")
            if self.case == "III" and (self.c < 1 or self.c * self.k > self.p):
                raise ParameterError(
                    f"Case III needs k disjoint supports of size c: c*k = {self.c * self.k} exceeds p = {self.p}"
                )

    @classmethod
    def from_sparsity(cls, case, n, p, k, sparsity, **kw) -> "SignalSpec":
        """Build a spec where a fraction ``sparsity`` of the target entries is zero."""
        if not 0 <= sparsity <= 1:
            raise ParameterError(f"sparsity must lie in [0, 1], got {sparsity}")
        return cls(case, n=n, p=p, k=k, c=int(round((1 - sparsity) * p)), **kw)

    def noise_scale(self) -> float:
        # expected spectral norm of an n x p standard Gaussian matrix
        return math.sqrt(self.n) + math.sqrt(self.p)


@dataclass
class Dataset:
    """``true_zero_mask`` is over columns of ``xhat`` (Case I) or entries of ``v``."""

    x: np.ndarray
    xhat: np.ndarray
    true_zero_mask: np.ndarray
    spec: SignalSpec
    amplitude: float
    v: np.ndarray | None = None

    def factor_zero_mask(self, k: int | None = None) -> np.ndarray:
        """True zero pattern laid out as a ``p x k`` factor."""
        if self.true_zero_mask.ndim == 2:
            return self.true_zero_mask
        k = k or self.spec.k
        return np.repeat(self.true_zero_mask[:, None], k, axis=1)

    def column_zero_mask(self) -> np.ndarray:
        """Columns of X that carry no signal."""
        return row_zero_mask(self.true_zero_mask)


def _orthonormal(rng, rows, cols):
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.sign(np.diag(r))


def generate(spec: SignalSpec) -> Dataset:
    n, p, k, c = spec.n, spec.p, spec.k, spec.c
    rng = make_rng(spec.seed)
    xhat = np.zeros((n, p))
    v = None
    if spec.case == "I":
        block = rng.standard_normal((n, c))
        amp = spec.amplitude
        if amp is None:
            smin = np.linalg.svd(block, compute_uv=False).min() if c else 1.0
            amp = 3.0 * spec.noise_scale() / smin
        xhat[:, p - c:] = amp * block
        mask = np.ones(p, dtype=bool)
        mask[p - c:] = False
    else:
        amp = spec.amplitude if spec.amplitude is not None else 3.0 * spec.noise_scale()
        u = _orthonormal(rng, n, k)
        v = np.zeros((p, k))
        if spec.case == "II":
            rows = np.sort(rng.choice(p, size=c, replace=False))
            v[rows] = _orthonormal(rng, c, k)
        else:
            perm = rng.permutation(p)
            for j in range(k):
                rows = perm[j * c:(j + 1) * c]
                vals = rng.standard_normal(c)
                v[rows, j] = vals / np.linalg.norm(vals)
        xhat = amp * (u @ v.T)
        mask = v == 0
    x = xhat + rng.standard_normal((n, p))
    return Dataset(x, xhat, mask, spec, float(amp), v)


def err_reg(xhat, x, i) -> float:
    """``||Xhat - X^I X^{I+} X||_F``."""
    x = as_matrix(x, "x")
    xhat = as_matrix(xhat, "xhat")
    if xhat.shape != x.shape:
        raise ParameterError(f"xhat {xhat.shape} and x {x.shape} differ in shape")
    idx = as_index_set(i, x.shape[1])
    fitted = x - column_residual(x, idx)
    return float(np.linalg.norm(xhat - fitted, "fro"))


def err_pca(xhat, x, v) -> float:
    """``||Xhat - X V V^+||_F``; ``v`` need not be orthogonal."""
    x = as_matrix(x, "x")
    xhat = as_matrix(xhat, "xhat")
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != x.shape[1]:
        raise ParameterError(f"v must have {x.shape[1]} rows, got shape {v.shape}")
    return float(np.linalg.norm(xhat - x @ projector_onto_columns(v), "fro"))


def precision_zeros(estimated_mask, true_mask):
    """Fraction of estimated zeros that are truly zero; ``None`` if nothing was estimated zero."""
    est = np.asarray(estimated_mask, dtype=bool)
    true = np.asarray(true_mask, dtype=bool)
    if est.shape != true.shape:
        raise ParameterError(f"mask shapes differ: {est.shape} vs {true.shape}")
    n_est = int(est.sum())
    if n_est == 0:
        return None
    return int((est & true).sum()) / n_est


def recall_zeros(estimated_mask, true_mask):
    """Fraction of true zeros that were estimated zero; ``None`` if there are none."""
    return precision_zeros(true_mask, estimated_mask)


def row_zero_mask(mask) -> np.ndarray:
    """Collapse a ``p x k`` zero mask to rows that are zero throughout."""
    mask = np.asarray(mask, dtype=bool)
    return mask.all(axis=1) if mask.ndim == 2 else mask


def unselected_mask(selected, p: int) -> np.ndarray:
    """Columns outside ``selected``; the estimated zero pattern of a column subset."""
    mask = np.ones(p, dtype=bool)
    mask[as_index_set(selected, p)] = False
    return mask


@dataclass
class MetricsReport:
    method: str
    seed: int
    err_reg: float | None = None
    err_pca: float | None = None
    precision: float | None = None
    recall: float | None = None
    precision_elementwise: float | None = None
    active_count: int | None = None
    tuning: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrialSummary:
    spec: SignalSpec
    method: str
    reports: list
    failures: list
    mean: dict
    std: dict


def target_nonzero_rows(data: Dataset, k: int | None = None) -> int:
    """Row count whose complement reproduces the true number of zero factor entries."""
    zmask = data.factor_zero_mask(k)
    return data.spec.p - int(round(zmask.sum() / zmask.shape[1]))


def _column_metrics(data: Dataset, selected, report: MetricsReport):
    p = data.spec.p
    est = unselected_mask(selected, p)
    report.err_reg = err_reg(data.xhat, data.x, selected)
    report.precision = precision_zeros(est, data.column_zero_mask())
    report.recall = recall_zeros(est, data.column_zero_mask())
    fz = data.factor_zero_mask()
    report.precision_elementwise = precision_zeros(np.repeat(est[:, None], fz.shape[1], axis=1), fz)
    report.active_count = int(p - est.sum())


def _factor_metrics(data: Dataset, w, report: MetricsReport):
    est = w == 0
    true = data.factor_zero_mask(w.shape[1])
    report.err_pca = err_pca(data.xhat, data.x, w)
    report.precision = precision_zeros(est, true)
    report.recall = recall_zeros(est, true)
    report.precision_elementwise = report.precision
    report.active_count = int(np.count_nonzero(np.any(w != 0, axis=1)))


def truncate_entries(w, keep: int) -> np.ndarray:
    """Zero all but the ``keep`` largest-magnitude entries (ties broken by position)."""
    w = np.asarray(w, dtype=np.float64)
    flat = np.abs(w).ravel()
    out = np.zeros_like(w)
    if keep <= 0:
        return out
    top = np.argsort(-flat, kind="stable")[:keep]
    out.ravel()[top] = w.ravel()[top]
    return out


def default_ridge(x) -> float:
    """Ridge weight on the data's own scale: the top eigenvalue of ``X^T X``."""
    return float(np.linalg.norm(x, 2) ** 2)


def run_method(data: Dataset, method: str, tuning: dict | None = None, seed: int | None = None) -> MetricsReport:
    """Fit one method on one dataset, tuned to the dataset's true zero count."""
    tuning = dict(tuning or {})
    spec = data.spec
    seed = spec.seed if seed is None else seed
    k = tuning.get("k", spec.k)
    report = MetricsReport(method=method, seed=seed)
    target = tuning.get("target_rows", target_nonzero_rows(data, k))

    if method == "cur":
        cols = tuning.get("cols", target)
        mode = tuning.get("mode", DISTINCT)
        res = cur_decompose(data.x, k, cols, mode, seed)
        _column_metrics(data, res.selected, report)
        report.tuning = {"cols": cols, "mode": mode, "k": k, "draws": res.draws}
    elif method == "glreg":
        cfg = GlConfig(lam=tuning.get("lam", 0.0), tol=tuning.get("tol", 1e-7),
                       max_iter=tuning.get("max_iter", 500))
        tr = tune_lambda1(data.x, cfg, target, REG, max_probes=tuning.get("max_probes", 40))
        _column_metrics(data, tr.solution.active_rows, report)
        report.tuning = {"lam1": tr.lam1, "target_rows": target, "gap": tr.gap, "probes": len(tr.probes),
                         "converged": tr.solution.converged}
    elif method in ("glpca", "spca_oracle"):
        lam = tuning.get("lam")
        if lam is None:
            lam = default_ridge(data.x)
        cfg = GlConfig(lam=lam, k=k, tol=tuning.get("tol", 1e-7), max_iter=tuning.get("max_iter", 500))
        if method == "glpca":
            tr = tune_lambda1(data.x, cfg, target, SPCA, max_probes=tuning.get("max_probes", 40))
            _factor_metrics(data, tr.solution.w, report)
            report.tuning = {"lam": lam, "lam1": tr.lam1, "target_rows": target, "gap": tr.gap,
                             "probes": len(tr.probes), "converged": tr.solution.converged}
        else:
            # ridge PCA (lam1 = 0) is dense; its zero pattern is read off by
            # keeping the largest entries up to the true nonzero count
            sol = glspca_solve(data.x, cfg)
            zmask = data.factor_zero_mask(k)
            keep = int(zmask.size - zmask.sum())
            sparse_w = truncate_entries(sol.w, keep)
            _factor_metrics(data, sparse_w, report)
            report.err_pca = err_pca(data.xhat, data.x, sol.w)
            report.tuning = {"lam": lam, "lam1": 0.0, "kept_entries": keep,
                             "err_pca_truncated": err_pca(data.xhat, data.x, sparse_w),
                             "converged": sol.converged}
    else:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    return report


def _aggregate(reports):
    keys = ("err_reg", "err_pca", "precision", "recall", "precision_elementwise", "active_count")
    mean, std = {}, {}
    for key in keys:
        vals = [getattr(r, key) for r in reports if getattr(r, key) is not None]
        if vals:
            mean[key] = float(np.mean(vals))
            std[key] = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        else:
            mean[key] = std[key] = None
    return mean, std


def run_trials(spec: SignalSpec, method: str, trials: int = 5, tuning: dict | None = None) -> TrialSummary:
    """Repeat ``run_method`` on fresh datasets seeded ``spec.seed + t``.

    A trial that raises is logged and recorded in ``failures``; the rest of
    the batch still runs.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    reports, failures = [], []
    for t in range(trials):
        seed = spec.seed + t
        trial_spec = SignalSpec(spec.case, spec.n, spec.p, spec.k, spec.c, spec.amplitude, seed)
        try:
            reports.append(run_method(generate(trial_spec), method, tuning, seed))
        except (ValueError, ArithmeticError) as exc:
            log.warning("trial %d (seed %d) failed: %s", t, seed, exc)
            failures.append({"trial": t, "seed": seed, "error": str(exc)})
    mean, std = _aggregate(reports)
    return TrialSummary(spec, method, reports, failures, mean, std)
