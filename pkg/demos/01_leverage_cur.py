"""
Leverage scores and column selection
====================================

Sample columns in proportion to their leverage on the top-k right singular
subspace and compare the residual with the best rank-k approximation.
"""
import numpy as np

from curspca import column_projection_error, cur_decompose, leverage_scores, truncated_svd

rng = np.random.default_rng(0)

# two rank-5 pieces plus a little noise; the second lives on columns 0..9 and dominates
n, p, k = 60, 40, 5
x = rng.standard_normal((n, k)) @ rng.standard_normal((k, p)) * 0.2
x[:, :10] += rng.standard_normal((n, k)) @ rng.standard_normal((k, 10)) * 3
x += 0.01 * rng.standard_normal((n, p))

scores = leverage_scores(truncated_svd(x, k).v)
print("scores sum to", scores.scores.sum())
print("top-10 columns by leverage:", np.sort(np.argsort(-scores.scores)[:10]))

# rank-k optimum (Eckart-Young) as a floor for any column subset
s = np.linalg.svd(x, compute_uv=False)
floor = np.sqrt(np.sum(s[k:] ** 2))
print(f"best rank-{k} error: {floor:.4f}")

for c in (5, 10, 20):
    errs = [cur_decompose(x, k, c, "distinct", seed).error for seed in range(20)]
    print(f"c={c:2d}  CUR error mean {np.mean(errs):.4f}  worst {np.max(errs):.4f}")

# uniform sampling for contrast
uni = [column_projection_error(x, rng.choice(p, 10, replace=False)) for _ in range(20)]
print(f"uniform c=10 mean {np.mean(uni):.4f}")
