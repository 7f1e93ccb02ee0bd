"""
Group-lasso regression against CUR
==================================

Both methods pick a set of columns. GL-REG solves a convex problem tuned
to a target count; CUR is randomized, so it is repeated with several seeds.
"""
import numpy as np

from curspca import GlConfig, cur_decompose, tune_lambda1
from curspca.synthbench import SignalSpec, err_reg, generate, precision_zeros, unselected_mask

spec = SignalSpec("I", n=40, p=120, c=15, seed=3)
data = generate(spec)
truth = data.column_zero_mask()
print(f"{spec.p} columns, {spec.c} carry signal; amplitude {data.amplitude:.2f}")

tr = tune_lambda1(data.x, GlConfig(), spec.c, "reg")
sel = tr.solution.active_rows
print(f"GL-REG  lambda1={tr.lam1:.3f}  rows={sel.size}  probes={len(tr.probes)}")
print(f"        err_reg={err_reg(data.xhat, data.x, sel):.3f}  "
      f"precision={precision_zeros(unselected_mask(sel, spec.p), truth):.3f}")

for seed in range(3):
    res = cur_decompose(data.x, 10, spec.c, "distinct", seed)
    print(f"CUR s={seed} err_reg={err_reg(data.xhat, data.x, res.selected):.3f}  "
          f"precision={precision_zeros(unselected_mask(res.selected, spec.p), truth):.3f}")
