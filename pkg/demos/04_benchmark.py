"""
Synthetic benchmark at full size
================================

n = 100 samples, p = 1000 variables, rank 10, 80% zeros, five trials per
method. Takes about a minute.
"""
from curspca.synthbench import SignalSpec, run_trials

for case, methods in (("I", ("cur", "glreg")), ("II", ("cur", "glreg", "spca_oracle", "glpca"))):
    spec = SignalSpec.from_sparsity(case, 100, 1000, 10, 0.8, seed=7)
    for method in methods:
        s = run_trials(spec, method, trials=5)
        m, sd = s.mean, s.std
        key = "err_reg" if m["err_reg"] is not None else "err_pca"
        prec = m["precision_elementwise"]
        print(f"case {case:2s} {method:11s} {key}={m[key]:8.2f} ({sd[key]:.3f})"
              f"  precision={prec if prec is None else round(prec, 3)}")
