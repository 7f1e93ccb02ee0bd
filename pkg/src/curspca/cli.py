"""Command-line front end.

Subcommands: ``cur``, ``glreg``, ``glspca``, ``simulate``, ``eval``, ``curve``.
Matrices are CSV; reports are JSON on stdout (or ``--report``); factor files
go to ``--output-dir`` when given. Column indices are 0-based.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .cursampler import DISTINCT, MODES, WITH_REPLACEMENT, cur_decompose
from .errors import DegenerateError, InfeasibleError, ParameterError, ParseError
from .glsolver import REG, SPCA, GlConfig, glreg_solve, glspca_solve, tune_lambda1
from .synthbench import (
    CASES,
    METHODS,
    SignalSpec,
    err_pca,
    err_reg,
    generate,
    precision_zeros,
    row_zero_mask,
    run_trials,
    unselected_mask,
)

log = logging.getLogger("curspca")


class UsageError(Exception):
    pass


def _add_common(sp, seed=True):
    sp.add_argument("--output-dir", type=Path, help="directory for factor/selection CSVs")
    sp.add_argument("--report", type=Path, help="write the JSON report here instead of stdout")
    if seed:
        sp.add_argument("--seed", type=int, default=0)


def _add_solver(sp):
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0, help="ridge weight")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--lambda1", type=float, help="row-group penalty weight")
    grp.add_argument("--target-rows", type=int, help="tune lambda1 for this many nonzero rows")
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--max-probes", type=int, default=40)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curspca", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("cur", help="leverage-score column selection")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--header", action="store_true", help="skip the first CSV line")
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--cols", type=int, required=True)
    sp.add_argument("--mode", choices=MODES, default=WITH_REPLACEMENT)
    _add_common(sp)

    sp = sub.add_parser("glreg", help="group-lasso self-regression")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--header", action="store_true")
    _add_solver(sp)
    _add_common(sp)

    sp = sub.add_parser("glspca", help="group-lasso sparse PCA")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--header", action="store_true")
    sp.add_argument("--rank", type=int, required=True)
    _add_solver(sp)
    _add_common(sp)

    sp = sub.add_parser("simulate", help="synthetic signal-plus-noise trials")
    sp.add_argument("--case", choices=CASES, required=True)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--p", type=int, default=1000)
    sp.add_argument("--rank", type=int, default=10)
    sp.add_argument("--sparsity", type=float, default=0.8, help="fraction of zero entries in the target")
    sp.add_argument("--amplitude", type=float, help="signal scale (default: 3x expected noise norm)")
    sp.add_argument("--method", choices=METHODS, required=True)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--cols", type=int, help="CUR column count (default: true nonzero count)")
    sp.add_argument("--mode", choices=MODES, default=DISTINCT)
    sp.add_argument("--lambda", dest="lam", type=float, help="ridge weight for PCA-type methods")
    sp.add_argument("--save-data", action="store_true", help="also write X, Xhat, masks per trial")
    _add_common(sp)

    sp = sub.add_parser("eval", help="score saved factors against a signal matrix")
    sp.add_argument("--x", type=Path, required=True)
    sp.add_argument("--xhat", type=Path, required=True)
    sp.add_argument("--factors", type=Path, help="p x k factor CSV (Err(V))")
    sp.add_argument("--selected", type=Path, help="selected column indices (Err_reg)")
    sp.add_argument("--zero-mask", type=Path, help="true zero mask CSV (1 = zero), p x 1 or p x k")
    sp.add_argument("--header", action="store_true")
    _add_common(sp, seed=False)

    sp = sub.add_parser("curve", help="Err_reg vs number of columns for CUR runs and GL-REG")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--header", action="store_true")
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--cols", required=True, help="comma-separated column counts")
    sp.add_argument("--runs", type=int, default=5, help="CUR repetitions per column count")
    sp.add_argument("--mode", choices=MODES, default=DISTINCT)
    sp.add_argument("--output", type=Path, help="CSV destination (default stdout)")
    sp.add_argument("--seed", type=int, default=0)
    return parser


def _config(args) -> dict:
    skip = {"output_dir", "report", "verbose", "func"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in skip}


def _outdir(args):
    if args.output_dir is None:
        return None
    args.output_dir.mkdir(parents=True, exist_ok=True)
    return args.output_dir


def _solver_config(args, k=None) -> GlConfig:
    return GlConfig(lam=args.lam, lam1=args.lambda1 or 0.0, k=k, tol=args.tol, max_iter=args.max_iter)


def _solution_metrics(sol) -> dict:
    return {
        "active_count": sol.active_count,
        "objective_final": sol.objective,
        "kkt_residual": sol.kkt_residual,
        "iterations": sol.iterations,
        "converged": sol.converged,
    }


def cmd_cur(args):
    x = io.load_matrix(args.input, args.header)
    res = cur_decompose(x, args.rank, args.cols, args.mode, args.seed)
    out = _outdir(args)
    if out:
        io.save_indices(out / "selected.csv", res.selected)
        io.save_matrix(out / "scores.csv", res.scores.scores[:, None])
    metrics = {"err_reg": err_reg(x, x, res.selected), "active_count": int(res.selected.size)}
    return metrics, {"selected": res.selected, "draws": res.draws}


def _solve(args, x, mode, k=None):
    cfg = _solver_config(args, k)
    tuning = None
    if args.target_rows is not None:
        tr = tune_lambda1(x, cfg, args.target_rows, mode, max_probes=args.max_probes)
        sol = tr.solution
        tuning = {"lambda1": tr.lam1, "gap": tr.gap, "probes": [list(p) for p in tr.probes]}
    else:
        sol = (glreg_solve if mode == REG else glspca_solve)(x, cfg)
    return sol, tuning


def cmd_glreg(args):
    x = io.load_matrix(args.input, args.header)
    sol, tuning = _solve(args, x, REG)
    out = _outdir(args)
    if out:
        io.save_matrix(out / "B.csv", sol.w)
        io.save_indices(out / "selected.csv", sol.active_rows)
    metrics = {"err_reg": err_reg(x, x, sol.active_rows), **_solution_metrics(sol)}
    return metrics, {"lambda1": sol.lam1, "tuning": tuning, "selected": sol.active_rows}


def cmd_glspca(args):
    x = io.load_matrix(args.input, args.header)
    sol, tuning = _solve(args, x, SPCA, k=args.rank)
    out = _outdir(args)
    if out:
        io.save_matrix(out / "W.csv", sol.w)
        io.save_matrix(out / "A.csv", sol.a)
        io.save_indices(out / "selected.csv", sol.active_rows)
    metrics = {"err_pca": err_pca(x, x, sol.w), **_solution_metrics(sol)}
    return metrics, {"lambda1": sol.lam1, "tuning": tuning, "selected": sol.active_rows}


def cmd_simulate(args):
    spec = SignalSpec.from_sparsity(args.case, args.n, args.p, args.rank, args.sparsity,
                                    amplitude=args.amplitude, seed=args.seed)
    tuning = {"mode": args.mode}
    if args.cols is not None:
        tuning["cols"] = args.cols
    if args.lam is not None:
        tuning["lam"] = args.lam
    summary = run_trials(spec, args.method, args.trials, tuning)
    out = _outdir(args)
    if out and args.save_data:
        for t in range(args.trials):
            data = generate(SignalSpec(spec.case, spec.n, spec.p, spec.k, spec.c, spec.amplitude, spec.seed + t))
            io.save_matrix(out / f"trial{t}_x.csv", data.x)
            io.save_matrix(out / f"trial{t}_xhat.csv", data.xhat)
            mask = data.true_zero_mask
            io.save_matrix(out / f"trial{t}_zero_mask.csv", mask.astype(float).reshape(mask.shape[0], -1))
    metrics = {key: summary.mean.get(key) for key in ("err_reg", "err_pca", "precision", "active_count")}
    extra = {
        "std": summary.std,
        "mean": summary.mean,
        "trials": [r.to_dict() for r in summary.reports],
        "failures": summary.failures,
        "spec": {"case": spec.case, "n": spec.n, "p": spec.p, "k": spec.k, "c": spec.c,
                 "amplitude": spec.amplitude},
    }
    if summary.failures and not summary.reports:
        raise ParameterError(f"all {args.trials} trials failed: {summary.failures[0]['error']}")
    return metrics, extra


def cmd_eval(args):
    if args.factors is None and args.selected is None:
        raise UsageError("eval needs --factors and/or --selected")
    x = io.load_matrix(args.x, args.header)
    xhat = io.load_matrix(args.xhat, args.header)
    mask = io.load_matrix(args.zero_mask) != 0 if args.zero_mask else None
    metrics = {}
    if args.selected is not None:
        sel = io.load_indices(args.selected)
        metrics["err_reg"] = err_reg(xhat, x, sel)
        metrics["active_count"] = int(np.unique(sel).size)
        if mask is not None:
            metrics["precision"] = precision_zeros(unselected_mask(sel, x.shape[1]), row_zero_mask(
                mask[:, 0] if mask.shape[1] == 1 else mask))
    if args.factors is not None:
        w = io.load_matrix(args.factors)
        metrics["err_pca"] = err_pca(xhat, x, w)
        metrics["active_count"] = int(np.count_nonzero(np.any(w != 0, axis=1)))
        if mask is not None:
            true = np.repeat(mask, w.shape[1], axis=1) if mask.shape[1] == 1 else mask
            metrics["precision"] = precision_zeros(w == 0, true)
    return metrics, {}


def cmd_curve(args):
    x = io.load_matrix(args.input, args.header)
    try:
        counts = [int(c) for c in args.cols.split(",") if c.strip()]
    except ValueError:
        raise UsageError(f"--cols must be comma-separated integers, got {args.cols!r}") from None
    rows = []
    for c in counts:
        for run in range(args.runs):
            res = cur_decompose(x, args.rank, c, args.mode, args.seed + run)
            rows.append(("cur", c, run, int(res.selected.size), err_reg(x, x, res.selected)))
        tr = tune_lambda1(x, GlConfig(), c, REG)
        sel = tr.solution.active_rows
        rows.append(("glreg", c, 0, int(sel.size), err_reg(x, x, sel)))
    fh = args.output.open("w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "cols_requested", "run", "cols_used", "err_reg"])
        for r in rows:
            writer.writerow([r[0], r[1], r[2], r[3], repr(r[4])])
    finally:
        if args.output:
            fh.close()
    return None


COMMANDS = {
    "cur": cmd_cur,
    "glreg": cmd_glreg,
    "glspca": cmd_glspca,
    "simulate": cmd_simulate,
    "eval": cmd_eval,
    "curve": cmd_curve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except (UsageError, ParameterError, InfeasibleError) as exc:
        parser.error(str(exc))  # exits 2
    except ParseError as exc:
        print(f"curspca: error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateError, OSError) as exc:
        print(f"curspca: error: {exc}", file=sys.stderr)
        return 1
    if result is None:
        return 0
    metrics, extra = result
    elapsed = (time.perf_counter() - start) * 1000.0
    report = io.make_report(args.command, _config(args), metrics, getattr(args, "seed", None), elapsed, **extra)
    try:
        if args.report:
            io.write_report(args.report, report)
        elif args.output_dir:
            io.write_report(_outdir(args) / "report.json", report)
            sys.stdout.write(io.dump_report(report))
        else:
            sys.stdout.write(io.dump_report(report))
    except OSError as exc:
        print(f"curspca: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
