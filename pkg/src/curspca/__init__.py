"""Leverage-score CUR column selection and its group-lasso counterparts."""
from .cursampler import CurResult, LeverageScores, cur_decompose, leverage_scores, sample_columns
from .errors import DegenerateError, InfeasibleError, ParameterError, ParseError
from .glsolver import (
    FactorPair,
    GlConfig,
    GlSolution,
    block_update,
    gl_objective,
    glreg_solve,
    glspca_solve,
    lambda1_max,
    procrustes_step,
    stationarity_residuals,
    tune_lambda1,
)
from .matcore import (
    SvdFactors,
    column_projection_error,
    factor_projection_error,
    frobenius_norm,
    theorem3_gap,
    truncated_svd,
)
from .synthbench import SignalSpec, err_pca, err_reg, generate, precision_zeros, run_trials

__version__ = "0.1.0"
