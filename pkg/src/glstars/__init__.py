"""Sparse Gaussian graphical models via the graphical lasso, with
stability-based selection of the regularization parameter and AIC /
BIC / cross-validation / oracle baselines on synthetic graphs."""

from .errors import (ConfigError, DimensionMismatch, GlstarsError,
                     InvalidBlockSize, InvalidGroupSize, InvalidRho,
                     NonFinite, NotPositiveDefinite)
from .glasso import (GlassoConfig, PrecisionEstimate, RegularizationGrid,
                     edge_set, glasso_fit, glasso_path, kkt_residual,
                     lambda_max, make_grid, neg_log_likelihood)
from .linalg import cholesky, inverse, log_det, sample_covariance, sample_gaussian
from .selectors import aic_select, bic_select, kcv_select, oracle_select
from .stability import (SelectionResult, StabilityProfile, SubsamplePlan,
                        check_concentration, edge_frequencies,
                        instability_profile, make_plan, run_stars,
                        stars_select)
from .synth import GroundTruth, gen_hub, gen_neighborhood, metrics

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DimensionMismatch", "GlstarsError", "InvalidBlockSize",
    "InvalidGroupSize", "InvalidRho", "NonFinite", "NotPositiveDefinite",
    "GlassoConfig", "PrecisionEstimate", "RegularizationGrid", "edge_set",
    "glasso_fit", "glasso_path", "kkt_residual", "lambda_max", "make_grid",
    "neg_log_likelihood", "cholesky", "inverse", "log_det",
    "sample_covariance", "sample_gaussian", "aic_select", "bic_select",
    "kcv_select", "oracle_select", "SelectionResult", "StabilityProfile",
    "SubsamplePlan", "check_concentration", "edge_frequencies",
    "instability_profile", "make_plan", "run_stars", "stars_select",
    "GroundTruth", "gen_hub", "gen_neighborhood", "metrics", "__version__",
]
