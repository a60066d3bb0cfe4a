"""Competing regularization-selection methods on a glasso path.

AIC, BIC, K-fold cross-validation, and the truth-using oracle. All four
return a grid member; ties are broken toward the smaller Lambda (the
sparser graph). Information criteria are evaluated on the path fitted
to the full-sample covariance:

    AIC(k) = n * nll_k + 2 * d_k
    BIC(k) = n * nll_k + d_k * log(n)

where nll is the per-sample deviance term trace(S @ Omega) - log|Omega|
(so n * nll == -2 * log-likelihood up to the usual additive constant)
and d_k counts free parameters: number of edges plus the p diagonal
entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import GlstarsError
from .glasso import (EDGE_ZERO_TOL, GlassoConfig, PrecisionEstimate,
                     RegularizationGrid, edge_count, edge_set, glasso_path,
                     neg_log_likelihood)
from .stability import SelectionResult

DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class PathScores:
    """One criterion value per grid point, in grid.lambdas order."""

    grid: RegularizationGrid
    scores: np.ndarray
    method: str

    def __post_init__(self):
        if len(self.scores) != len(self.grid):
            raise ValueError("need one score per grid point")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")


def degrees_of_freedom(est: PrecisionEstimate, p: int,
                       zero_tol: float = EDGE_ZERO_TOL) -> int:
    """Free parameters of the fitted model: edge count plus p diagonals."""
    return edge_count(edge_set(est, zero_tol)) + p


def _argmin_first(scores: np.ndarray) -> int:
    # first occurrence == smallest Lambda among tied grid points
    return int(np.argmin(scores))


def _information_criterion(path, sigma_hat_full, grid, n, penalty_per_df,
                           method):
    p = sigma_hat_full.shape[0]
    scores = np.empty(len(grid))
    for k, est in enumerate(path):
        nll = neg_log_likelihood(est.omega, sigma_hat_full)
        d = degrees_of_freedom(est, p)
        scores[k] = n * nll + penalty_per_df * d
    path_scores = PathScores(grid=grid, scores=scores, method=method)
    k = _argmin_first(path_scores.scores)
    return SelectionResult(
        method=method,
        chosen_index=k,
        chosen_capital_lambda=grid.capital_lambda_at(k),
        edge_set=edge_set(path[k]),
        diagnostics={"scores": scores.tolist(), "n": n},
    )


def aic_select(path: list[PrecisionEstimate], sigma_hat_full: np.ndarray,
               grid: RegularizationGrid, n: int) -> SelectionResult:
    """Akaike criterion: minimize n * nll + 2 * d over the grid."""
    return _information_criterion(path, sigma_hat_full, grid, n, 2.0, "aic")


def bic_select(path: list[PrecisionEstimate], sigma_hat_full: np.ndarray,
               grid: RegularizationGrid, n: int) -> SelectionResult:
    """Bayesian criterion: minimize n * nll + d * log(n) over the grid."""
    return _information_criterion(path, sigma_hat_full, grid, n,
                                  math.log(n), "bic")


class FoldFitError(GlstarsError):
    """Solver failure while fitting one cross-validation fold."""

    def __init__(self, fold_id: int, cause: Exception):
        self.fold_id = fold_id
        self.cause = cause
        super().__init__(f"fold {fold_id}: {cause!r}")


def kcv_fold_rows(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic shuffle of range(n) split into near-equal folds.

    folds == n is leave-one-out; training sets must keep at least two
    rows so their covariance is nonzero.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > n:
        raise ValueError(f"need folds <= n, got n={n}, folds={folds}")
    if n - math.ceil(n / folds) < 2:
        raise ValueError(f"training folds too small with n={n}, folds={folds}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def kcv_fold_scores(data: np.ndarray, grid: RegularizationGrid,
                    fold_rows: list[np.ndarray],
                    cfg: GlassoConfig = GlassoConfig()) -> np.ndarray:
    """(folds, K) validation deviances: row f scores the path trained
    without fold f against fold f's own maximum-likelihood covariance
    (centered within the fold)."""
    data = np.asarray(data, dtype=float)
    all_rows = np.concatenate(fold_rows)
    out = np.empty((len(fold_rows), len(grid)))
    for fold_id, rows in enumerate(fold_rows):
        train = np.setdiff1d(all_rows, rows)
        try:
            train_cov = linalg.sample_covariance(data[train])
            val_cov = linalg.sample_covariance(data[rows])
            path = glasso_path(train_cov, grid, cfg)
        except GlstarsError as exc:
            raise FoldFitError(fold_id, exc) from exc
        for k, est in enumerate(path):
            out[fold_id, k] = neg_log_likelihood(est.omega, val_cov)
    return out


def kcv_select(data: np.ndarray, grid: RegularizationGrid,
               folds: int = DEFAULT_FOLDS,
               cfg: GlassoConfig = GlassoConfig(), seed: int = 0,
               full_path: list[PrecisionEstimate] | None = None) -> SelectionResult:
    """K-fold cross-validation on held-out per-sample deviance.

    Rows are shuffled deterministically by seed and split into folds of
    near-equal size (differing by at most one row); fold scores are
    summed in fold-index order and averaged. The reported edge set
    comes from the full-data path at the chosen penalty (supplied via
    full_path, or refit here).
    """
    data = np.asarray(data, dtype=float)
    fold_rows = kcv_fold_rows(data.shape[0], folds, seed)
    per_fold = kcv_fold_scores(data, grid, fold_rows, cfg)
    scores = PathScores(grid=grid, scores=per_fold.sum(axis=0) / folds,
                        method="kcv").scores
    k = _argmin_first(scores)
    if full_path is None:
        full_path = glasso_path(linalg.sample_covariance(data), grid, cfg)
    return SelectionResult(
        method="kcv",
        chosen_index=k,
        chosen_capital_lambda=grid.capital_lambda_at(k),
        edge_set=edge_set(full_path[k]),
        diagnostics={"scores": scores.tolist(), "folds": folds},
    )


def oracle_select(path_on_subsample: list[PrecisionEstimate],
                  true_edges: np.ndarray, grid: RegularizationGrid) -> SelectionResult:
    """Truth-using baseline: minimize the symmetric-difference edge count.

    Calibrates how hard an instance is; not a practical method.
    """
    true_edges = np.asarray(true_edges, dtype=bool)
    edges = [edge_set(est) for est in path_on_subsample]
    distances = np.array([np.count_nonzero(e ^ true_edges) // 2 for e in edges])
    k = _argmin_first(distances)
    return SelectionResult(
        method="oracle",
        chosen_index=k,
        chosen_capital_lambda=grid.capital_lambda_at(k),
        edge_set=edges[k],
        diagnostics={"distances": distances.tolist(),
                     "distance_at_selection": int(distances[k])},
    )
