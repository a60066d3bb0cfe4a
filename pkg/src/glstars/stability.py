"""Stability-based regularization selection over subsampled glasso paths.

The procedure: draw N subsamples of size b without replacement, fit the
full regularization path on each, record per-edge selection frequencies
theta (a U-statistic of order b), convert them to per-edge instabilities
xi = 2 * theta * (1 - theta), average the instabilities over all
possible edges into a total-instability curve, monotonize that curve in
ascending-Lambda (= descending-penalty) order, and select the largest
Lambda whose monotonized instability stays at or below the cut point
beta. The selected graph is sparse but replicable under resampling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import GlstarsError, InvalidBlockSize
from .glasso import (EDGE_ZERO_TOL, GlassoConfig, RegularizationGrid,
                     edge_set, glasso_path, lambda_max, make_grid)

DEFAULT_BETA = 0.05
DEFAULT_NUM_SUBSAMPLES = 100


@dataclass(frozen=True)
class SubsamplePlan:
    """N index sets of size b drawn without replacement from range(n).

    Each index set is derived from (seed, subsample_id) so that results
    cannot depend on scheduling order when subsamples are processed
    concurrently.
    """

    n: int
    b: int
    num_subsamples: int
    seed: int
    index_sets: np.ndarray  # (N, b) integer array

    def __post_init__(self):
        if self.index_sets.shape != (self.num_subsamples, self.b):
            raise ValueError("index_sets shape does not match plan")


def default_block_size(n: int) -> int:
    """Subsample size floor(10 * sqrt(n)), capped below n."""
    return min(int(math.floor(10.0 * math.sqrt(n))), n - 1)


def make_plan(n: int, num_subsamples: int = DEFAULT_NUM_SUBSAMPLES,
              seed: int = 0, b_override: int | None = None) -> SubsamplePlan:
    """Draw the subsample index sets for a StARS run.

    b defaults to floor(10 * sqrt(n)) capped at n - 1; an override must
    satisfy 1 < b < n.
    """
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    if num_subsamples < 1:
        raise ValueError("num_subsamples must be >= 1")
    b = b_override if b_override is not None else default_block_size(n)
    if not 1 < b < n:
        raise InvalidBlockSize(f"block size {b} outside (1, {n})")
    sets = np.empty((num_subsamples, b), dtype=np.intp)
    for j in range(num_subsamples):
        rng = np.random.default_rng((seed, j))
        sets[j] = rng.choice(n, size=b, replace=False)
    return SubsamplePlan(n=n, b=b, num_subsamples=num_subsamples,
                         seed=seed, index_sets=sets)


class SubsampleFitError(GlstarsError):
    """Solver failure while processing one subsample."""

    def __init__(self, subsample_id: int, cause: Exception):
        self.subsample_id = subsample_id
        self.cause = cause
        super().__init__(f"subsample {subsample_id}: {cause!r}")


def _path_edges(sigma_hat, grid, cfg, zero_tol):
    path = glasso_path(sigma_hat, grid, cfg)
    return np.stack([edge_set(est, zero_tol) for est in path])


def _count_chunk(args):
    data, rows_list, grid, cfg, zero_tol, first_id = args
    counts = np.zeros((len(grid), data.shape[1], data.shape[1]), dtype=np.int64)
    for offset, rows in enumerate(rows_list):
        try:
            sub_cov = linalg.sample_covariance(data[rows])
            counts += _path_edges(sub_cov, grid, cfg, zero_tol)
        except GlstarsError as exc:
            raise SubsampleFitError(first_id + offset, exc) from exc
    return counts


def edge_frequencies(data: np.ndarray, plan: SubsamplePlan,
                     grid: RegularizationGrid,
                     cfg: GlassoConfig = GlassoConfig(),
                     zero_tol: float = EDGE_ZERO_TOL,
                     n_jobs: int = 1) -> np.ndarray:
    """Per-edge selection frequencies theta, shape (K, p, p).

    For each subsample: covariance of the selected rows, full glasso
    path on the shared grid, edge sets. Frequencies are exact multiples
    of 1/N (integer counts divided once), so the reduction over
    subsamples is order-independent and safe to parallelize.
    """
    data = np.asarray(data, dtype=float)
    if data.shape[0] != plan.n:
        raise ValueError(f"data has {data.shape[0]} rows, plan expects {plan.n}")
    n_sub = plan.num_subsamples
    if n_jobs <= 1 or n_sub == 1:
        counts = _count_chunk((data, list(plan.index_sets), grid, cfg,
                               zero_tol, 0))
    else:
        n_chunks = min(n_jobs * 4, n_sub)
        bounds = np.linspace(0, n_sub, n_chunks + 1).astype(int)
        jobs = [(data, list(plan.index_sets[a:b]), grid, cfg, zero_tol, a)
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            counts = sum(pool.map(_count_chunk, jobs))
    return counts / float(n_sub)


@dataclass(frozen=True)
class StabilityProfile:
    """Edge frequencies and instability curves along the grid.

    All arrays are indexed in grid.lambdas order (descending penalty,
    i.e. ascending Lambda): theta_hat and xi_hat are (K, p, p), d_hat
    and d_bar are (K,). d_bar is the running maximum of d_hat in
    ascending-Lambda order.
    """

    grid: RegularizationGrid
    theta_hat: np.ndarray
    xi_hat: np.ndarray
    d_hat: np.ndarray
    d_bar: np.ndarray


def instability_profile(theta_hat: np.ndarray,
                        grid: RegularizationGrid) -> StabilityProfile:
    """Instabilities, total instability, and its monotonization.

    xi = 2 * theta * (1 - theta) entrywise (in [0, 1/2]); d_hat[k] is
    the mean of xi over the p*(p-1)/2 unordered off-diagonal pairs;
    d_bar is the running max of d_hat along ascending Lambda.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if theta_hat.min() < 0.0 or theta_hat.max() > 1.0:
        raise ValueError("theta entries must lie in [0, 1]")
    if theta_hat.shape[0] != len(grid):
        raise ValueError("theta first axis must match the grid")
    xi = 2.0 * theta_hat * (1.0 - theta_hat)
    p = theta_hat.shape[1]
    iu = np.triu_indices(p, 1)
    d_hat = xi[:, iu[0], iu[1]].mean(axis=1)
    d_bar = np.maximum.accumulate(d_hat)
    return StabilityProfile(grid=grid, theta_hat=theta_hat, xi_hat=xi,
                            d_hat=d_hat, d_bar=d_bar)


@dataclass(frozen=True)
class SelectionResult:
    """A chosen grid point plus the edge set reported for it.

    chosen_index addresses grid.lambdas (path order). diagnostics holds
    method-specific scalars and curves.
    """

    method: str
    chosen_index: int
    chosen_capital_lambda: float
    edge_set: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def select_index(d_bar: np.ndarray, beta: float) -> tuple[int, bool]:
    """Largest ascending-Lambda index with d_bar <= beta.

    Returns (index, saturated); saturated means no grid point qualified
    and the sparsest point (index 0) is returned as the conservative
    fallback.
    """
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must be in (0, 0.5), got {beta}")
    qualifying = np.nonzero(np.asarray(d_bar) <= beta)[0]
    if qualifying.size == 0:
        return 0, True
    return int(qualifying[-1]), False


def stars_select(profile: StabilityProfile, beta: float = DEFAULT_BETA,
                 candidate_edges: np.ndarray | None = None) -> SelectionResult:
    """Pick the largest Lambda whose monotonized instability is <= beta.

    candidate_edges supplies one edge set per grid point (the refit
    path the reported graph is drawn from); when omitted, the edge with
    frequency > 1/2 in theta_hat stands in, which is only meaningful
    for diagnostics.
    """
    k, saturated = select_index(profile.d_bar, beta)
    if candidate_edges is not None:
        chosen_edges = np.asarray(candidate_edges[k], dtype=bool)
    else:
        chosen_edges = profile.theta_hat[k] > 0.5
        np.fill_diagonal(chosen_edges, False)
    return SelectionResult(
        method="stars",
        chosen_index=k,
        chosen_capital_lambda=profile.grid.capital_lambda_at(k),
        edge_set=chosen_edges,
        diagnostics={
            "beta": beta,
            "saturated": saturated,
            "d_bar_at_selection": float(profile.d_bar[k]),
            "d_hat": profile.d_hat.tolist(),
            "d_bar": profile.d_bar.tolist(),
        },
    )


def derive_seed(*parts: int) -> int:
    """Collapse a tuple of nonnegative ints into one reproducible seed."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ConcentrationCell:
    """Empirical concentration of total instability for one sample size."""

    n: int
    b: int
    p: int
    grid_size: int
    num_subsamples: int
    trials: int
    delta: float
    bound: float
    median_deviation: float
    max_deviation: float
    violation_fraction: float


@dataclass(frozen=True)
class ConcentrationReport:
    kind: str
    p: int
    cells: list


def concentration_bound(n: int, b: int, p: int, grid_size: int,
                        delta: float) -> float:
    """High-probability envelope for max-over-grid |d_hat - E d_hat|.

    sqrt(18 * b * (log K + 4 log p + log(1/delta)) / n); holds with
    probability at least 1 - delta with no assumptions on the sampling
    distribution (Hoeffding-type bound for U-statistics plus union
    bounds over edges and grid points).
    """
    return math.sqrt(
        18.0 * b * (math.log(grid_size) + 4.0 * math.log(p)
                    + math.log(1.0 / delta)) / n
    )


def check_concentration(p: int = 8, kind: str = "neighborhood",
                        n_values=(100, 400, 1600), trials: int = 200,
                        seed: int = 0, delta: float = 0.05,
                        num_subsamples: int = 50, grid_size: int = 10,
                        cfg: GlassoConfig = GlassoConfig(),
                        b_override: int | None = None,
                        truth_params: dict | None = None) -> ConcentrationReport:
    """Monte-Carlo check of the instability concentration bound.

    For each n: draw `trials` independent datasets from one fixed
    synthetic truth, compute each dataset's total-instability curve
    over a shared grid, estimate the population curve by the across-
    trial mean, and compare each trial's worst-case deviation from it
    against the theoretical envelope at level delta. Small instances
    only; the bound is loose, so the violation fraction is expected to
    be ~0, not just <= delta.
    """
    from . import synth  # local import: synth does not depend on this module

    truth = synth.generate(kind, p, seed=derive_seed(seed, 0xC0),
                           **(truth_params or {}))
    # fixed grid anchored above the population lambda_max so the sparse
    # end is deterministically empty across trials
    grid = make_grid(1.2 * lambda_max(truth.sigma), grid_size)

    cells = []
    for cell_id, n in enumerate(n_values):
        b = b_override if b_override is not None else default_block_size(n)
        curves = np.empty((trials, grid_size))
        for t in range(trials):
            data = linalg.sample_gaussian(truth.sigma, n,
                                          seed=(seed, cell_id, t))
            plan = make_plan(n, num_subsamples=num_subsamples,
                             seed=derive_seed(seed, cell_id, t),
                             b_override=b)
            theta = edge_frequencies(data, plan, grid, cfg)
            curves[t] = instability_profile(theta, grid).d_hat
        population = curves.mean(axis=0)
        deviations = np.abs(curves - population).max(axis=1)
        bound = concentration_bound(n, b, p, grid_size, delta)
        cells.append(ConcentrationCell(
            n=n, b=b, p=p, grid_size=grid_size,
            num_subsamples=num_subsamples, trials=trials, delta=delta,
            bound=bound,
            median_deviation=float(np.median(deviations)),
            max_deviation=float(deviations.max()),
            violation_fraction=float(np.mean(deviations > bound)),
        ))
    return ConcentrationReport(kind=kind, p=p, cells=cells)


def run_stars(data: np.ndarray, grid: RegularizationGrid,
              cfg: GlassoConfig = GlassoConfig(),
              num_subsamples: int = DEFAULT_NUM_SUBSAMPLES,
              beta: float = DEFAULT_BETA, seed: int = 0,
              b_override: int | None = None, refit_on_full: bool = False,
              n_jobs: int = 1) -> SelectionResult:
    """Full StARS pipeline on a data matrix.

    The reported edge set is refit at the selected penalty on a single
    fresh subsample of size b (matching how the procedure's effective
    sample size is b, not n); pass refit_on_full=True to refit on all n
    rows instead. Deterministic given (data, seed, config).
    """
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    plan = make_plan(n, num_subsamples=num_subsamples, seed=seed,
                     b_override=b_override)
    theta = edge_frequencies(data, plan, grid, cfg, n_jobs=n_jobs)
    profile = instability_profile(theta, grid)
    if refit_on_full:
        refit_rows = np.arange(n)
    else:
        refit_rng = np.random.default_rng((seed, plan.num_subsamples))
        refit_rows = refit_rng.choice(n, size=plan.b, replace=False)
    refit_cov = linalg.sample_covariance(data[refit_rows])
    refit_edges = _path_edges(refit_cov, grid, cfg, EDGE_ZERO_TOL)
    result = stars_select(profile, beta, candidate_edges=refit_edges)
    result.diagnostics["b"] = plan.b
    result.diagnostics["num_subsamples"] = plan.num_subsamples
    result.diagnostics["refit_on_full"] = refit_on_full
    return result
