import itertools
import math

import numpy as np
import pytest

from glstars import glasso, linalg
from glstars.errors import DimensionMismatch, NonFinite, NotPositiveDefinite
from glstars.glasso import (GlassoConfig, RegularizationGrid, edge_count,
                            edge_set, glasso_fit, glasso_path,
                            glasso_objective, kkt_residual, lambda_max,
                            make_grid, neg_log_likelihood)
from .test_linalg import brute_force_det, random_spd

TIGHT = GlassoConfig(tol=1e-8, max_outer_iters=5000)


def random_cov(p, n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    return linalg.sample_covariance(x)


class TestNegLogLikelihood:
    def test_identity(self):
        assert neg_log_likelihood(np.eye(3), np.eye(3)) == pytest.approx(3.0)

    def test_diagonal(self):
        val = neg_log_likelihood(np.diag([2.0, 2.0]), np.eye(2))
        assert val == pytest.approx(4.0 - 2.0 * math.log(2.0), abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_independent_evaluation_oracle(self, seed):
        omega = random_spd(4, seed, shift=2.0)
        sigma = random_spd(4, seed + 100)
        direct = np.trace(sigma @ omega) - math.log(brute_force_det(omega))
        assert neg_log_likelihood(omega, sigma) == pytest.approx(direct, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            neg_log_likelihood(np.eye(3), np.eye(2))


def brute_force_2x2(sigma, lam, penalize_diagonal=True, rounds=6):
    """Grid search over (shared diagonal, off-diagonal) of the 2x2
    objective, refined around the best point each round. Independent of
    the solver's iteration path."""
    best = (1.0, 0.0)
    width_d, width_o = 2.0, 1.0
    for _ in range(rounds):
        ds = np.linspace(max(best[0] - width_d, 1e-3), best[0] + width_d, 41)
        os_ = np.linspace(best[1] - width_o, best[1] + width_o, 41)
        best_val = np.inf
        for d, o in itertools.product(ds, os_):
            if d * d - o * o <= 0:
                continue
            omega = np.array([[d, o], [o, d]])
            val = glasso_objective(omega, sigma, lam, penalize_diagonal)
            if val < best_val:
                best_val = val
                best = (d, o)
        width_d /= 10.0
        width_o /= 10.0
    return np.array([[best[0], best[1]], [best[1], best[0]]])


class TestGlassoFit:
    def test_identity_separable(self):
        # objective separates per diagonal entry; each solves
        # min -log w + w + w  ->  w = 1/2
        est = glasso_fit(np.eye(4), 1.0)
        assert est.converged
        assert np.allclose(est.omega, 0.5 * np.eye(4), atol=1e-6)

    def test_lam_zero_is_plain_inverse(self):
        sigma = random_spd(5, 7)
        est = glasso_fit(sigma, 0.0)
        assert est.converged
        assert np.abs(est.omega - linalg.inverse(sigma)).max() <= 1e-6

    def test_2x2_grid_search_oracle(self):
        sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
        est = glasso_fit(sigma, 0.1, TIGHT)
        oracle = brute_force_2x2(sigma, 0.1)
        assert np.abs(est.omega - oracle).max() <= 1e-3

    def test_2x2_oracle_unpenalized_diagonal(self):
        sigma = np.array([[1.2, 0.4], [0.4, 0.9]])
        cfg = GlassoConfig(tol=1e-8, max_outer_iters=5000,
                           penalize_diagonal=False)
        est = glasso_fit(sigma, 0.08, cfg)
        # diagonal KKT: inverse matches sigma's diagonal exactly
        w = linalg.inverse(est.omega)
        assert np.abs(w.diagonal() - sigma.diagonal()).max() <= 1e-7

    @pytest.mark.parametrize("lam_frac", [0.9, 0.5, 0.2, 0.07])
    def test_kkt_on_random_problems(self, lam_frac):
        sigma = random_cov(12, 80, seed=int(lam_frac * 100))
        lam = lam_frac * lambda_max(sigma)
        est = glasso_fit(sigma, lam)
        assert est.converged
        assert kkt_residual(est.omega, sigma, lam) <= glasso.KKT_TOL

    def test_objective_descent_vs_warm_start_and_default(self):
        sigma = random_cov(8, 60, seed=4)
        lam = 0.3 * lambda_max(sigma)
        warm = glasso_fit(sigma, 0.8 * lambda_max(sigma))
        est = glasso_fit(sigma, lam, warm_start=warm)
        final = glasso_objective(est.omega, sigma, lam)
        assert final <= glasso_objective(warm.omega, sigma, lam) + 1e-9
        default_init = np.diag(1.0 / (sigma.diagonal() + lam))
        assert final <= glasso_objective(default_init, sigma, lam) + 1e-9

    def test_warm_start_invariance(self):
        sigma = random_cov(6, 50, seed=11)
        lam = 0.3 * lambda_max(sigma)
        warm_a = glasso_fit(sigma, 0.9 * lambda_max(sigma), TIGHT)
        warm_b = glasso_fit(sigma, 0.1 * lambda_max(sigma), TIGHT)
        est_a = glasso_fit(sigma, lam, TIGHT, warm_start=warm_a)
        est_b = glasso_fit(sigma, lam, TIGHT, warm_start=warm_b)
        assert np.abs(est_a.omega - est_b.omega).max() <= 1e-5

    def test_unconverged_flag(self):
        sigma = random_cov(10, 40, seed=3)
        cfg = GlassoConfig(max_outer_iters=1, tol=1e-12)
        est = glasso_fit(sigma, 0.1 * lambda_max(sigma), cfg)
        assert not est.converged
        assert est.iters == 1

    def test_nan_input_raises(self):
        sigma = np.eye(3)
        sigma[0, 1] = sigma[1, 0] = np.nan
        with pytest.raises(NonFinite):
            glasso_fit(sigma, 0.1)

    def test_zero_diagonal_raises(self):
        sigma = np.zeros((3, 3))
        with pytest.raises(NotPositiveDefinite):
            glasso_fit(sigma, 0.0)
        with pytest.raises(NotPositiveDefinite):
            glasso_fit(sigma, 0.5, GlassoConfig(penalize_diagonal=False))

    def test_negative_lam_raises(self):
        with pytest.raises(ValueError):
            glasso_fit(np.eye(3), -0.1)


class TestGlassoPath:
    def test_empty_graph_at_lambda_max(self):
        sigma = random_cov(7, 50, seed=21)
        grid = make_grid(lambda_max(sigma), num=6)
        path = glasso_path(sigma, grid)
        assert edge_count(edge_set(path[0])) == 0

    def test_grid_contract(self):
        sigma = random_cov(5, 40, seed=2)
        grid = make_grid(lambda_max(sigma), num=9)
        path = glasso_path(sigma, grid)
        assert len(path) == 9
        assert [est.lam for est in path] == list(grid.lambdas)

    def test_every_point_passes_kkt(self):
        sigma = random_cov(10, 70, seed=8)
        grid = make_grid(lambda_max(sigma), num=12)
        for est in glasso_path(sigma, grid):
            assert est.converged
            assert kkt_residual(est.omega, sigma, est.lam) <= glasso.KKT_TOL


class TestEdgeSet:
    def test_diagonal_estimate_is_empty(self):
        est = glasso.PrecisionEstimate(np.diag([1.0, 2.0, 3.0]), 0.5, True, 0)
        assert edge_count(edge_set(est)) == 0

    def test_single_edge(self):
        omega = np.eye(3)
        omega[0, 1] = omega[1, 0] = 0.3
        est = glasso.PrecisionEstimate(omega, 0.1, True, 0)
        edges = edge_set(est, zero_tol=1e-8)
        assert edge_count(edges) == 1
        assert edges[0, 1] and edges[1, 0]
        assert not edges.diagonal().any()

    def test_below_threshold_absent(self):
        omega = np.eye(2)
        omega[0, 1] = omega[1, 0] = 5e-9
        est = glasso.PrecisionEstimate(omega, 0.1, True, 0)
        assert edge_count(edge_set(est, zero_tol=1e-8)) == 0


class TestGrid:
    def test_reciprocal_consistency(self):
        grid = make_grid(2.0, num=7, ratio=0.1)
        # same division both ways: exact equality, no recomputation drift
        assert np.array_equal(grid.capital_lambdas, 1.0 / grid.lambdas)
        assert grid.capital_lambda_at(3) == 1.0 / grid.lambdas[3]

    def test_monotone(self):
        grid = make_grid(1.0, num=30, ratio=0.05)
        assert np.all(np.diff(grid.lambdas) < 0)
        assert np.all(np.diff(grid.capital_lambdas) > 0)
        assert len(grid) == 30
        assert grid.lambdas[0] == pytest.approx(1.0)
        assert grid.lambdas[-1] == pytest.approx(0.05)

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            RegularizationGrid(np.array([1.0]))
        with pytest.raises(ValueError):
            RegularizationGrid(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            RegularizationGrid(np.array([1.0, -0.5]))
        with pytest.raises(ValueError):
            make_grid(0.0)

    def test_lambda_max_kills_all_edges(self):
        # at lam >= lambda_max the diagonal matrix satisfies the KKT
        # conditions, so the fit is exactly diagonal
        sigma = random_cov(6, 45, seed=14)
        lm = lambda_max(sigma)
        est = glasso_fit(sigma, lm * 1.000001)
        assert edge_count(edge_set(est)) == 0


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            GlassoConfig(tol=0.0)
        with pytest.raises(ValueError):
            GlassoConfig(inner_tol=-1.0)
        with pytest.raises(ValueError):
            GlassoConfig(max_outer_iters=0)
