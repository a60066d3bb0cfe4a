import numpy as np
import pytest

from glstars import linalg, synth
from glstars.errors import (DimensionMismatch, InvalidGroupSize, InvalidRho,
                            NotPositiveDefinite)
from glstars.synth import (gen_hub, gen_neighborhood, generate, load_truth,
                           metrics, save_truth)


def degrees(edges):
    return np.count_nonzero(edges, axis=1)


class TestNeighborhood:
    def test_degree_cap(self):
        truth = gen_neighborhood(50, rho=0.245, seed=1)
        # floor(1 / 0.245) == 4, degrees strictly smaller
        assert degrees(truth.edges).max() <= 3

    def test_unit_diagonal_and_dominance(self):
        truth = gen_neighborhood(30, seed=2)
        assert np.array_equal(truth.omega.diagonal(), np.ones(30))
        off_sums = np.abs(truth.omega).sum(axis=1) - 1.0
        assert off_sums.max() < 1.0  # strict diagonal dominance

    def test_positive_definite(self):
        truth = gen_neighborhood(40, seed=3)
        linalg.cholesky(truth.omega)  # must not raise

    def test_deterministic(self):
        a = gen_neighborhood(25, seed=9)
        b = gen_neighborhood(25, seed=9)
        assert np.array_equal(a.omega, b.omega)
        assert np.array_equal(a.edges, b.edges)
        c = gen_neighborhood(25, seed=10)
        assert not np.array_equal(a.omega, c.omega)

    def test_sigma_round_trip(self):
        truth = gen_neighborhood(20, seed=4)
        assert np.abs(linalg.inverse(truth.sigma) - truth.omega).max() <= 1e-8

    def test_edges_match_omega_pattern(self):
        truth = gen_neighborhood(30, seed=5)
        expected = truth.omega != 0.0
        np.fill_diagonal(expected, False)
        assert np.array_equal(truth.edges, expected)
        assert not truth.edges.diagonal().any()

    def test_invalid_rho(self):
        with pytest.raises(InvalidRho):
            gen_neighborhood(10, rho=1.0)
        with pytest.raises(InvalidRho):
            gen_neighborhood(10, rho=0.0)


class TestHub:
    def test_reference_scale_layout(self):
        truth = gen_hub(40, s=20, seed=0)
        assert truth.params["rho"] == pytest.approx(1.0 / 21.0)
        deg = degrees(truth.edges)
        assert deg[0] == 19 and deg[20] == 19  # pivots at rows 0 and 20
        assert np.all(deg[1:20] == 1) and np.all(deg[21:] == 1)

    def test_group_counts(self):
        truth = gen_hub(100, s=20, seed=0)
        deg = degrees(truth.edges)
        pivots = np.arange(0, 100, 20)
        assert np.all(deg[pivots] == 19)
        members = np.setdiff1d(np.arange(100), pivots)
        assert np.all(deg[members] == 1)
        assert np.count_nonzero(truth.edges) // 2 == 5 * 19

    def test_leftover_rows_isolated(self):
        truth = gen_hub(10, s=4, seed=0)
        deg = degrees(truth.edges)
        assert np.all(deg[8:] == 0)

    def test_positive_definite_default_and_strong(self):
        linalg.cholesky(gen_hub(40, s=20).omega)
        linalg.cholesky(gen_hub(100, s=20, rho=0.2).omega)

    def test_too_strong_rho_raises(self):
        # 1 - rho * sqrt(s - 1) < 0 at rho = 0.3, s = 20: not PD
        with pytest.raises(NotPositiveDefinite):
            gen_hub(40, s=20, rho=0.3)

    def test_invalid_group_size(self):
        with pytest.raises(InvalidGroupSize):
            gen_hub(10, s=1)
        with pytest.raises(InvalidGroupSize):
            gen_hub(10, s=10)

    def test_generate_dispatch(self):
        assert generate("hub", 12, s=4).kind == "hub"
        assert generate("neighborhood", 12).kind == "neighborhood"
        with pytest.raises(ValueError):
            generate("smallworld", 12)


class TestMetrics:
    def test_perfect_recovery(self):
        truth = gen_hub(12, s=4, seed=1)
        assert metrics(truth.edges, truth.edges) == (1.0, 1.0, 1.0)

    def test_complete_graph_estimate(self):
        truth = gen_hub(12, s=4, seed=1)
        k = np.count_nonzero(truth.edges) // 2
        m = 12 * 11 // 2
        complete = ~np.eye(12, dtype=bool)
        precision, recall, f1 = metrics(complete, truth.edges)
        assert precision == pytest.approx(k / m)
        assert recall == 1.0
        expected_f1 = 2 * (k / m) / (k / m + 1.0)
        assert f1 == pytest.approx(expected_f1)

    def test_empty_conventions(self):
        empty = np.zeros((5, 5), dtype=bool)
        nonempty = np.zeros((5, 5), dtype=bool)
        nonempty[0, 1] = nonempty[1, 0] = True
        assert metrics(empty, empty) == (1.0, 1.0, 1.0)
        assert metrics(empty, nonempty) == (0.0, 0.0, 0.0)

    def test_bounds_and_f1_zero_iff_no_overlap(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.uniform(size=(6, 6)) < 0.3
            a = np.triu(a, 1)
            a = a | a.T
            b = rng.uniform(size=(6, 6)) < 0.3
            b = np.triu(b, 1)
            b = b | b.T
            if not b.any():
                continue
            precision, recall, f1 = metrics(a, b)
            assert 0.0 <= precision <= 1.0
            assert 0.0 <= recall <= 1.0
            assert 0.0 <= f1 <= 1.0
            overlap = np.count_nonzero(a & b) // 2
            assert (f1 == 0.0) == (overlap == 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            metrics(np.zeros((3, 3), dtype=bool), np.zeros((4, 4), dtype=bool))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        truth = gen_neighborhood(15, seed=6)
        save_truth(truth, tmp_path / "t")
        loaded = load_truth(tmp_path / "t")
        assert np.array_equal(loaded.omega, truth.omega)
        assert np.array_equal(loaded.edges, truth.edges)
        assert loaded.kind == truth.kind
        assert loaded.params == truth.params

    def test_edges_tsv_format(self, tmp_path):
        truth = gen_hub(8, s=4, seed=2)
        save_truth(truth, tmp_path / "t")
        lines = (tmp_path / "t" / "edges.tsv").read_text().splitlines()
        assert len(lines) == np.count_nonzero(truth.edges) // 2
        pairs = [tuple(map(int, ln.split("\t"))) for ln in lines]
        assert all(i < j for i, j in pairs)
        assert pairs == sorted(pairs)

    def test_write_is_deterministic(self, tmp_path):
        truth = gen_neighborhood(10, seed=3)
        save_truth(truth, tmp_path / "a")
        save_truth(truth, tmp_path / "b")
        for name in ("omega.csv", "edges.tsv", "meta.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()
