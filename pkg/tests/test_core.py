import numpy as np
import pytest

from lgmd.core import (DataMatrix, FactorPair, Hyperparams, LaplacianGraph,
                       PrecisionGraph, empirical_covariance, knn_graph,
                       normalize_factor, normalize_precision)
from lgmd.errors import DegenerateInput, ZeroVariance

from helpers import random_spd


class TestDataMatrix:
    def test_rejects_nonfinite_observed(self):
        with pytest.raises(ValueError):
            DataMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_nonfinite_under_mask_is_fine(self):
        mask = np.array([[True, False], [True, True]])
        dm = DataMatrix(np.array([[1.0, np.inf], [0.0, 1.0]]), mask)
        assert dm.observed_values()[0, 1] == 0.0

    def test_mask_shape_checked(self):
        with pytest.raises(ValueError):
            DataMatrix(np.zeros((2, 2)), np.ones((2, 3), dtype=bool))


class TestFactorPair:
    def test_rank_must_match(self):
        with pytest.raises(ValueError):
            FactorPair(np.zeros((3, 2)), np.zeros((4, 3)))

    def test_scales_positive(self):
        with pytest.raises(ValueError):
            FactorPair(np.zeros((3, 2)), np.zeros((4, 2)), x_scale=0.0)


class TestPrecisionGraph:
    def test_support_derived_from_nonzeros(self):
        theta = np.array([[2.0, 0.5, 0.0], [0.5, 2.0, 0.0], [0.0, 0.0, 1.0]])
        g = PrecisionGraph(theta)
        assert g.support == frozenset({(0, 1)})

    def test_asymmetry_rejected(self):
        theta = np.array([[1.0, 0.2], [0.1, 1.0]])
        with pytest.raises(ValueError):
            PrecisionGraph(theta)

    def test_wrong_support_rejected(self):
        with pytest.raises(ValueError):
            PrecisionGraph(np.eye(2), frozenset({(0, 1)}))

    def test_cholesky_on_random_spd(self):
        rng = np.random.default_rng(3)
        g = PrecisionGraph(random_spd(5, rng))
        chol = g.cholesky()
        assert np.allclose(chol @ chol.T, g.theta)


class TestLaplacianGraph:
    def test_from_weights_row_sums(self):
        g = LaplacianGraph.from_weights(3, {(0, 1): 1.0, (1, 2): 2.0})
        assert np.allclose(g.lap.sum(axis=1), 0.0)
        assert np.all(np.linalg.eigvalsh(g.lap) > -1e-10)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            LaplacianGraph.from_weights(2, {(0, 1): -1.0})

    def test_positive_offdiagonal_rejected(self):
        m = np.array([[-1.0, 1.0], [1.0, -1.0]])
        with pytest.raises(ValueError):
            LaplacianGraph(m)


class TestHyperparams:
    def test_tolerances_strictly_positive(self):
        with pytest.raises(ValueError):
            Hyperparams(k=2, tol_outer=0.0)

    def test_rank_bound_against_data(self):
        h = Hyperparams(k=5)
        with pytest.raises(ValueError):
            h.check_rank(DataMatrix(np.zeros((3, 10))))


class TestNormalizeFactor:
    def test_unit_std_already(self):
        m = np.array([[1.0, -1.0], [1.0, -1.0]])
        out, scale = normalize_factor(m)
        assert scale == pytest.approx(1.0)
        assert np.array_equal(out, m)

    @pytest.mark.parametrize("seed", range(5))
    def test_scale_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((4, 3))
        c = rng.uniform(0.1, 10.0)
        base, _ = normalize_factor(m)
        scaled, s = normalize_factor(c * m)
        assert np.allclose(scaled, base)
        assert s == pytest.approx(c * np.std(m))

    def test_output_std_is_one(self):
        rng = np.random.default_rng(11)
        m = rng.standard_normal((3, 3))
        out, _ = normalize_factor(m)
        assert abs(np.std(out) - 1.0) < 1e-12

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            normalize_factor(np.full((3, 3), 2.0) * 0.0 + 5.0 - 5.0)


class TestNormalizePrecision:
    def test_scaled_identity(self):
        g = normalize_precision(PrecisionGraph(2.0 * np.eye(4)))
        assert np.allclose(g.theta, np.eye(4))

    def test_identity_fixed_point(self):
        g = normalize_precision(PrecisionGraph.identity(3))
        assert np.allclose(g.theta, np.eye(3))

    def test_mixed_diagonal(self):
        theta = np.array([[1.0, 0.5], [0.5, 3.0]])
        g = normalize_precision(PrecisionGraph(theta))
        assert np.allclose(g.theta, theta / 2.0)
        assert g.theta[0, 1] == pytest.approx(0.25)

    @pytest.mark.parametrize("seed", range(5))
    def test_support_and_signs_preserved(self, seed):
        rng = np.random.default_rng(seed)
        theta = random_spd(6, rng)
        theta[np.abs(theta) < 0.05] = 0.0
        theta = 0.5 * (theta + theta.T)
        theta += np.eye(6) * (0.1 + abs(min(np.linalg.eigvalsh(theta).min(), 0)))
        g = PrecisionGraph(theta)
        gn = normalize_precision(g)
        assert gn.support == g.support
        assert np.all(np.sign(gn.theta) == np.sign(g.theta))


class TestKnnGraph:
    def test_identical_points_tie_closure(self):
        y = DataMatrix(np.zeros((3, 2)))
        g = knn_graph(y, 1, "rows")
        assert np.allclose(np.diag(g.lap), [2.0, 2.0, 2.0])
        assert g.edge_set() == frozenset({(0, 1), (0, 2), (1, 2)})

    def test_line_of_points(self):
        y = DataMatrix(np.array([[0.0], [1.0], [10.0]]))
        g = knn_graph(y, 1, "rows")
        assert g.edge_set() == frozenset({(0, 1), (1, 2)})

    @pytest.mark.parametrize("seed", range(4))
    def test_laplacian_invariants(self, seed):
        rng = np.random.default_rng(seed)
        y = DataMatrix(rng.standard_normal((12, 5)))
        g = knn_graph(y, 3, "rows")
        assert np.abs(g.lap.sum(axis=1)).max() < 1e-10
        off = g.lap - np.diag(np.diag(g.lap))
        assert off.max() <= 0
        assert np.linalg.eigvalsh(g.lap).min() > -1e-10

    def test_columns_axis(self):
        rng = np.random.default_rng(7)
        vals = rng.standard_normal((6, 4))
        g = knn_graph(DataMatrix(vals), 2, "columns")
        assert g.dim == 4

    def test_masked_distances(self):
        # rows agree on their common coordinate, so they are all neighbors
        vals = np.array([[1.0, 9.0], [1.0, 0.0], [5.0, 0.0]])
        mask = np.array([[True, False], [True, True], [False, True]])
        g = knn_graph(DataMatrix(vals, mask), 1, "rows")
        assert (0, 1) in g.edge_set()

    def test_empty_row_degenerate(self):
        mask = np.array([[False, False], [True, True], [True, True]])
        with pytest.raises(DegenerateInput):
            knn_graph(DataMatrix(np.zeros((3, 2)), mask), 1, "rows")


class TestEmpiricalCovariance:
    def test_identity_factor(self):
        assert np.allclose(empirical_covariance(np.eye(2)), np.eye(2) / 2.0)

    def test_zero_with_jitter(self):
        assert np.allclose(empirical_covariance(np.zeros((3, 2)), 0.1),
                           0.1 * np.eye(3))

    def test_outer_product_oracle(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((4, 3))
        expected = sum(np.outer(m[:, c], m[:, c]) for c in range(3)) / 3.0
        assert np.allclose(empirical_covariance(m), expected)

    def test_rank_and_pd(self):
        rng = np.random.default_rng(9)
        m = rng.standard_normal((6, 2))
        s = empirical_covariance(m)
        assert np.linalg.matrix_rank(s) <= 2
        np.linalg.cholesky(empirical_covariance(m, 1e-8))
