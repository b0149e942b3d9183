import numpy as np
import pytest
from scipy import stats

from lgmd.errors import DegenerateMask
from lgmd.synth import (gen_cluster_instance, gen_instance, gen_mask,
                        gen_sparse_precision, sample_matrix_normal)


class TestGenSparsePrecision:
    def test_two_nodes_full_fraction(self):
        g = gen_sparse_precision(2, 0.999, seed=0)
        assert g.support == frozenset({(0, 1)})
        g.cholesky()

    def test_edge_count_at_six_percent(self):
        g = gen_sparse_precision(100, 0.06, seed=1)
        assert abs(len(g.support) - round(0.06 * 4950)) <= 0.2 * 0.06 * 4950

    @pytest.mark.parametrize("seed", range(5))
    def test_always_pd_and_symmetric(self, seed):
        g = gen_sparse_precision(30, 0.1, seed=seed)
        assert np.allclose(g.theta, g.theta.T)
        g.cholesky()

    def test_weight_magnitudes(self):
        g = gen_sparse_precision(40, 0.1, seed=2)
        offs = np.array([abs(g.theta[i, j]) for (i, j) in g.support])
        assert offs.min() >= 0.4 and offs.max() <= 1.0

    def test_both_signs_present(self):
        g = gen_sparse_precision(40, 0.1, seed=3)
        vals = np.array([g.theta[i, j] for (i, j) in g.support])
        assert (vals > 0).any() and (vals < 0).any()

    def test_negative_only_mode(self):
        g = gen_sparse_precision(20, 0.2, seed=4, negative_only=True)
        vals = np.array([g.theta[i, j] for (i, j) in g.support])
        assert (vals < 0).all()


class TestSampleMatrixNormal:
    def test_identity_is_standard_normal(self):
        m = sample_matrix_normal(100, 100, seed=0)
        _stat, p = stats.kstest(m.ravel(), "norm")
        assert p > 0.01

    def test_deterministic(self):
        a = gen_sparse_precision(5, 0.3, seed=1)
        m1 = sample_matrix_normal(5, 7, row_prec=a, seed=42)
        m2 = sample_matrix_normal(5, 7, row_prec=a, seed=42)
        assert np.array_equal(m1, m2)

    def test_row_covariance_matches_inverse_precision(self):
        a = gen_sparse_precision(4, 0.5, seed=2)
        m = sample_matrix_normal(4, 200000, row_prec=a, seed=3)
        emp = m @ m.T / m.shape[1]
        target = np.linalg.inv(a.theta)
        rel = np.linalg.norm(emp - target) / np.linalg.norm(target)
        assert rel < 0.05

    def test_mahalanobis_chi_square_gof(self):
        a = gen_sparse_precision(6, 0.3, seed=5)
        m = sample_matrix_normal(6, 20000, row_prec=a, seed=6)
        maha = np.einsum("ij,ik,kj->j", m, a.theta, m)
        edges = stats.chi2.ppf(np.linspace(0, 1, 11), df=6)
        edges[0], edges[-1] = -np.inf, np.inf
        counts, _ = np.histogram(maha, bins=edges)
        _stat, p = stats.chisquare(counts)
        assert p > 0.01

    def test_column_precision_side(self):
        b = gen_sparse_precision(4, 0.5, seed=7)
        m = sample_matrix_normal(100000, 4, col_prec=b, seed=8)
        emp = m.T @ m / m.shape[0]
        target = np.linalg.inv(b.theta)
        assert np.linalg.norm(emp - target) / np.linalg.norm(target) < 0.05


class TestGenMask:
    def test_full_keep(self):
        mask = gen_mask(5, 4, 1.0, seed=0)
        assert mask.all()

    def test_exact_count(self):
        mask = gen_mask(10, 10, 0.5, seed=1)
        assert mask.sum() == 50

    def test_deterministic(self):
        assert np.array_equal(gen_mask(8, 9, 0.4, seed=2), gen_mask(8, 9, 0.4, seed=2))

    def test_rows_and_columns_covered(self):
        mask = gen_mask(20, 30, 0.1, seed=3)
        assert mask.any(axis=1).all() and mask.any(axis=0).all()

    def test_unsatisfiable_raises(self):
        with pytest.raises(DegenerateMask):
            gen_mask(10, 10, 0.05, seed=4)  # 5 entries cannot cover 10 rows


class TestGenInstance:
    def test_zero_noise(self):
        inst = gen_instance(20, 15, 3, 0.0, 0.1, seed=0)
        assert np.array_equal(inst.y_no.values, inst.y_gt.values)
        assert inst.sigma_n == 0.0

    def test_paper_protocol_shapes(self):
        inst = gen_instance(100, 100, 20, 0.5, 0.06, seed=1)
        assert inst.y_gt.shape == (100, 100)
        assert inst.x_gt.shape == (100, 20)
        assert np.linalg.matrix_rank(inst.y_gt.values) == 20
        inst.a_gt.cholesky()
        inst.b_gt.cholesky()

    def test_realized_noise_ratio(self):
        inst = gen_instance(100, 100, 20, 0.5, 0.06, seed=2)
        ratio = np.std(inst.y_no.values - inst.y_gt.values) / np.std(inst.y_gt.values)
        assert ratio == pytest.approx(0.5, rel=0.05)

    def test_noise_std_close_to_sigma(self):
        inst = gen_instance(120, 100, 10, 0.3, 0.05, seed=3)
        realized = np.std(inst.y_no.values - inst.y_gt.values)
        assert realized == pytest.approx(inst.sigma_n, rel=0.1)

    def test_deterministic(self):
        a = gen_instance(30, 25, 4, 0.2, 0.1, seed=4)
        b = gen_instance(30, 25, 4, 0.2, 0.1, seed=4)
        assert np.array_equal(a.y_no.values, b.y_no.values)
        assert np.array_equal(a.x_gt, b.x_gt)

    def test_noise_paired_across_ratios(self):
        lo = gen_instance(20, 20, 3, 0.1, 0.1, seed=5)
        hi = gen_instance(20, 20, 3, 0.4, 0.1, seed=5)
        assert np.array_equal(lo.y_gt.values, hi.y_gt.values)
        e_lo = lo.y_no.values - lo.y_gt.values
        e_hi = hi.y_no.values - hi.y_gt.values
        assert np.allclose(e_hi, e_lo * (hi.sigma_n / lo.sigma_n))


class TestGenClusterInstance:
    def test_labels_and_blocks(self):
        inst = gen_cluster_instance(60, 30, 5, 3, 0.2, seed=0)
        assert inst.labels is not None and len(inst.labels) == 60
        assert set(inst.labels) == {0, 1, 2}
        # sample-graph edges stay within clusters
        for (i, j) in inst.a_gt.support:
            assert inst.labels[i] == inst.labels[j]

    def test_within_cluster_precision_negative(self):
        inst = gen_cluster_instance(40, 20, 4, 2, 0.1, seed=1)
        offs = [inst.a_gt.theta[i, j] for (i, j) in inst.a_gt.support]
        assert all(v < 0 for v in offs)

    def test_deterministic(self):
        a = gen_cluster_instance(30, 20, 3, 3, 0.2, seed=2)
        b = gen_cluster_instance(30, 20, 3, 3, 0.2, seed=2)
        assert np.array_equal(a.y_no.values, b.y_no.values)
        assert np.array_equal(a.labels, b.labels)
