import json

import numpy as np
import pytest

from lgmd.core import DataMatrix
from lgmd.errors import ConfigError, DimensionMismatch, ParseError
from lgmd.harness import (ExperimentConfig, emit_report, load_matrix,
                          load_report_json, run_cluster, run_complete,
                          run_denoise, save_matrix, tune_hyperparams)
from lgmd.harness.cli import main
from lgmd.harness.experiments import ExperimentReport, _fit_and_factors
from lgmd.harness.tuning import minimize_2d
from lgmd.metrics import masked_rmse
from lgmd.synth import gen_instance, gen_mask


class TestMatrixIO:
    def test_small_dense_csv(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3,4\n")
        dm = load_matrix(str(path), "csv")
        assert dm.mask is None
        assert np.array_equal(dm.values, [[1.0, 2.0], [3.0, 4.0]])

    def test_missing_fields_build_mask(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,,\n,2,\n")
        dm = load_matrix(str(path), "csv")
        assert dm.mask.sum() == 2
        assert dm.values[0, 0] == 1.0 and dm.values[1, 1] == 2.0

    def test_round_trip_dense_csv(self, tmp_path):
        rng = np.random.default_rng(0)
        dm = DataMatrix(rng.standard_normal((50, 40)) * 10 ** rng.integers(-8, 8))
        path = str(tmp_path / "m.csv")
        save_matrix(dm, path, "csv")
        back = load_matrix(path, "csv")
        assert np.array_equal(back.values, dm.values)
        assert back.mask is None

    def test_round_trip_masked_csv(self, tmp_path):
        rng = np.random.default_rng(1)
        mask = gen_mask(12, 9, 0.6, seed=2)
        dm = DataMatrix(np.where(mask, rng.standard_normal((12, 9)), 0.0), mask)
        path = str(tmp_path / "m.csv")
        save_matrix(dm, path, "csv")
        back = load_matrix(path, "csv")
        assert np.array_equal(back.mask, mask)
        assert np.array_equal(back.values[mask], dm.values[mask])

    def test_round_trip_matrix_market_array(self, tmp_path):
        rng = np.random.default_rng(3)
        dm = DataMatrix(rng.standard_normal((7, 5)))
        path = str(tmp_path / "m.mtx")
        save_matrix(dm, path, "matrix-market")
        back = load_matrix(path, "matrix-market")
        assert back.mask is None
        assert np.array_equal(back.values, dm.values)

    def test_round_trip_matrix_market_coordinate(self, tmp_path):
        rng = np.random.default_rng(4)
        mask = gen_mask(8, 6, 0.5, seed=5)
        dm = DataMatrix(np.where(mask, rng.standard_normal((8, 6)), 0.0), mask)
        path = str(tmp_path / "m.mtx")
        save_matrix(dm, path, "matrix-market")
        back = load_matrix(path, "matrix-market")
        assert np.array_equal(back.mask, mask)
        assert np.array_equal(back.values, dm.values)

    def test_observed_zero_stays_observed(self, tmp_path):
        mask = np.array([[True, False], [True, True]])
        dm = DataMatrix(np.array([[0.0, 0.0], [1.0, 2.0]]), mask)
        path = str(tmp_path / "m.mtx")
        save_matrix(dm, path, "matrix-market")
        back = load_matrix(path, "matrix-market")
        assert back.mask[0, 0] and not back.mask[0, 1]

    def test_parse_error_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,oops\n")
        with pytest.raises(ParseError) as exc:
            load_matrix(str(path), "csv")
        assert exc.value.line == 2 and exc.value.column == 2

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(DimensionMismatch):
            load_matrix(str(path), "csv")


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"task": "denoise", "bogus": 1})

    def test_bad_bounds(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"lambda1_bounds": [1.0, 0.5]})

    def test_bad_method(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"methods": ["svd"]})

    def test_json_round_trip(self, tmp_path):
        cfg = ExperimentConfig(task="complete", sweep=[0.3, 0.8], repetitions=2)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        back = ExperimentConfig.from_json(str(path))
        assert back == cfg

    def test_hyperparams_view(self):
        cfg = ExperimentConfig(rank=4, lambda1=0.5, eta1=2.0)
        h = cfg.hyperparams()
        assert h.k == 4 and h.lambda1 == 0.5 and h.eta1 == 2.0


class TestMinimize2D:
    BOUNDS = ([1e-4, 1e2], [1e-4, 1e2])

    @staticmethod
    def quad_score(l1, l2):
        u, v = np.log10(l1), np.log10(l2)
        return (u + 1.0) ** 2 + (v - 0.0) ** 2

    def test_single_probe_budget(self):
        calls = []

        def obj(a, b):
            calls.append((a, b))
            return 1.0

        x1, x2, best, hist = minimize_2d(obj, *self.BOUNDS, budget=1, seed=0)
        assert len(calls) == 1 and len(hist) == 1
        assert (x1, x2) == calls[0]

    def test_flat_landscape(self):
        x1, x2, best, hist = minimize_2d(lambda a, b: 7.0, *self.BOUNDS,
                                         budget=5, seed=1)
        assert best == 7.0
        assert all(s == 7.0 for _, s in hist)

    def test_surrogate_never_worse_than_own_probes(self):
        x1, x2, best, hist = minimize_2d(self.quad_score, *self.BOUNDS,
                                         budget=25, seed=2, mode="surrogate")
        assert best == min(s for _, s in hist)
        assert self.quad_score(x1, x2) == pytest.approx(best)

    def test_surrogate_competitive_with_long_random_search(self):
        # dense-grid oracle for the true optimum of the synthetic surface
        g = np.logspace(-4, 2, 200)
        grid_best = min(self.quad_score(a, b) for a in g for b in g)
        *_, best_rand, _h = minimize_2d(self.quad_score, *self.BOUNDS,
                                        budget=200, seed=3)
        *_, best_sur, _h2 = minimize_2d(self.quad_score, *self.BOUNDS,
                                        budget=30, seed=3, mode="surrogate")
        gap_rand = best_rand - grid_best
        gap_sur = best_sur - grid_best
        assert gap_sur <= 10 * gap_rand + 1e-12

    def test_failures_fall_back_to_best_seen(self):
        def flaky(a, b):
            if a > 1e-2:
                from lgmd.errors import NotConverged
                raise NotConverged("boom")
            return a

        x1, x2, best, hist = minimize_2d(flaky, *self.BOUNDS, budget=20, seed=4)
        assert np.isfinite(best)
        assert x1 <= 1e-2


class TestTuning:
    def cfg(self):
        return ExperimentConfig(task="denoise", methods=["pmf"], n=20, p=16,
                                rank=3, sweep=[0.3], repetitions=1,
                                max_outer=4, max_inner=20, seed=7)

    def test_returns_pair_in_bounds(self):
        cfg = self.cfg()
        l1, l2 = tune_hyperparams(cfg, budget=4)
        assert cfg.lambda1_bounds[0] <= l1 <= cfg.lambda1_bounds[1]
        assert cfg.lambda2_bounds[0] <= l2 <= cfg.lambda2_bounds[1]

    def test_deterministic(self):
        assert tune_hyperparams(self.cfg(), 4) == tune_hyperparams(self.cfg(), 4)

    def test_training_never_reads_holdout(self):
        # the fit sees a mask that excludes validation entries, so perturbing
        # them must leave the fitted factors bit-identical
        cfg = self.cfg()
        inst = gen_instance(cfg.n, cfg.p, cfg.rank, 0.3, 0.06, seed=1)
        mask = gen_mask(cfg.n, cfg.p, 0.8, seed=2)
        val = ~mask
        y1 = DataMatrix(inst.y_no.values, mask)
        perturbed = inst.y_no.values.copy()
        perturbed[val] += 123.0
        y2 = DataMatrix(perturbed, mask)
        h = cfg.hyperparams()
        _f1, fac1, _g1 = _fit_and_factors("pmf", y1, cfg, h)
        _f2, fac2, _g2 = _fit_and_factors("pmf", y2, cfg, h)
        assert np.array_equal(fac1.x, fac2.x)
        assert np.array_equal(fac1.w, fac2.w)
        # scoring on the holdout is the only place the perturbation shows up
        s1 = masked_rmse(y1, fac1.product(), val)
        s2 = masked_rmse(DataMatrix(perturbed), fac2.product(), val)
        assert s1 != s2


def tiny_cfg(**kw):
    base = dict(task="denoise", methods=["pca", "pmf"], n=20, p=16, rank=3,
                edge_fraction=0.1, sweep=[0.3], repetitions=2,
                lambda1=0.01, lambda2=0.01, eta1=3.0, eta2=3.0,
                max_outer=3, max_inner=20, seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


class TestExperiments:
    def test_denoise_rows_and_determinism(self):
        cfg = tiny_cfg()
        r1 = run_denoise(cfg)
        r2 = run_denoise(cfg)
        assert len(r1.rows) == 2 * 2  # methods x reps
        for a, b in zip(r1.rows, r2.rows):
            assert a.method == b.method and a.repetition == b.repetition
            assert a.status == b.status
            assert a.metrics.scalar_items() == b.metrics.scalar_items()

    def test_denoise_metrics_populated(self):
        cfg = tiny_cfg(methods=["pca", "lgmd"])
        rep = run_denoise(cfg)
        ok = [r for r in rep.rows if r.status == "ok"]
        assert len(ok) == len(rep.rows)
        for row in ok:
            assert row.metrics.e2 is not None and row.metrics.e2 >= 0
            assert 0 <= row.metrics.e5 <= np.pi / 2
            assert row.metrics.e7 is not None

    def test_complete_pca_rows_fail_but_run_continues(self):
        cfg = tiny_cfg(task="complete", methods=["pca", "pmf"], sweep=[0.6],
                       lambda1=0.0, lambda2=0.0)
        rep = run_complete(cfg)
        by_method = {}
        for row in rep.rows:
            by_method.setdefault(row.method, []).append(row)
        assert all(r.status.startswith("failed") for r in by_method["pca"])
        assert all(r.status == "ok" for r in by_method["pmf"])
        assert len(rep.rows) == 4

    def test_complete_full_keep_uses_internal_holdout(self):
        cfg = tiny_cfg(task="complete", methods=["pmf"], sweep=[1.0],
                       repetitions=1, lambda1=0.0, lambda2=0.0,
                       max_outer=20, max_inner=50)
        rep = run_complete(cfg)
        row = rep.rows[0]
        assert row.status == "ok"
        assert row.metrics.e1 < 1e-6  # noise-free exact-rank completion

    def test_cluster_separated_mixture_is_easy(self):
        cfg = tiny_cfg(task="cluster", methods=["kmeans", "pmf"], n=60, p=20,
                       rank=4, sweep=[3], repetitions=2, sigma_ratio=0.02,
                       separation=15.0, lambda1=0.0, lambda2=0.0)
        rep = run_cluster(cfg)
        for row in rep.rows:
            assert row.status == "ok"
            assert row.metrics.clustering_accuracy == pytest.approx(1.0)

    def test_aggregates_recomputable(self):
        cfg = tiny_cfg()
        rep = run_denoise(cfg)
        stored = [dict(a) for a in rep.aggregates]
        rep.finalize()
        assert stored == rep.aggregates
        agg = next(a for a in rep.aggregates if a["method"] == "pca")
        vals = [r.metrics.e2 for r in rep.rows
                if r.method == "pca" and r.status == "ok"]
        assert agg["e2_mean"] == pytest.approx(np.mean(vals), abs=1e-12)


class TestEmitReport:
    def test_empty_report_header_only(self, tmp_path):
        path = str(tmp_path / "r.csv")
        emit_report(ExperimentReport(task="denoise"), path, "csv")
        lines = open(path).read().strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("method,task,sweep_value,repetition,status")

    def test_json_round_trip(self, tmp_path):
        cfg = tiny_cfg(repetitions=1)
        rep = run_denoise(cfg)
        path = str(tmp_path / "r.json")
        emit_report(rep, path, "json")
        payload = load_report_json(path)
        assert payload["schema_version"] == "1"
        assert len(payload["rows"]) == len(rep.rows)
        emit_report(rep, str(tmp_path / "r2.json"), "json")
        assert (open(path).read() == open(str(tmp_path / "r2.json")).read())

    def test_aggregate_rows_mean_matches_hand_computation(self, tmp_path):
        cfg = tiny_cfg(methods=["pca"], repetitions=3)
        rep = run_denoise(cfg)
        path = str(tmp_path / "r.csv")
        emit_report(rep, path, "csv")
        lines = open(path).read().strip().splitlines()
        header = lines[0].split(",")
        data = [ln.split(",") for ln in lines[1:]]
        e2_col = header.index("e2")
        rows = [float(r[e2_col]) for r in data if r[3].isdigit()]
        mean_row = next(r for r in data if r[3] == "mean")
        assert float(mean_row[e2_col]) == pytest.approx(np.mean(rows), abs=1e-12)


class TestCli:
    def test_synth_then_fit(self, tmp_path):
        cfg = {"n": 15, "p": 12, "rank": 2, "seed": 3, "sigma_ratio": 0.2,
               "max_outer": 2, "max_inner": 10}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "data"
        assert main(["synth", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "y_no.csv").exists()
        fit_out = tmp_path / "fit"
        code = main(["fit", "--config", str(cfg_path), "--input",
                     str(out / "y_no.csv"), "--method", "pmf",
                     "--out", str(fit_out)])
        assert code == 0
        assert (fit_out / "x.csv").exists()
        assert json.load(open(fit_out / "fit.json"))["method"] == "pmf"

    def test_denoise_command_writes_report(self, tmp_path):
        cfg = tiny_cfg().to_dict()
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "rep.csv"
        assert main(["denoise", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert out.exists()

    def test_unknown_config_key_exit_code(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"task": "denoise", "nope": True}))
        assert main(["denoise", "--config", str(cfg_path)]) == 1

    def test_missing_input_exit_code(self, tmp_path):
        assert main(["fit", "--input", str(tmp_path / "absent.csv")]) == 2

    def test_tune_command(self, tmp_path):
        cfg = tiny_cfg(methods=["pmf"], n=16, p=12).to_dict()
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "best.json"
        assert main(["tune", "--config", str(cfg_path), "--budget", "3",
                     "--out", str(out)]) == 0
        best = json.load(open(out))
        assert "lambda1" in best and "lambda2" in best
