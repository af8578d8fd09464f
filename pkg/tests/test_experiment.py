import csv
import json
import math

import numpy as np
import pytest

from mmspace import (
    ExperimentConfig,
    InvalidArgumentError,
    load_config,
    run_experiment,
    write_cloud_csv,
)
from mmspace.experiment import CSV_COLUMNS

from helpers import random_space


def interval_config(**overrides):
    base = dict(generator="interval", k=1, sizes=[20, 40], trials=2, seed=0)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfig:
    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="interval", sizes=[])
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="interval", sizes=[40, 20])
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="interval", sizes=[20, 20])
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="interval", trials=0)
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="interval", solver="magic")
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="interval", reference="explicit")
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig(generator="file", generator_params={"path": "/no/such"})

    def test_digest_is_stable_and_sensitive(self):
        a = interval_config()
        b = interval_config()
        c = interval_config(seed=1)
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()
        assert len(a.digest()) == 64

    def test_digest_handles_array_params(self):
        cfg = ExperimentConfig(
            generator="mixture",
            generator_params={
                "centers": np.array([[0.0, 0.0], [1.0, 1.0]]),
                "scales": np.array([0.5, 0.5]),
            },
            sizes=[10],
        )
        assert len(cfg.digest()) == 64
        doc = cfg.to_dict()
        json.dumps(doc)  # must be serializable as-is

    def test_explicit_reference_kept(self):
        cfg = ExperimentConfig(
            generator="interval",
            sizes=[10],
            reference="explicit",
            reference_centers=np.array([[0.5]]),
        )
        assert cfg.reference == "explicit"


class TestLoadConfig:
    def test_full_roundtrip(self, tmp_path):
        text = """
[data]
generator = mixture
centers = -3 0; 3 0
scales = 0.2 0.2

[metric]
method = euclid

[kmeans]
k = 2
p = 2.0
solver = exact

[run]
sizes = 30 60
trials = 3
seed = 7
"""
        path = tmp_path / "exp.ini"
        path.write_text(text)
        cfg = load_config(path)
        assert cfg.generator == "mixture"
        assert cfg.generator_params["centers"].shape == (2, 2)
        assert cfg.generator_params["scales"].tolist() == [0.2, 0.2]
        assert cfg.k == 2
        assert cfg.sizes == [30, 60]
        assert cfg.trials == 3
        assert cfg.seed == 7
        assert cfg.reference == "self"

    def test_metric_params_typed(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[data]\ngenerator = circle\n"
            "[metric]\nmethod = isomap\neps = 0.5\nknn = 8\n"
            "[run]\nsizes = 50\n"
        )
        cfg = load_config(path)
        assert cfg.method == "isomap"
        assert cfg.method_params == {"eps": 0.5, "knn": 8}

    def test_explicit_reference_rows(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[data]\ngenerator = interval\n"
            "[run]\nsizes = 20\nreference = 0.25; 0.75\n"
        )
        cfg = load_config(path)
        assert cfg.reference == "explicit"
        assert cfg.reference_centers.tolist() == [[0.25], [0.75]]

    def test_inline_comments(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[run]\nsizes = 10 20  # two sizes\nseed = 3\n")
        cfg = load_config(path)
        assert cfg.sizes == [10, 20]

    def test_missing_file_and_bad_value(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            load_config(tmp_path / "absent.ini")
        path = tmp_path / "exp.ini"
        path.write_text("[run]\ntrials = soon\n")
        with pytest.raises(InvalidArgumentError):
            load_config(path)


class TestRunExperiment:
    def test_row_grid_and_schema(self):
        res = run_experiment(interval_config())
        assert len(res.rows) == 4
        assert [(r["n"], r["trial"]) for r in res.rows] == [
            (20, 0), (20, 1), (40, 0), (40, 1)
        ]
        for row in res.rows:
            assert set(row) == set(CSV_COLUMNS)
            assert row["status"] == "ok"
            assert row["n_minimizers"] >= 1
            assert row["objective"] >= 0.0

    def test_interval_euclid_defect_is_zero(self):
        res = run_experiment(interval_config())
        for row in res.rows:
            assert row["metric_defect"] == 0.0
            assert 0.0 < row["covering_radius"] < 0.5

    def test_self_reference_deviation(self):
        res = run_experiment(interval_config())
        by_key = {(r["n"], r["trial"]): r for r in res.rows}
        for trial in (0, 1):
            # largest size is its own reference within the trial
            assert by_key[(40, trial)]["center_deviation"] == pytest.approx(0.0, abs=1e-12)
            assert math.isfinite(by_key[(20, trial)]["center_deviation"])

    def test_explicit_reference(self):
        cfg = interval_config(
            reference="explicit", reference_centers=np.array([[0.5]])
        )
        res = run_experiment(cfg)
        for row in res.rows:
            assert row["center_deviation"] == pytest.approx(
                abs(0.5 - float(row["centers"].split("|")[0])), abs=1e-12
            )
            assert math.isfinite(row["cluster_deviation"])

    def test_error_rows_do_not_stop_the_run(self):
        # isomap with a tiny eps disconnects every cloud
        cfg = ExperimentConfig(
            generator="circle",
            method="isomap",
            method_params={"eps": 1e-6},
            sizes=[10],
            trials=2,
        )
        res = run_experiment(cfg)
        assert len(res.rows) == 2
        for row in res.rows:
            assert row["status"] == "error"
            assert "DisconnectedGraphError" in row["error"]
        assert res.summary["failed"] == 2

    def test_summary_medians(self):
        res = run_experiment(interval_config())
        per_n = res.summary["per_n"]
        assert set(per_n) == {"20", "40"}
        assert per_n["20"]["ok"] == 2
        objs = sorted(r["objective"] for r in res.rows if r["n"] == 20)
        assert per_n["20"]["median_objective"] == pytest.approx(
            float(np.median(objs))
        )
        assert res.summary["config_sha256"] == interval_config().digest()

    def test_file_generator(self, tmp_path):
        rng = np.random.default_rng(0)
        _, pts = random_space(rng, 30, dim=1)
        from mmspace import PointCloud

        path = tmp_path / "cloud.csv"
        write_cloud_csv(path, PointCloud(pts, 1))
        cfg = ExperimentConfig(
            generator="file",
            generator_params={"path": str(path)},
            method="euclid",
            sizes=[10, 30],
            trials=1,
        )
        res = run_experiment(cfg)
        assert all(r["status"] == "ok" for r in res.rows)

    def test_outputs_byte_deterministic(self, tmp_path, monkeypatch):
        cfg = interval_config()
        monkeypatch.setenv("MM_THREADS", "1")
        run_experiment(cfg, out_dir=tmp_path / "a")
        monkeypatch.setenv("MM_THREADS", "8")
        run_experiment(cfg, out_dir=tmp_path / "b")
        for name in ("results.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_csv_layout(self, tmp_path):
        run_experiment(interval_config(), out_dir=tmp_path)
        with open(tmp_path / "results.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == CSV_COLUMNS
        assert len(rows) == 4
        # NaN cells must be written empty, not as "nan"
        for row in rows:
            assert row["cluster_deviation"] != "nan"
        data = json.loads((tmp_path / "summary.json").read_text())
        assert data["rows"] == 4

    def test_pam_solver_path(self):
        cfg = interval_config(solver="pam", restarts=2, sizes=[15], trials=1)
        res = run_experiment(cfg)
        assert res.rows[0]["status"] == "ok"
