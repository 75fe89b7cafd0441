from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from displacement_gp.data.pipeline import SubsetFilter
from displacement_gp.data.records import Disaster, Region
from displacement_gp.data.synthetic import SynthSpec, generate
from displacement_gp.errors import DataError, DimensionError, OptimizationFailedError, RunFailedError
from displacement_gp.optim.space import BOConfig, SearchSpace
from displacement_gp.service_layer import experiment
from displacement_gp.service_layer.experiment import ExperimentConfig, compute_metrics, run_experiment

FAST_BO = BOConfig(initial_design_size=4, iterations=2, candidate_pool_size=64)


@pytest.fixture(scope="module")
def small_dataset():
    data, _ = generate(SynthSpec.planted(40, 3, {1}, noise_sigma=0.2, seed=11))
    return data


def test_metrics_perfect_fit():
    m = compute_metrics([0.0, 1.0, 2.0, 5.0], [0.0, 1.0, 2.0, 5.0])
    assert (m.r2, m.me, m.rmse) == pytest.approx((1.0, 0.0, 0.0))


def test_metrics_constant_offset():
    y = np.array([0.3, -1.2, 2.5, 0.7])
    m = compute_metrics(y, y + 0.5)
    assert m.r2 == pytest.approx(1.0)
    assert m.me == pytest.approx(0.5)
    assert m.rmse == pytest.approx(0.5)


def test_metrics_hand_computed_example():
    m = compute_metrics([0, 1, 2], [0, 2, 4])
    assert m.r2 == pytest.approx(1.0)
    assert m.me == pytest.approx(1.0)
    assert m.rmse == pytest.approx(math.sqrt(5 / 3))
    assert m.rmse == pytest.approx(1.2910, abs=1e-4)


def test_metric_identities_on_random_vectors():
    rng = np.random.default_rng(0)
    for _ in range(25):
        t = rng.normal(size=30)
        p = t + rng.normal(scale=0.7, size=30) + rng.normal()
        m = compute_metrics(t, p)
        assert m.rmse**2 == pytest.approx(m.me**2 + np.var(p - t), abs=1e-10)
        a, b = rng.uniform(0.1, 10.0), rng.normal()
        assert compute_metrics(t, a * p + b).r2 == pytest.approx(m.r2, abs=1e-12)
        assert 0.0 <= m.r2 <= 1.0


def test_metrics_errors_and_constant_prediction():
    with pytest.raises(DataError):
        compute_metrics([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(DimensionError):
        compute_metrics([1.0, 2.0], [1.0])
    with pytest.raises(DimensionError):
        compute_metrics([], [])
    assert compute_metrics([0.0, 1.0, 2.0], [1.0, 1.0, 1.0]).r2 == 0.0


def test_experiment_config_validation_and_space():
    with pytest.raises(ValueError):
        ExperimentConfig(runs=0)
    with pytest.raises(ValueError):
        ExperimentConfig(train_fraction=1.5)
    cfg = ExperimentConfig(bounds={"sigma_n": [-2, 0]})
    assert cfg.search_space(2).upper.tolist() == [3.0, 2.0, 2.0, 0.0]
    with pytest.raises(DimensionError):
        ExperimentConfig(space=SearchSpace.default(3)).search_space(2)


def test_single_run_has_zero_spread(small_dataset):
    result = run_experiment(small_dataset, ExperimentConfig(runs=1, bo=FAST_BO))
    r = result.report
    assert r.runs == 1
    assert (r.r2_std, r.me_std, r.rmse_std) == (0.0, 0.0, 0.0)
    assert r.n_events == 40
    assert result.runs[0].n_train == 30
    assert result.runs[0].n_test == 10
    assert len(result.ranking) == 3


def test_experiment_is_deterministic_and_worker_independent(small_dataset):
    cfg = ExperimentConfig(runs=3, base_seed=5, bo=FAST_BO)
    a = run_experiment(small_dataset, cfg)
    b = run_experiment(small_dataset, cfg)
    c = run_experiment(small_dataset, replace(cfg, workers=3))
    assert a.report == b.report == c.report
    assert [r.to_dict() for r in a.runs] == [r.to_dict() for r in c.runs]
    assert [r.run_index for r in c.runs] == [0, 1, 2]
    assert [r.seed for r in a.runs] == [5, 6, 7]
    assert a.ranking == c.ranking


def test_experiment_applies_subset_filter(small_dataset):
    cfg = ExperimentConfig(filter=SubsetFilter(Region.AFRICA, Disaster.FLOOD), runs=1, bo=FAST_BO)
    result = run_experiment(small_dataset, cfg)
    assert result.report.subset == "Africa-Flood"
    assert result.report.n_events == 10


def test_experiment_requires_eight_events(small_dataset):
    with pytest.raises(DataError, match="at least 8"):
        run_experiment(small_dataset.subset(range(7)), ExperimentConfig(runs=1, bo=FAST_BO))


def test_constant_features_are_dropped_before_runs(small_dataset):
    X = np.column_stack([small_dataset.X, np.full(small_dataset.n, 2.0)])
    data = replace(small_dataset, X=X, feature_names=(*small_dataset.feature_names, "flat"))
    result = run_experiment(data, ExperimentConfig(runs=1, bo=FAST_BO))
    assert result.report.dropped_features == ("flat",)
    assert "flat" not in result.ranking.feature_order
    assert result.runs[0].fitted_hp.dim == 3


def test_failed_run_reports_its_index(small_dataset, monkeypatch):
    real = experiment.optimize_hyperparameters

    def flaky(X, y, space, config):
        if config.seed == 1:
            raise OptimizationFailedError("every evaluation failed")
        return real(X, y, space, config)

    monkeypatch.setattr(experiment, "optimize_hyperparameters", flaky)
    with pytest.raises(RunFailedError) as info:
        run_experiment(small_dataset, ExperimentConfig(runs=3, bo=FAST_BO))
    assert info.value.run_index == 1
    assert isinstance(info.value.cause, OptimizationFailedError)


def test_report_dict_forms(small_dataset):
    result = run_experiment(small_dataset, ExperimentConfig(runs=2, bo=FAST_BO))
    row = result.report.to_row()
    assert set(row) == {
        "subset", "n_events", "n_features", "runs",
        "r2_mean", "r2_std", "me_mean", "me_std", "rmse_mean", "rmse_std",
    }
    run = result.runs[0].to_dict()
    assert set(run["hyperparameters"]) == {"nu", "gamma", "sigma_n"}
    assert run["evaluations"] == 6
