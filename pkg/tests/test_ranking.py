from __future__ import annotations

import pytest

from displacement_gp.errors import DimensionError
from displacement_gp.gp.kernels import HyperParams
from displacement_gp.service_layer.ranking import gamma_table, rank_features


def _hp(*gamma: float) -> HyperParams:
    return HyperParams(nu=1.0, gamma=gamma, sigma_n=0.1)


class StubRun:
    def __init__(self, run_index: int, hp: HyperParams):
        self.run_index = run_index
        self.fitted_hp = hp


def test_single_run_sorts_by_gamma():
    ranking = rank_features([_hp(0.1, 5.0, 2.0)], ["f1", "f2", "f3"])
    assert ranking.feature_order == ("f2", "f3", "f1")
    assert [e.mean_rank for e in ranking.entries] == [1.0, 2.0, 3.0]
    assert ranking.entries[0].gamma_median == 5.0


def test_equal_gammas_keep_input_order():
    ranking = rank_features([_hp(1.0, 1.0, 1.0)], ["a", "b", "c"])
    assert ranking.feature_order == ("a", "b", "c")


def test_mean_rank_ties_keep_input_order():
    ranking = rank_features([_hp(3.0, 1.0), _hp(1.0, 3.0)], ["a", "b"])
    assert ranking.feature_order == ("a", "b")
    assert [e.mean_rank for e in ranking.entries] == [1.5, 1.5]
    assert [e.gamma_median for e in ranking.entries] == [2.0, 2.0]
    assert ranking.n_runs == 2


def test_ranking_is_scale_invariant():
    fitted = [_hp(0.3, 2.0, 0.01, 7.0), _hp(0.5, 1.0, 0.02, 9.0), _hp(4.0, 1.5, 0.03, 6.0)]
    names = ["w", "x", "y", "z"]
    scaled = [_hp(*(1e3 * g for g in hp.gamma)) for hp in fitted]
    assert rank_features(fitted, names).feature_order == rank_features(scaled, names).feature_order


def test_median_gamma_is_reported():
    ranking = rank_features([_hp(1.0), _hp(100.0), _hp(3.0)], ["only"])
    assert ranking.entries[0].gamma_median == 3.0
    assert ranking.to_rows() == [{"feature": "only", "gamma_median": 3.0, "mean_rank": 1.0}]


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        rank_features([_hp(1.0, 2.0), _hp(1.0)], ["a", "b"])
    with pytest.raises(DimensionError):
        rank_features([_hp(1.0, 2.0)], ["a"])
    with pytest.raises(ValueError):
        rank_features([], ["a"])


def test_gamma_table_rows():
    runs = [StubRun(0, _hp(0.5, 2.0)), StubRun(1, _hp(3.0, 1.0))]
    rows = gamma_table(runs, ["a", "b"])  # type: ignore[arg-type]
    assert rows == [
        {"run_index": 0, "feature": "a", "gamma": 0.5, "rank": 2},
        {"run_index": 0, "feature": "b", "gamma": 2.0, "rank": 1},
        {"run_index": 1, "feature": "a", "gamma": 3.0, "rank": 1},
        {"run_index": 1, "feature": "b", "gamma": 1.0, "rank": 2},
    ]
