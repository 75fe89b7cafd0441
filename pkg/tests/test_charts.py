from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import pytest

from displacement_gp.adapters.charts import chart_spec, ranking_chart, render_ranking_chart, write_ranking_chart
from displacement_gp.gp.kernels import HyperParams
from displacement_gp.service_layer.ranking import FeatureRanking, rank_features

pytest.importorskip("vl_convert")

_WIDTH = re.compile(r"h(-?[\d.]+)v")


def _ranking(*gamma: float) -> FeatureRanking:
    names = [f"f{i + 1}" for i in range(len(gamma))]
    return rank_features([HyperParams(nu=1.0, gamma=gamma, sigma_n=0.1)], names)


def _bar_widths(svg: str) -> list[float]:
    root = ET.fromstring(svg)
    widths: list[float] = []
    for group in root.iter():
        if not group.tag.endswith("g") or "mark-rect" not in (group.get("class") or ""):
            continue
        for path in group:
            match = _WIDTH.search(path.get("d") or "")
            if match:
                widths.append(abs(float(match.group(1))))
    return widths


def test_single_feature_gives_one_bar():
    svg = render_ranking_chart(_ranking(2.0))
    assert len(_bar_widths(svg)) == 1


def test_svg_is_well_formed_xml():
    svg = render_ranking_chart(_ranking(0.1, 5.0, 2.0), title="Global covariate relevance")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")


def test_bar_lengths_are_proportional_to_gamma():
    gammas = (0.5, 4.0, 2.0, 1.0)
    widths = sorted(_bar_widths(render_ranking_chart(_ranking(*gammas))))
    assert len(widths) == 4
    longest = widths[-1]
    for g, w in zip(sorted(gammas), widths):
        assert abs(w - longest * g / max(gammas)) <= 1.0


def test_chart_orders_features_by_rank():
    ranking = _ranking(0.1, 5.0, 2.0)
    spec = chart_spec(ranking_chart(ranking))
    assert spec["encoding"]["y"]["sort"] == ["f2", "f3", "f1"]
    mark = spec["mark"]
    assert (mark["type"] if isinstance(mark, dict) else mark) == "bar"


def test_empty_ranking_is_rejected():
    with pytest.raises(ValueError):
        ranking_chart(FeatureRanking(entries=(), n_runs=0))


def test_write_ranking_chart(tmp_path):
    path = write_ranking_chart(_ranking(1.0, 3.0), tmp_path / "charts" / "ranking.svg")
    assert path.read_text(encoding="utf-8").lstrip().startswith("<svg")
