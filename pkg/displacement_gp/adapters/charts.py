"""Ranking bar chart: an Altair chart rendered to standalone SVG."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import altair as alt

from ..service_layer.ranking import FeatureRanking

logger = logging.getLogger(__name__)

CHART_WIDTH = 400
BAR_STEP = 22


def ranking_chart(ranking: FeatureRanking, *, title: str | None = None) -> alt.Chart:
    """Horizontal bars of median γ_d on a zero-anchored linear axis, rank 1 on top."""
    if len(ranking) == 0:
        raise ValueError("cannot chart an empty ranking")
    rows = ranking.to_rows()
    chart = (
        alt.Chart(alt.Data(values=rows))
        .mark_bar()
        .encode(
            x=alt.X("gamma_median:Q", title="median γ", scale=alt.Scale(zero=True, nice=False)),
            y=alt.Y("feature:N", sort=list(ranking.feature_order), title=None),
            tooltip=[
                alt.Tooltip("feature:N"),
                alt.Tooltip("gamma_median:Q", format=".4g"),
                alt.Tooltip("mean_rank:Q", format=".2f"),
            ],
        )
        .properties(width=CHART_WIDTH, height=alt.Step(BAR_STEP))
    )
    if title:
        chart = chart.properties(title=title)
    return chart


def chart_spec(chart: alt.Chart) -> dict[str, Any]:
    return chart.to_dict(validate=True)


def render_ranking_chart(ranking: FeatureRanking, *, title: str | None = None) -> str:
    import vl_convert as vlc

    spec = chart_spec(ranking_chart(ranking, title=title))
    svg = vlc.vegalite_to_svg(spec)
    logger.debug("ranking_chart_rendered", extra={"features": len(ranking), "bytes": len(svg)})
    return svg


def write_ranking_chart(ranking: FeatureRanking, path: str | Path, *, title: str | None = None) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render_ranking_chart(ranking, title=title), encoding="utf-8")
    return out


__all__ = ["ranking_chart", "chart_spec", "render_ranking_chart", "write_ranking_chart"]
