from __future__ import annotations

from pathlib import Path

import pytest

from displacement_gp.data.records import Disaster, EventRecord, Region, load_csv, records_to_frame, write_csv
from displacement_gp.errors import DataError, ParseError, SchemaError

HEADER = "event_id,country,region,disaster,date,idp_count,Pop,T\n"


def _write(tmp_path: Path, body: str, header: str = HEADER) -> Path:
    path = tmp_path / "events.csv"
    path.write_text(header + body, encoding="utf-8")
    return path


def test_load_csv_parses_rows_and_enums(tmp_path):
    path = _write(
        tmp_path,
        "E1,Kenya,Africa,Flood,2018-05,1200,1000,20.5\n"
        "E2,Kenya, africa ,STORM,,300,2000,\n",
    )
    records = load_csv(path)
    assert [r.event_id for r in records] == ["E1", "E2"]
    assert records[0].region is Region.AFRICA
    assert records[1].disaster is Disaster.STORM
    assert records[0].idp_count == 1200
    assert records[0].features == {"Pop": 1000.0, "T": 20.5}
    assert records[1].features["T"] is None
    assert records[1].date is None


def test_load_csv_reports_every_malformed_cell_with_line_numbers(tmp_path):
    path = _write(
        tmp_path,
        "E1,Kenya,Africa,Flood,2018-05,1200,1000,20.5\n"
        "E2,Kenya,Europe,Flood,2018-13,0,1 000,5\n"
        "E1,,Asia,Flood,2018-01,10,7,abc\n",
    )
    with pytest.raises(ParseError) as info:
        load_csv(path)
    problems = info.value.problems
    lines = [line for line, _ in problems]
    assert lines == sorted(lines)
    text = {(line, msg.split(":")[0]) for line, msg in problems}
    assert (3, "region") in text
    assert (3, "date") in text
    assert (3, "idp_count") in text
    assert (3, "Pop") in text
    assert (4, "country") in text
    assert (4, "event_id") in text
    assert (4, "T") in text
    assert "line 3" in str(info.value)


def test_load_csv_rejects_fractional_idp_count(tmp_path):
    path = _write(tmp_path, "E1,Kenya,Africa,Flood,2018-05,12.5,1000,20.5\n")
    with pytest.raises(ParseError, match="positive integer"):
        load_csv(path)


def test_load_csv_missing_mandatory_column(tmp_path):
    path = _write(tmp_path, "E1,Kenya,Africa,Flood,2018-05,1000,20.5\n", header="event_id,country,region,disaster,date,Pop,T\n")
    with pytest.raises(SchemaError) as info:
        load_csv(path)
    assert info.value.missing == ("idp_count",)


def test_load_csv_without_target_for_scoring(tmp_path):
    path = _write(
        tmp_path,
        "N1,Kenya,Africa,Flood,2020-01,1000,20.5\n",
        header="event_id,country,region,disaster,date,Pop,T\n",
    )
    records = load_csv(path, require_target=False)
    assert records[0].idp_count is None
    assert records[0].features == {"Pop": 1000.0, "T": 20.5}


def test_load_csv_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(DataError):
        load_csv(path)


def test_event_record_rejects_nonpositive_count_and_freezes_features():
    with pytest.raises(DataError):
        EventRecord("E1", "Kenya", Region.AFRICA, Disaster.FLOOD, 0)
    rec = EventRecord("E1", "Kenya", Region.AFRICA, Disaster.FLOOD, 5, {"Pop": 1.0})
    with pytest.raises(TypeError):
        rec.features["Pop"] = 2.0  # type: ignore[index]


def test_region_parse_rejects_unknown():
    with pytest.raises(ValueError):
        Region.parse("Europe")


def test_write_csv_then_load_preserves_records(tmp_path):
    records = [
        EventRecord("E1", "Kenya", Region.AFRICA, Disaster.FLOOD, 100, {"Pop": 10.0, "T": 1.5}, "2018-01"),
        EventRecord("E2", "Nepal", Region.ASIA, Disaster.STORM, 7, {"Pop": 3.0, "T": None}, None),
    ]
    path = write_csv(records, tmp_path / "out" / "events.csv")
    assert load_csv(path) == records
    frame = records_to_frame(records)
    assert frame.columns == ["event_id", "country", "region", "disaster", "date", "idp_count", "Pop", "T"]
