from __future__ import annotations

import pytest

from displacement_gp.cli.config import discover_config, load_config, pick
from displacement_gp.errors import DataError


def test_discovers_config_at_project_root(tmp_path):
    (tmp_path / "pyproject.toml").write_text("")
    (tmp_path / "displacement-gp.toml").write_text("[experiment]\nruns = 7\n\n[bo]\niterations = 3\n")
    nested = tmp_path / "data" / "events.csv"
    nested.parent.mkdir()
    nested.write_text("")
    assert discover_config(nested) == tmp_path / "displacement-gp.toml"
    cfg = load_config(start=nested)
    assert cfg == {"experiment": {"runs": 7}, "bo": {"iterations": 3}}


def test_wrapper_table_and_unknown_sections(tmp_path):
    path = tmp_path / "custom.toml"
    path.write_text('[displacement_gp.bounds]\nsigma_n = [-2, 0]\n\n[displacement_gp.extra]\nx = 1\n')
    assert load_config(path) == {"bounds": {"sigma_n": [-2, 0]}}


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[experiment\n")
    with pytest.raises(DataError):
        load_config(bad)


def test_no_config_found_gives_empty(tmp_path):
    (tmp_path / ".git").mkdir()
    assert load_config(start=tmp_path) == {}


def test_pick_priority():
    cfg = {"experiment": {"runs": 5}}
    assert pick(9, cfg, ["experiment", "runs"], 100) == 9
    assert pick(None, cfg, ["experiment", "runs"], 100) == 5
    assert pick(None, cfg, ["experiment", "seed"], 0) == 0
    assert pick(None, {}, ["bo", "iterations"], 200) == 200
