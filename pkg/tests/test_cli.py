from __future__ import annotations

import json

import polars as pl
import pytest

from displacement_gp.cli.main import main

FAST = ["--bo-iters", "1", "--bo-init", "3", "--bo-pool", "50"]


@pytest.fixture()
def synthetic_csv(tmp_path):
    out = tmp_path / "synth"
    assert main(["synth", "--n", "40", "--d", "3", "--relevant", "1", "--seed", "2", "--out", str(out)]) == 0
    return out / "synthetic.csv"


def test_validate_bundled_fixture(tmp_path, capsys):
    code = main(["validate", "--out", str(tmp_path)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "229 events, 149 flood, 80 storm: OK"
    payload = json.loads((tmp_path / "validation.json").read_text())
    assert payload["ok"] is True
    assert payload["region_events"] == {"Africa": 93, "Asia": 136}


def test_validate_json_and_mismatch_exit(tmp_path, synthetic_csv, capsys):
    capsys.readouterr()
    code = main(["validate", "--input", str(synthetic_csv), "--out", str(tmp_path), "--json"])
    assert code == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is False
    assert payload["validation"]["summary"].endswith("MISMATCH")


def test_evaluate_composes_region_and_disaster_filters(tmp_path, capsys):
    from displacement_gp.data.reference import fixture_path

    out = tmp_path / "africa_flood"
    args = ["evaluate", "--input", str(fixture_path()), "--region", "Africa", "--disaster", "Flood"]
    assert main([*args, "--runs", "1", "--seed", "0", "--out", str(out), *FAST]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["n_events"] == 79
    assert report["subset"] == "Africa-Flood"
    assert capsys.readouterr().out.startswith("Africa-Flood: N=79")


def test_evaluate_is_byte_identical_across_invocations_and_workers(tmp_path, synthetic_csv):
    outputs = []
    for name, workers in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / name
        argv = ["evaluate", "--input", str(synthetic_csv), "--runs", "2", "--seed", "0", "--workers", workers]
        assert main([*argv, "--out", str(out), *FAST]) == 0
        outputs.append(out)
    for filename in ("report.json", "report.csv", "runs.json", "runs.csv"):
        first = (outputs[0] / filename).read_bytes()
        assert first == (outputs[1] / filename).read_bytes()
        assert first == (outputs[2] / filename).read_bytes()
    runs = pl.read_csv(outputs[0] / "runs.csv")
    assert runs["run_index"].to_list() == [0, 1]
    assert {"r2", "me", "rmse", "nu", "gamma_1", "gamma_3", "sigma_n"} <= set(runs.columns)


def test_rank_writes_table_chart_and_gammas(tmp_path, synthetic_csv):
    pytest.importorskip("vl_convert")
    out = tmp_path / "rank"
    assert main(["rank", "--input", str(synthetic_csv), "--runs", "2", "--out", str(out), *FAST]) == 0
    ranking = pl.read_csv(out / "ranking.csv")
    assert ranking.columns == ["feature", "gamma_median", "mean_rank"]
    assert sorted(ranking["feature"].to_list()) == ["x1", "x2", "x3"]
    assert (out / "ranking.svg").read_text().lstrip().startswith("<svg")
    gammas = pl.read_csv(out / "gammas.csv")
    assert gammas.height == 6
    assert (out / "report.json").exists()


def test_fit_then_predict(tmp_path, synthetic_csv):
    model_dir = tmp_path / "model"
    assert main(["fit", "--input", str(synthetic_csv), "--out", str(model_dir), *FAST]) == 0
    assert (model_dir / "model.json").exists()
    trace = pl.read_csv(model_dir / "trace.csv")
    assert trace.height == 4
    assert trace.columns[:2] == ["iteration", "log10_nu"]
    stats = json.loads((model_dir / "stats.json").read_text())
    assert stats["feature_names"] == ["x1", "x2", "x3"]

    new_events = pl.read_csv(synthetic_csv).drop("idp_count").head(5)
    scoring = tmp_path / "new.csv"
    new_events.write_csv(scoring)
    pred_dir = tmp_path / "pred"
    code = main(["predict", "--model", str(model_dir / "model.json"), "--input", str(scoring), "--out", str(pred_dir)])
    assert code == 0
    preds = pl.read_csv(pred_dir / "predictions.csv")
    assert preds.columns == ["event_id", "mean_log_idp", "variance", "idp_estimate"]
    assert preds.height == 5
    assert (preds["variance"] >= 0).all()


def test_config_file_supplies_defaults(tmp_path, synthetic_csv):
    project = synthetic_csv.parent
    (project / "pyproject.toml").write_text("")
    (project / "displacement-gp.toml").write_text(
        "[experiment]\nruns = 2\n\n[bo]\niterations = 1\ninitial_design_size = 3\ncandidate_pool_size = 40\n"
    )
    out = tmp_path / "cfg"
    assert main(["evaluate", "--input", str(synthetic_csv), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["runs"] == 2
    assert main(["evaluate", "--input", str(synthetic_csv), "--out", str(out), "--runs", "1"]) == 0
    assert json.loads((out / "report.json").read_text())["runs"] == 1


def test_missing_input_is_reported_on_stderr(tmp_path, capsys):
    code = main(["evaluate", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path)])
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_errors_as_json_payload(tmp_path, capsys):
    code = main(["evaluate", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path), "--json"])
    assert code == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is False
    assert payload["error"]


def test_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("event_id,country\nE1,Kenya\n")
    assert main(["fit", "--input", str(bad), "--out", str(tmp_path)]) == 1
    assert "missing mandatory column" in capsys.readouterr().err


def test_unknown_flag_and_bad_enum(capsys):
    assert main(["evaluate", "--input", "x.csv", "--bogus"]) == 2
    assert main(["evaluate", "--input", "x.csv", "--region", "Europe"]) == 2
    assert main([]) == 2
    capsys.readouterr()


def test_bad_bounds_json(tmp_path, synthetic_csv, capsys):
    code = main(["fit", "--input", str(synthetic_csv), "--out", str(tmp_path), "--bounds", "{oops", *FAST])
    assert code == 1
    assert "--bounds" in capsys.readouterr().err


def _project(root, config: str | None = None):
    root.mkdir(parents=True)
    (root / "pyproject.toml").write_text("")
    if config is not None:
        (root / "displacement-gp.toml").write_text(config)
    return root


def test_predict_uses_the_log_features_the_model_was_fit_with(tmp_path, capsys):
    from displacement_gp.data.reference import fixture_path

    events = pl.read_csv(fixture_path())
    fit_dir = _project(tmp_path / "fitting", "[data]\nlog_features = []\n")
    events.write_csv(fit_dir / "events.csv")
    model = tmp_path / "model"
    assert main(["fit", "--input", str(fit_dir / "events.csv"), "--out", str(model), *FAST]) == 0
    assert json.loads((model / "model.json").read_text())["log_features"] == []

    scoring = events.drop("idp_count").head(4)
    predictions = []
    for name, config in (("plain", None), ("matching", "[data]\nlog_features = []\n")):
        project = _project(tmp_path / name, config)
        scoring.write_csv(project / "new.csv")
        out = tmp_path / f"pred_{name}"
        argv = ["predict", "--model", str(model / "model.json"), "--input", str(project / "new.csv")]
        assert main([*argv, "--out", str(out)]) == 0
        predictions.append((out / "predictions.csv").read_bytes())
    assert predictions[0] == predictions[1]

    conflicting = _project(tmp_path / "conflicting", '[data]\nlog_features = ["Pop"]\n')
    scoring.write_csv(conflicting / "new.csv")
    capsys.readouterr()
    argv = ["predict", "--model", str(model / "model.json"), "--input", str(conflicting / "new.csv")]
    assert main([*argv, "--out", str(tmp_path / "pred_conflicting")]) == 1
    assert "log_features" in capsys.readouterr().err


def test_predict_survives_overflowing_estimates(tmp_path, synthetic_csv):
    from displacement_gp.adapters.model_store import save_model
    from displacement_gp.data.pipeline import build_dataset, standardize
    from displacement_gp.data.records import load_csv
    from displacement_gp.gp.core import fit
    from displacement_gp.gp.kernels import HyperParams

    z, stats = standardize(build_dataset(load_csv(synthetic_csv), log_features=()))
    hp = HyperParams(nu=1.0, gamma=(0.5, 0.1, 0.1), sigma_n=0.3)
    model = fit(z.X, z.y - z.y.mean(), hp, feature_names=z.feature_names, stats=stats, target_mean=800.0)
    path = save_model(model, tmp_path / "huge.json")
    out = tmp_path / "pred"
    assert main(["predict", "--model", str(path), "--input", str(synthetic_csv), "--out", str(out)]) == 0
    preds = pl.read_csv(out / "predictions.csv")
    assert preds.height == z.n
    assert (preds["mean_log_idp"] > 709).all()
