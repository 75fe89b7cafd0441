"""Command-line front end: ``displacement-gp <command> [options]``.

Commands write their artifacts into ``--out``; ``--json`` prints a
machine-readable payload on stdout, otherwise a one-line summary.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from ..adapters.charts import write_ranking_chart
from ..adapters.model_store import load_model, save_model
from ..adapters.reports import write_json, write_rows_csv, write_runs_csv
from ..data.pipeline import DEFAULT_LOG_FEATURES, SubsetFilter, build_dataset, preprocess
from ..data.records import Disaster, Region, load_csv
from ..data.reference import fixture_path, validate_reference_counts
from ..data.synthetic import SynthSpec, generate, write_synthetic_csv
from ..errors import DataError, DisplacementGPError
from ..gp.core import fit, predict_batch
from ..optim.bayesopt import optimize_hyperparameters
from ..optim.space import BOConfig, SearchSpace, trace_rows
from ..service_layer.experiment import ExperimentConfig, ExperimentResult, run_experiment
from ..service_layer.ranking import gamma_table
from .config import load_config, pick

logger = logging.getLogger(__name__)

COMMANDS = ("validate", "fit", "evaluate", "rank", "synth", "predict")
DEFAULT_OUT = "out"
VALIDATION_MISMATCH_EXIT = 2
_BO_DEFAULTS = BOConfig()
_EXP_DEFAULTS = ExperimentConfig()


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, default=DEFAULT_OUT, help="Output directory")
    common.add_argument("--config", type=str, default=None, help="TOML defaults file")
    common.add_argument("--json", action="store_true", help="Print a JSON payload on stdout")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG (stderr)")
    return common


def _subset_parser() -> argparse.ArgumentParser:
    subset = argparse.ArgumentParser(add_help=False)
    subset.add_argument("--region", type=Region.parse, default=None, help="Africa or Asia")
    subset.add_argument("--disaster", type=Disaster.parse, default=None, help="Flood or Storm")
    return subset


def _search_parser() -> argparse.ArgumentParser:
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--seed", type=int, default=None)
    search.add_argument("--bo-iters", type=int, default=None, help="BO iterations after the initial design")
    search.add_argument("--bo-init", type=int, default=None, help="Initial design size (default 2(D+2))")
    search.add_argument("--bo-pool", type=int, default=None, help="EI candidate pool size")
    search.add_argument("--bounds", type=str, default=None, help="log10 bounds as JSON text or a JSON file path")
    search.add_argument("--workers", type=int, default=None, help="Thread workers")
    return search


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="displacement-gp", description="GP regression of disaster displacement counts")
    sub = p.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    common, subset, search = _common_parser(), _subset_parser(), _search_parser()

    v = sub.add_parser("validate", parents=[common], help="Check event counts against the published reference")
    v.add_argument("--input", type=str, default=None, help="Event CSV (default: bundled fixture)")

    f = sub.add_parser("fit", parents=[common, subset, search], help="Optimize hyperparameters and save a model")
    f.add_argument("--input", type=str, required=True)

    for name, text in (("evaluate", "Repeated-split evaluation"), ("rank", "Feature relevance ranking")):
        e = sub.add_parser(name, parents=[common, subset, search], help=text)
        e.add_argument("--input", type=str, required=True)
        e.add_argument("--runs", type=int, default=None)
        e.add_argument("--train-frac", type=float, default=None)

    pr = sub.add_parser("predict", parents=[common, subset], help="Score new events with a saved model")
    pr.add_argument("--model", type=str, required=True)
    pr.add_argument("--input", type=str, required=True)

    s = sub.add_parser("synth", parents=[common], help="Write a synthetic dataset with planted relevant features")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--d", type=int, default=10)
    s.add_argument("--relevant", type=str, default="1,2,3", help="Comma-separated 1-based feature indices")
    s.add_argument("--noise", type=float, default=0.3)
    s.add_argument("--gamma", type=float, default=0.5)
    s.add_argument("--nu", type=float, default=4.0)
    s.add_argument("--sigma-n", type=float, default=None, help="Kernel σ_n recorded as truth (default: --noise)")
    s.add_argument("--seed", type=int, default=0)
    return p


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("displacement_gp").setLevel(level)


def _parse_bounds(text: str | None) -> dict[str, Any]:
    if text is None:
        return {}
    candidate = Path(text)
    raw = candidate.read_text(encoding="utf-8") if candidate.suffix == ".json" and candidate.exists() else text
    try:
        value = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DataError(f"--bounds is not valid JSON: {exc}") from exc
    if not isinstance(value, dict):
        raise DataError("--bounds must be a JSON object")
    return value


def _bounds(args: argparse.Namespace, cfg: dict[str, Any]) -> dict[str, Any]:
    return {**cfg.get("bounds", {}), **_parse_bounds(args.bounds)}


def _bo_config(args: argparse.Namespace, cfg: dict[str, Any], seed: int, workers: int) -> BOConfig:
    return BOConfig(
        initial_design_size=pick(args.bo_init, cfg, ["bo", "initial_design_size"], _BO_DEFAULTS.initial_design_size),
        iterations=int(pick(args.bo_iters, cfg, ["bo", "iterations"], _BO_DEFAULTS.iterations)),
        candidate_pool_size=int(pick(args.bo_pool, cfg, ["bo", "candidate_pool_size"], _BO_DEFAULTS.candidate_pool_size)),
        seed=seed,
        n_jobs=workers,
    )


def _subset(args: argparse.Namespace) -> SubsetFilter:
    return SubsetFilter(region=args.region, disaster=args.disaster)


def _log_features(cfg: dict[str, Any]) -> tuple[str, ...]:
    return tuple(pick(None, cfg, ["data", "log_features"], list(DEFAULT_LOG_FEATURES)))


def _emit(args: argparse.Namespace, payload: dict[str, Any], line: str) -> None:
    if args.json:
        print(json.dumps(payload))  # noqa: T201
    else:
        print(line)  # noqa: T201


def _cmd_validate(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    path = Path(args.input) if args.input else fixture_path()
    report = validate_reference_counts(load_csv(path))
    out = Path(args.out)
    write_json(report.to_dict(), out / "validation.json")
    for check in report.country_mismatches:
        logger.warning(
            "country_count_mismatch",
            extra={"country": check.scope, "disaster": check.disaster, "expected": check.expected_events, "observed": check.observed_events},
        )
    _emit(args, {"ok": report.ok, "input": str(path), "validation": report.to_dict()}, report.summary())
    return 0 if report.ok else VALIDATION_MISMATCH_EXIT


def _experiment_config(args: argparse.Namespace, cfg: dict[str, Any]) -> ExperimentConfig:
    seed = int(pick(args.seed, cfg, ["experiment", "seed"], _EXP_DEFAULTS.base_seed))
    workers = int(pick(args.workers, cfg, ["experiment", "workers"], _EXP_DEFAULTS.workers))
    return ExperimentConfig(
        filter=_subset(args),
        runs=int(pick(args.runs, cfg, ["experiment", "runs"], _EXP_DEFAULTS.runs)),
        train_fraction=float(pick(args.train_frac, cfg, ["experiment", "train_fraction"], _EXP_DEFAULTS.train_fraction)),
        base_seed=seed,
        bo=_bo_config(args, cfg, seed, 1),
        bounds=_bounds(args, cfg),
        workers=workers,
        log_features=_log_features(cfg),
    )


def _run(args: argparse.Namespace, cfg: dict[str, Any]) -> tuple[ExperimentConfig, ExperimentResult]:
    config = _experiment_config(args, cfg)
    dataset = build_dataset(load_csv(args.input), config.filter, log_features=config.log_features)
    return config, run_experiment(dataset, config)


def _cmd_evaluate(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    _, result = _run(args, cfg)
    out = Path(args.out)
    runs = [r.to_dict() for r in result.runs]
    write_json(result.report.to_dict(), out / "report.json")
    write_rows_csv([result.report.to_row()], out / "report.csv")
    write_json(runs, out / "runs.json")
    write_runs_csv(runs, out / "runs.csv")
    r = result.report
    line = (
        f"{r.subset}: N={r.n_events} D={r.n_features} runs={r.runs} "
        f"r2={r.r2_mean:.3f}±{r.r2_std:.3f} ME={r.me_mean:.3f}±{r.me_std:.3f} RMSE={r.rmse_mean:.3f}±{r.rmse_std:.3f}"
    )
    _emit(args, {"ok": True, "report": r.to_dict(), "out": str(out)}, line)
    return 0


def _cmd_rank(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    _, result = _run(args, cfg)
    out = Path(args.out)
    ranking = result.ranking
    write_rows_csv(ranking.to_rows(), out / "ranking.csv", columns=["feature", "gamma_median", "mean_rank"])
    write_ranking_chart(ranking, out / "ranking.svg", title=f"{result.report.subset} covariate relevance")
    write_rows_csv(
        gamma_table(result.runs, result.report.feature_names),
        out / "gammas.csv",
        columns=["run_index", "feature", "gamma", "rank"],
    )
    write_json(result.report.to_dict(), out / "report.json")
    _emit(
        args,
        {"ok": True, "ranking": ranking.to_rows(), "report": result.report.to_dict(), "out": str(out)},
        f"{result.report.subset}: " + " > ".join(ranking.feature_order),
    )
    return 0


def _cmd_fit(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    subset = _subset(args)
    seed = int(pick(args.seed, cfg, ["experiment", "seed"], _EXP_DEFAULTS.base_seed))
    workers = int(pick(args.workers, cfg, ["experiment", "workers"], _EXP_DEFAULTS.workers))
    log_features = _log_features(cfg)
    data, stats = preprocess(load_csv(args.input), subset, log_features=log_features)
    y_mean = float(data.y.mean())
    space = SearchSpace.from_bounds(_bounds(args, cfg), data.d)
    hp, history = optimize_hyperparameters(data.X, data.y - y_mean, space, _bo_config(args, cfg, seed, workers))
    model = fit(
        data.X,
        data.y - y_mean,
        hp,
        feature_names=data.feature_names,
        stats=stats,
        target_mean=y_mean,
        log_features=log_features,
    )
    out = Path(args.out)
    meta = {"subset": subset.to_dict(), "seed": seed, "n_events": data.n}
    save_model(model, out / "model.json", metadata=meta)
    write_rows_csv(trace_rows(history), out / "trace.csv")
    write_json(stats.to_dict(), out / "stats.json")
    _emit(
        args,
        {"ok": True, "hyperparameters": hp.to_dict(), "evaluations": len(history), "out": str(out)},
        f"{subset.label}: N={data.n} D={data.d} fitted after {len(history)} evaluations",
    )
    return 0


def _cmd_predict(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    model = load_model(args.model)
    if model.stats is None:
        raise DataError(f"{args.model}: model carries no standardization stats")
    configured = pick(None, cfg, ["data", "log_features"], None)
    if configured is not None and tuple(configured) != model.log_features:
        raise DataError(
            f"config log_features {list(configured)} differ from the model's {list(model.log_features)}"
        )
    records = load_csv(args.input, require_target=False)
    data, _ = preprocess(
        records, _subset(args), model.stats, log_features=model.log_features, require_target=False
    )
    mean, var = predict_batch(model, data.X)
    mean = mean + model.target_mean
    with np.errstate(over="ignore"):
        estimate = np.exp(mean)
    rows = [
        {"event_id": m.event_id, "mean_log_idp": float(mu), "variance": float(s2), "idp_estimate": float(e)}
        for m, mu, s2, e in zip(data.meta, mean, var, estimate)
    ]
    out = Path(args.out)
    write_rows_csv(rows, out / "predictions.csv", columns=["event_id", "mean_log_idp", "variance", "idp_estimate"])
    _emit(
        args,
        {"ok": True, "predicted": len(rows), "skipped": list(data.dropped_rows), "out": str(out)},
        f"predicted {len(rows)} event(s); skipped {len(data.dropped_rows)} with missing features",
    )
    return 0


def _parse_relevant(text: str) -> frozenset[int]:
    try:
        return frozenset(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise DataError(f"--relevant must list integers, got {text!r}") from exc


def _cmd_synth(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    spec = SynthSpec.planted(
        args.n,
        args.d,
        _parse_relevant(args.relevant),
        gamma=args.gamma,
        nu=args.nu,
        sigma_n=args.sigma_n if args.sigma_n is not None else max(args.noise, 1e-3),
        noise_sigma=args.noise,
        seed=args.seed,
    )
    dataset, truth = generate(spec)
    out = Path(args.out)
    write_synthetic_csv(dataset, out / "synthetic.csv")
    write_json(truth.to_dict(), out / "ground_truth.json")
    _emit(
        args,
        {"ok": True, "n": dataset.n, "d": dataset.d, "relevant": list(truth.relevant_names), "out": str(out)},
        f"wrote {dataset.n} synthetic events with {dataset.d} features (relevant: {', '.join(truth.relevant_names)})",
    )
    return 0


_HANDLERS = {
    "validate": _cmd_validate,
    "fit": _cmd_fit,
    "evaluate": _cmd_evaluate,
    "rank": _cmd_rank,
    "synth": _cmd_synth,
    "predict": _cmd_predict,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)

    try:
        input_path = getattr(args, "input", None)
        cfg = load_config(args.config, start=Path(input_path) if input_path else None)
        return _HANDLERS[args.command](args, cfg)
    except (DisplacementGPError, ValueError, ArithmeticError, OSError) as exc:
        logger.debug("command_failed", exc_info=True)
        if args.json:
            print(json.dumps({"ok": False, "error": str(exc)}))  # noqa: T201
        else:
            print(f"error: {exc}", file=sys.stderr)  # noqa: T201
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
