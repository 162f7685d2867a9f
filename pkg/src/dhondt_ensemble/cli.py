"""Experiment runner: JSON config plus flag overrides, CSV/JSON exports.

Single runs write results.json, weights_global.csv, weights_users.csv,
clicks.csv and summary.csv into the output directory. Matrix mode replays
every variant x behaviour combination against the same trained recommenders
and collects one summary row per cell.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .events import EventStream, lexical_key
from .ingestion import (
    DatasetConfig,
    DatasetError,
    SyntheticSpec,
    load,
    load_item_attributes,
    split,
)
from .recommenders import KINDS, Recommender, RecommenderSpec, default_roster, train_ensemble
from .simulation import (
    BEHAVIOUR_KINDS,
    BehaviourModel,
    SimulationConfig,
    SimulationReport,
    run,
)
from .weights import ColdStartPolicy, MixingSchedule, Variant

logger = logging.getLogger("dhondt_ensemble")

TRAJECTORY_ROW_LIMIT = 10_000

_DATASET_KEYS = {
    "source",
    "path",
    "min_user_events",
    "train_fraction",
    "eval_fraction",
    "views_only",
    "item_attributes",
    "synthetic",
}
_SYNTHETIC_KEYS = {
    "n_users",
    "n_items",
    "n_events",
    "minority_fraction",
    "preference_skew",
    "seed",
    "user_activity",
}
_SIMULATION_KEYS = {
    "variant",
    "behaviour",
    "window_size",
    "candidates_k",
    "list_n",
    "eta_global",
    "eta_personal",
    "normalize_responsibility",
    "skip_underdeveloped",
    "cold_start",
    "ramp_length",
    "seed",
}
_RECOMMENDER_KEYS = {"kind", "hyperparameters"}
_TOP_KEYS = {"dataset", "simulation", "recommenders", "output_dir"}


class ConfigError(ValueError):
    """Raised for malformed experiment configs."""


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    simulation: SimulationConfig
    recommenders: Tuple[RecommenderSpec, ...]
    output_dir: str = "results"


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        listed = ", ".join(f"{where}.{key}" for key in unknown)
        raise ConfigError(f"unknown config keys: {listed}")


def _sniff_source(path: str) -> str:
    """Pick a CSV flavor from the header line."""
    try:
        with open(path, encoding="utf-8") as handle:
            header = handle.readline()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset file {path}: {exc}") from exc
    columns = [c.strip().lower() for c in header.strip().split(",")]
    if "visitorid" in columns and "itemid" in columns:
        return "retailrocket-csv"
    if "user" in columns and "item" in columns:
        return "generic-csv"
    raise DatasetError(f"{path}:1: unrecognized header {header.strip()!r}")


def _enum_value(enum_cls, token, where: str):
    try:
        return enum_cls(token)
    except ValueError:
        options = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"{where}: unknown value {token!r}; expected one of {options}") from None


def parse_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Resolve a JSON config file and flag overrides into an ExperimentConfig.

    Flags win over file values; defaults fill the rest. Unknown keys at any
    level abort with a message naming them.
    """
    overrides = dict(overrides or {})
    raw: dict = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")

    _reject_unknown(raw, _TOP_KEYS, "config")
    dataset_raw = dict(raw.get("dataset") or {})
    simulation_raw = dict(raw.get("simulation") or {})
    recommenders_raw = raw.get("recommenders")
    _reject_unknown(dataset_raw, _DATASET_KEYS, "dataset")
    _reject_unknown(simulation_raw, _SIMULATION_KEYS, "simulation")

    if overrides.get("dataset") is not None:
        dataset_raw["path"] = overrides["dataset"]
    for key in ("variant", "behaviour", "seed"):
        if overrides.get(key) is not None:
            simulation_raw[key] = overrides[key]

    synthetic_raw = dict(dataset_raw.pop("synthetic", None) or {})
    _reject_unknown(synthetic_raw, _SYNTHETIC_KEYS, "dataset.synthetic")
    source = dataset_raw.pop("source", None)
    data_path = dataset_raw.pop("path", None)
    if source is None:
        if data_path is None:
            raise ConfigError("missing dataset path: set dataset.path, dataset.source, or --dataset")
        source = _sniff_source(data_path)
    try:
        dataset = DatasetConfig(
            source=source,
            path=data_path,
            synthetic=SyntheticSpec(**synthetic_raw),
            **dataset_raw,
        )
    except TypeError as exc:
        raise ConfigError(f"dataset: {exc}") from exc

    variant = _enum_value(Variant, simulation_raw.pop("variant", Variant.GLOBAL_ONLY.value), "simulation.variant")
    behaviour_kind = simulation_raw.pop("behaviour", "stat08")
    list_n = simulation_raw.pop("list_n", 20)
    cold_start = _enum_value(
        ColdStartPolicy,
        simulation_raw.pop("cold_start", ColdStartPolicy.UNIFORM.value),
        "simulation.cold_start",
    )
    ramp_length = simulation_raw.pop("ramp_length", 100)
    try:
        simulation = SimulationConfig(
            variant=variant,
            behaviour=BehaviourModel(kind=behaviour_kind, list_length=list_n),
            list_n=list_n,
            cold_start=cold_start,
            mixing=MixingSchedule(ramp_length=ramp_length),
            **simulation_raw,
        )
    except TypeError as exc:
        raise ConfigError(f"simulation: {exc}") from exc

    if recommenders_raw is None:
        recommenders = default_roster()
    else:
        if not isinstance(recommenders_raw, list) or not recommenders_raw:
            raise ConfigError("recommenders must be a non-empty list")
        specs = []
        for position, entry in enumerate(recommenders_raw):
            if not isinstance(entry, dict):
                raise ConfigError(f"recommenders[{position}] must be an object")
            _reject_unknown(entry, _RECOMMENDER_KEYS, f"recommenders[{position}]")
            kind = entry.get("kind")
            if kind not in KINDS:
                raise ConfigError(f"recommenders[{position}].kind: unknown kind {kind!r}; expected one of {KINDS}")
            specs.append(RecommenderSpec(kind=kind, hyperparameters=dict(entry.get("hyperparameters") or {})))
        recommenders = tuple(specs)

    output_dir = overrides.get("output_dir") or raw.get("output_dir") or "results"
    return ExperimentConfig(
        dataset=dataset,
        simulation=simulation,
        recommenders=recommenders,
        output_dir=str(output_dir),
    )


def _real(value: float) -> str:
    # repr round-trips doubles exactly, which is what the plot tool needs
    return repr(float(value))


def _downsample(n_rows: int, limit: int = TRAJECTORY_ROW_LIMIT) -> List[int]:
    """Indices to keep: evenly strided from the end so the final row survives."""
    if n_rows <= limit:
        return list(range(n_rows))
    stride = math.ceil(n_rows / limit)
    return list(range(n_rows - 1, -1, -stride))[::-1]


def _write_weights_csv(
    path: Path,
    kinds: Sequence[str],
    series: List[Tuple[str, List[Tuple[int, Tuple[float, ...]]]]],
) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["iteration", "model_id", *kinds])
        for model_id, rows in series:
            for row_index in _downsample(len(rows)):
                iteration, weights = rows[row_index]
                writer.writerow([iteration, model_id, *(_real(w) for w in weights)])


def _report_payload(report: SimulationReport, simulation: SimulationConfig) -> dict:
    kinds = report.recommender_kinds
    personal = report.dominant_personal_majority()
    sorted_users = sorted(report.per_user, key=lexical_key)
    return {
        "variant": report.variant,
        "behaviour": report.behaviour_kind,
        "recommenders": list(kinds),
        "totals": {
            "events": report.total_events,
            "recommendations": report.total_recommendations,
            "clicks": report.total_clicks,
        },
        "ctr": report.ctr,
        "per_user": {
            str(user): {
                "recommendations": report.per_user[user][0],
                "clicks": report.per_user[user][1],
            }
            for user in sorted_users
        },
        "final_weights": {
            "global": list(report.global_model.weights),
            "users": {
                str(user): list(model.weights)
                for user, model in sorted(report.user_models.items(), key=lambda kv: lexical_key(kv[0]))
            },
        },
        "dominant": {
            "global": {"index": report.dominant_global(), "kind": kinds[report.dominant_global()]},
            "personal_majority": None if personal is None else {"index": personal, "kind": kinds[personal]},
        },
        "config": {
            "seed": simulation.seed,
            "window_size": simulation.window_size,
            "candidates_k": simulation.candidates_k,
            "list_n": simulation.slots,
            "eta_global": simulation.eta_global,
            "eta_personal": simulation.eta_personal,
            "normalize_responsibility": simulation.normalize_responsibility,
            "skip_underdeveloped": simulation.skip_underdeveloped,
            "cold_start": simulation.cold_start.value,
            "ramp_length": simulation.ramp_length,
        },
    }


def _write_run_outputs(directory: Path, report: SimulationReport, simulation: SimulationConfig) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    payload = _report_payload(report, simulation)
    with (directory / "results.json").open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")

    _write_weights_csv(
        directory / "weights_global.csv",
        report.recommender_kinds,
        [("global", report.global_trajectory)],
    )

    per_user_rows: Dict = {}
    for iteration, user, weights in report.user_trajectory:
        per_user_rows.setdefault(user, []).append((iteration, weights))
    _write_weights_csv(
        directory / "weights_users.csv",
        report.recommender_kinds,
        [(str(user), per_user_rows[user]) for user in sorted(per_user_rows, key=lexical_key)],
    )

    with (directory / "clicks.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["event_index", "user", "position", "item", "clicked"])
        for event_index, user, position, item, clicked in report.click_rows:
            writer.writerow([event_index, user, position, item, clicked])


def _write_summary(path: Path, rows: List[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["variant", "behaviour", "events", "recommendations", "clicks", "ctr"])
        for row in rows:
            writer.writerow(
                [
                    row["variant"],
                    row["behaviour"],
                    row["events"],
                    row["recommendations"],
                    row["clicks"],
                    _real(row["ctr"]),
                ]
            )


def _summary_row(report: SimulationReport) -> dict:
    return {
        "variant": report.variant,
        "behaviour": report.behaviour_kind,
        "events": report.total_events,
        "recommendations": report.total_recommendations,
        "clicks": report.total_clicks,
        "ctr": report.ctr,
    }


def _print_run_line(report: SimulationReport) -> None:
    print(
        f"variant={report.variant} behaviour={report.behaviour_kind} "
        f"clicks={report.total_clicks} ctr={report.ctr:.6f}"
    )


def _train(config: ExperimentConfig, train_stream: EventStream) -> List[Recommender]:
    attributes = None
    if config.dataset.item_attributes:
        attributes = load_item_attributes(config.dataset.item_attributes)
    return train_ensemble(
        config.recommenders,
        train_stream,
        item_attributes=attributes,
        seed=config.simulation.seed,
    )


def run_experiment(config: ExperimentConfig, matrix: bool = False) -> int:
    """Execute one run, or the full variant x behaviour grid with --matrix."""
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    logger.info("loading dataset from %s", config.dataset.path or "synthetic generator")
    stream = load(config.dataset)
    train_stream, eval_stream = split(
        stream, config.dataset.train_fraction, config.dataset.eval_fraction
    )
    logger.info(
        "events: %d total, %d train, %d eval", len(stream), len(train_stream), len(eval_stream)
    )

    models = _train(config, train_stream)
    logger.info("trained %d base recommenders", len(models))

    summary_rows = []
    if matrix:
        for variant in Variant:
            for behaviour_kind in BEHAVIOUR_KINDS:
                cell = dataclasses.replace(
                    config.simulation,
                    variant=variant,
                    behaviour=BehaviourModel(
                        kind=behaviour_kind,
                        list_length=config.simulation.slots,
                    ),
                )
                report = run(models, train_stream, eval_stream, cell)
                _write_run_outputs(output_dir / f"{variant.value}__{behaviour_kind}", report, cell)
                summary_rows.append(_summary_row(report))
                _print_run_line(report)
    else:
        report = run(models, train_stream, eval_stream, config.simulation)
        _write_run_outputs(output_dir, report, config.simulation)
        summary_rows.append(_summary_row(report))
        _print_run_line(report)

    _write_summary(output_dir / "summary.csv", summary_rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dhondt-ensemble",
        description="Proportional-voting ensemble recommender with replay evaluation.",
    )
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--dataset", help="dataset CSV path (overrides config)")
    parser.add_argument("--variant", choices=[v.value for v in Variant], help="weight model variant")
    parser.add_argument("--behaviour", choices=list(BEHAVIOUR_KINDS), help="click behaviour model")
    parser.add_argument("--seed", type=int, help="simulation seed")
    parser.add_argument("--output-dir", help="directory for result files (default: results)")
    parser.add_argument(
        "--matrix",
        action="store_true",
        help="run every variant x behaviour combination and write summary.csv",
    )
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("DHONDT_LOG_LEVEL", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    overrides = {
        "dataset": args.dataset,
        "variant": args.variant,
        "behaviour": args.behaviour,
        "seed": args.seed,
        "output_dir": args.output_dir,
    }
    try:
        config = parse_config(args.config, overrides)
        return run_experiment(config, matrix=args.matrix)
    except (ConfigError, DatasetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
