"""Experiment runner.

Reads a flat ``key = value`` config file (or a previously written manifest
JSON), builds the dataset, runs each requested algorithm, and writes one
metrics CSV per algorithm plus a manifest that fully reconstructs the run.
The ``sweep-al`` command repeats a run across several weighted-selection
windows and summarizes rounds-to-target-accuracy.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .datagen import ClientShard, SyntheticSpec, generate_synthetic, ingest_csv
from .engine import ALGORITHMS, ExperimentConfig, MetricsRow, run_experiment
from .model import TrainingConfig
from .predictor import PARTIAL_RULES, PredictorParams

METRICS_HEADER = "round,test_accuracy,train_loss,dropout_rate,mean_assigned,mean_completed"
SUMMARY_HEADER = "al_rounds,target_accuracy,rounds_to_target,final_accuracy"
# rounds_to_target when the target accuracy is never reached
NOT_REACHED = -1

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class ConfigError(Exception):
    pass


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_algorithms(raw: str) -> list[str]:
    names = [part.strip() for part in str(raw).split(",") if part.strip()]
    if not names:
        raise ValueError("at least one algorithm is required")
    for name in names:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    if len(set(names)) != len(names):
        raise ValueError("duplicate algorithm names")
    return names


# key -> (converter, default); defaults are the reference hyperparameters.
SCHEMA: dict[str, tuple] = {
    "dataset": (str, "synthetic"),
    "alpha": (float, 1.0),
    "beta": (float, 1.0),
    "num_clients": (int, 100),
    "dim": (int, 60),
    "num_classes": (int, 10),
    "total_samples": (int, 75349),
    "power_law_exponent": (float, 1.0),
    "csv_path": (str, ""),
    "label_column": (str, "label"),
    "classes_per_client": (int, 0),
    "algorithms": (_parse_algorithms, ["fedavg", "fedsae_ira", "fedsae_fassa"]),
    "rounds": (int, 200),
    "clients_per_round": (int, 10),
    "batch_size": (int, 10),
    "learning_rate": (float, 0.01),
    "fixed_epochs": (float, 15.0),
    "ira_gain": (float, 10.0),
    "fassa_fast_step": (float, 3.0),
    "fassa_slow_step": (float, 1.0),
    "ema_smoothing": (float, 0.95),
    "initial_easy": (float, 1.0),
    "initial_hard": (float, 2.0),
    "fassa_partial": (str, "symmetric"),
    "selection_scale": (float, 0.01),
    "al_rounds": (int, 0),
    "uploader_values_only": (_parse_bool, False),
    "seed": (int, 42),
    "target_accuracy": (float, 0.6),
}


def default_settings() -> dict:
    return {
        key: list(default) if isinstance(default, list) else default
        for key, (_, default) in SCHEMA.items()
    }


def _convert(key: str, raw) -> object:
    """Coerce a raw config value (file string or manifest JSON) to its type."""
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    converter, _ = SCHEMA[key]
    try:
        if converter is _parse_algorithms and isinstance(raw, list):
            return _parse_algorithms(",".join(raw))
        if converter is _parse_bool and isinstance(raw, bool):
            return raw
        return converter(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def load_settings(path: str) -> dict:
    """Load settings from a flat key=value file or a manifest JSON."""
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {path}")
    settings = default_settings()
    if file_path.suffix == ".json":
        try:
            manifest = json.loads(file_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        snapshot = manifest.get("config")
        if not isinstance(snapshot, dict):
            raise ConfigError(f"{path}: manifest has no config snapshot")
        for key, value in snapshot.items():
            settings[key] = _convert(key, value)
        return settings
    for line_num, line in enumerate(file_path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_num}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        settings[key.strip()] = _convert(key.strip(), raw.strip())
    return settings


def build_shards(settings: dict) -> list[ClientShard]:
    if settings["dataset"] == "synthetic":
        spec = SyntheticSpec(
            alpha=settings["alpha"],
            beta=settings["beta"],
            num_clients=settings["num_clients"],
            total_samples=settings["total_samples"],
            dim=settings["dim"],
            num_classes=settings["num_classes"],
            power_law_exponent=settings["power_law_exponent"],
            seed=settings["seed"],
        )
        return generate_synthetic(spec)
    if settings["dataset"] == "csv":
        if not settings["csv_path"]:
            raise ConfigError("dataset = csv requires csv_path")
        return ingest_csv(
            settings["csv_path"],
            settings["label_column"],
            settings["num_clients"],
            classes_per_client=settings["classes_per_client"],
            power_law_exponent=settings["power_law_exponent"],
            seed=settings["seed"],
        )
    raise ConfigError(f"unknown dataset {settings['dataset']!r}")


def experiment_config(settings: dict, algorithm: str, al_rounds: int | None = None) -> ExperimentConfig:
    if settings["fassa_partial"] not in PARTIAL_RULES:
        raise ConfigError(f"fassa_partial must be one of {PARTIAL_RULES}")
    return ExperimentConfig(
        algorithm=algorithm,
        rounds=settings["rounds"],
        clients_per_round=settings["clients_per_round"],
        seed=settings["seed"],
        training=TrainingConfig(settings["learning_rate"], settings["batch_size"]),
        predictor=PredictorParams(
            gain=settings["ira_gain"],
            fast_step=settings["fassa_fast_step"],
            slow_step=settings["fassa_slow_step"],
            smoothing=settings["ema_smoothing"],
            initial_easy=settings["initial_easy"],
            initial_hard=settings["initial_hard"],
            partial_rule=settings["fassa_partial"],
        ),
        fixed_epochs=settings["fixed_epochs"],
        selection_scale=settings["selection_scale"],
        al_rounds=settings["al_rounds"] if al_rounds is None else al_rounds,
        uploader_values_only=settings["uploader_values_only"],
    )


def write_metrics(path: Path, rows: list[MetricsRow]) -> None:
    lines = [METRICS_HEADER]
    for r in rows:
        lines.append(
            f"{r.round},{r.test_accuracy!r},{r.train_loss!r},"
            f"{r.dropout_rate!r},{r.mean_assigned!r},{r.mean_completed!r}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_manifest(out_dir: Path, manifest: dict) -> None:
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def rounds_to_target(rows: list[MetricsRow], target: float) -> int:
    for r in rows:
        if r.test_accuracy >= target:
            return r.round
    return NOT_REACHED


def run(settings: dict, out_dir: Path) -> dict:
    """Run every configured algorithm on one dataset; write CSVs + manifest."""
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    shards = build_shards(settings)
    metrics_files: dict[str, str] = {}
    for algorithm in settings["algorithms"]:
        rows = run_experiment(experiment_config(settings, algorithm), shards)
        name = f"metrics_{algorithm}.csv"
        write_metrics(out_dir / name, rows)
        metrics_files[algorithm] = name
    manifest = {
        "command": "run",
        "config": _snapshot(settings),
        "metrics": metrics_files,
        "duration_sec": time.perf_counter() - start,
    }
    _write_manifest(out_dir, manifest)
    return manifest


def sweep_al(settings: dict, al_rounds_list: list[int], out_dir: Path) -> dict:
    """One run per weighted-selection window; summarize rounds-to-target."""
    if len(settings["algorithms"]) != 1:
        raise ConfigError("sweep-al needs exactly one algorithm (use --algorithm)")
    algorithm = settings["algorithms"][0]
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    shards = build_shards(settings)
    target = settings["target_accuracy"]
    metrics_files: dict[str, str] = {}
    summary_lines = [SUMMARY_HEADER]
    for n in al_rounds_list:
        rows = run_experiment(experiment_config(settings, algorithm, al_rounds=n), shards)
        name = f"metrics_{algorithm}_al{n}.csv"
        write_metrics(out_dir / name, rows)
        metrics_files[f"al{n}"] = name
        summary_lines.append(
            f"{n},{target!r},{rounds_to_target(rows, target)},{rows[-1].test_accuracy!r}"
        )
    summary_path = out_dir / "al_sweep_summary.csv"
    summary_path.write_text("\n".join(summary_lines) + "\n", encoding="utf-8")
    manifest = {
        "command": "sweep-al",
        "config": _snapshot(settings),
        "al_rounds": al_rounds_list,
        "metrics": metrics_files,
        "summary": summary_path.name,
        "duration_sec": time.perf_counter() - start,
    }
    _write_manifest(out_dir, manifest)
    return manifest


def _snapshot(settings: dict) -> dict:
    snapshot = dict(settings)
    snapshot["algorithms"] = list(settings["algorithms"])
    return snapshot


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedsae",
        description="Deterministic federated-learning simulator with adaptive workloads.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file or manifest JSON")
        p.add_argument("--algorithm", help="run only this algorithm")
        p.add_argument("--rounds", type=int, help="override the number of rounds")
        p.add_argument("--seed", type=int, help="override the seed")
        p.add_argument("--out-dir", default="results", help="output directory")
        p.add_argument(
            "--target-accuracy", type=float, help="accuracy used for rounds-to-target"
        )

    run_p = sub.add_parser("run", help="run the configured algorithms once")
    common(run_p)
    run_p.add_argument(
        "--al-rounds", type=int, help="use weighted selection for the first N rounds"
    )

    sweep_p = sub.add_parser("sweep-al", help="sweep the weighted-selection window")
    common(sweep_p)
    sweep_p.add_argument(
        "--al-rounds",
        default="0,20,50,100,150,200",
        help="comma-separated list of weighted-selection windows",
    )
    return parser


def _apply_overrides(settings: dict, args: argparse.Namespace) -> None:
    if args.algorithm is not None:
        try:
            settings["algorithms"] = _parse_algorithms(args.algorithm)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if args.rounds is not None:
        settings["rounds"] = args.rounds
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.target_accuracy is not None:
        settings["target_accuracy"] = args.target_accuracy


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config) if args.config else default_settings()
        _apply_overrides(settings, args)
        out_dir = Path(args.out_dir)
        if args.command == "run":
            if args.al_rounds is not None:
                settings["al_rounds"] = args.al_rounds
            run(settings, out_dir)
        else:
            try:
                al_list = [int(part) for part in str(args.al_rounds).split(",") if part.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --al-rounds list: {exc}") from exc
            if not al_list or any(n < 0 for n in al_list):
                raise ConfigError("--al-rounds must be non-negative integers")
            sweep_al(settings, al_list, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
