"""Command-line harness.

Subcommands: anomaly, cluster, project, eval, selftest. Options come from
an optional flat `key = value` config file plus command-line flags; a flag
always wins over the file. The run report echoes every resolved option
(including filled-in defaults) as sorted `key = value` lines, followed by
metric, loss-trace and per-phase timing fields.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from ._version import __version__
from . import checks
from .anomaly import ABLATIONS, SOURCES, BoostConfig, run_anomaly
from .clustering import run_clustering
from .data import load_csv, standardize as standardize_dataset
from .encoder import TrainConfig
from .errors import ConfigError, DataError, ModelFileError, NumericError
from .mappings import apply as apply_map, identity_map, rff, sparse_rp
from .metrics import auc_pr, auc_roc
from .persist import save_ensemble, save_model
from .report import format_report, write_text_atomic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


@dataclass
class RunConfig:
    task: str = "anomaly"
    input: Optional[str] = None
    label_column: Optional[str] = None
    score_column: str = "score"
    has_header: bool = True
    standardize: bool = True
    source: str = "rff"
    ablation: str = "none"
    m: Optional[int] = None
    k: Optional[int] = None
    epochs: Optional[int] = None
    batch_size: int = 192
    learning_rate: float = 0.1
    aux_weight: float = 1.0
    leaky_slope: float = 0.01
    members: int = 30
    filter_fraction: float = 0.05
    filter_rounds: int = 1
    restarts: int = 30
    kmeans_max_iters: int = 300
    normalize_embeddings: bool = False
    bandwidth: Optional[float] = None
    density: Optional[float] = None
    seed: int = 0
    workers: int = 1
    out_report: Optional[str] = None
    out_scores: Optional[str] = None
    out_assignments: Optional[str] = None
    out_matrix: Optional[str] = None
    out_model: Optional[str] = None


_TASK_DEFAULTS = {
    "anomaly": {"m": 50, "epochs": 200},
    "cluster": {"m": 1024, "epochs": 1000},
    "project": {"k": 50},
}

_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}
_BOOL_KEYS = {"has_header", "standardize", "normalize_embeddings"}
_INT_KEYS = {
    "m", "k", "epochs", "batch_size", "members", "filter_rounds", "restarts",
    "kmeans_max_iters", "seed", "workers",
}
_FLOAT_KEYS = {"learning_rate", "aux_weight", "leaky_slope", "filter_fraction", "bandwidth", "density"}


def _coerce(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    if raw.lower() == "none":
        return None
    try:
        if key in _BOOL_KEYS:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as err:
        raise ConfigError(f"config key {key!r}: {err}") from None
    return raw


def _parse_config_file(path) -> dict:
    values = {}
    problems = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            problems.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        try:
            values[key.strip()] = _coerce(key.strip(), value)
        except ConfigError as err:
            problems.append(f"line {lineno}: {err}")
    if problems:
        raise ConfigError("bad config file:\n" + "\n".join(problems))
    return values


def _resolve(task: str, file_values: dict, cli_values: dict) -> RunConfig:
    cfg = RunConfig(task=task)
    for key, value in file_values.items():
        setattr(cfg, key, value)
    for key, value in cli_values.items():
        if value is not None:
            setattr(cfg, key, value)
    for key, value in _TASK_DEFAULTS.get(task, {}).items():
        if getattr(cfg, key) is None:
            setattr(cfg, key, value)
    if task == "anomaly":
        if cfg.k is None:
            cfg.k = cfg.m
    elif task == "cluster":
        if cfg.k is None:
            cfg.k = cfg.m
    return cfg


def _validate(cfg: RunConfig) -> None:
    problems = []
    task = cfg.task
    if task != "selftest" and not cfg.input:
        problems.append("input file is required")
    if cfg.source not in SOURCES:
        problems.append(f"source must be one of {SOURCES}, got {cfg.source!r}")
    if task == "anomaly" and cfg.ablation not in ABLATIONS:
        problems.append(f"ablation must be one of {ABLATIONS}, got {cfg.ablation!r}")
    if task == "cluster" and cfg.ablation not in ("none", "no_pair_loss", "no_aux_loss"):
        problems.append(f"clustering ablation must be none/no_pair_loss/no_aux_loss, got {cfg.ablation!r}")
    if task in ("anomaly", "cluster"):
        if cfg.epochs is not None and cfg.epochs < 1:
            problems.append(f"epochs must be >= 1, got {cfg.epochs}")
        if cfg.batch_size < 2:
            problems.append(f"batch_size must be >= 2, got {cfg.batch_size}")
        if cfg.learning_rate <= 0:
            problems.append(f"learning_rate must be positive, got {cfg.learning_rate}")
        if cfg.aux_weight < 0:
            problems.append(f"aux_weight must be >= 0, got {cfg.aux_weight}")
    if task == "anomaly":
        if cfg.m is not None and cfg.k is not None and cfg.m != cfg.k and cfg.source != "identity":
            problems.append(f"anomaly scoring requires m == k, got m={cfg.m}, k={cfg.k}")
        if cfg.members < 1:
            problems.append(f"members must be >= 1, got {cfg.members}")
        if not 0.0 <= cfg.filter_fraction < 0.5:
            problems.append(f"filter_fraction must be in [0, 0.5), got {cfg.filter_fraction}")
        if cfg.filter_rounds < 0:
            problems.append(f"filter_rounds must be >= 0, got {cfg.filter_rounds}")
    if task == "cluster":
        if cfg.restarts < 1:
            problems.append(f"restarts must be >= 1, got {cfg.restarts}")
        if cfg.kmeans_max_iters < 1:
            problems.append(f"kmeans_max_iters must be >= 1, got {cfg.kmeans_max_iters}")
    if task == "project" and (cfg.k is None or cfg.k < 1) and cfg.source != "identity":
        problems.append(f"projection dimension k must be >= 1, got {cfg.k}")
    if cfg.bandwidth is not None and cfg.bandwidth <= 0:
        problems.append(f"bandwidth must be positive, got {cfg.bandwidth}")
    if cfg.density is not None and not 0.0 < cfg.density <= 1.0:
        problems.append(f"density must be in (0, 1], got {cfg.density}")
    if cfg.seed < 0:
        problems.append(f"seed must be non-negative, got {cfg.seed}")
    if cfg.workers < 1:
        problems.append(f"workers must be >= 1, got {cfg.workers}")
    if problems:
        raise ConfigError("invalid configuration:\n" + "\n".join(problems))


_COMMON_ECHO = ("task", "input", "label_column", "has_header", "standardize", "seed", "workers", "out_report")
_TASK_ECHO = {
    "anomaly": _COMMON_ECHO + (
        "source", "ablation", "m", "k", "epochs", "batch_size", "learning_rate",
        "aux_weight", "leaky_slope", "members", "filter_fraction", "filter_rounds",
        "bandwidth", "density", "out_scores", "out_model",
    ),
    "cluster": _COMMON_ECHO + (
        "source", "ablation", "m", "k", "epochs", "batch_size", "learning_rate",
        "aux_weight", "leaky_slope", "restarts", "kmeans_max_iters",
        "normalize_embeddings", "bandwidth", "density", "out_assignments", "out_model",
    ),
    "project": _COMMON_ECHO + ("source", "k", "bandwidth", "density", "out_matrix"),
    "eval": ("task", "input", "label_column", "score_column", "has_header", "out_report"),
}


def _echo_config(cfg: RunConfig) -> dict:
    return {f"config.{name}": getattr(cfg, name) for name in _TASK_ECHO[cfg.task]}


def _emit_report(cfg: RunConfig, fields_out: dict) -> None:
    fields_out["version"] = __version__
    text = format_report(fields_out)
    if cfg.out_report:
        write_text_atomic(cfg.out_report, text)
    sys.stdout.write(text)


def _write_csv_atomic(path, header: list, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    write_text_atomic(path, buf.getvalue())


def _label_selector(cfg: RunConfig):
    if cfg.label_column is None:
        return None
    return cfg.label_column


def _cmd_anomaly(cfg: RunConfig) -> int:
    data = load_csv(cfg.input, label_column=_label_selector(cfg), has_header=cfg.has_header)
    boost = BoostConfig(
        train=TrainConfig(
            m=cfg.m,
            epochs=cfg.epochs,
            task="anomaly",
            batch_size=cfg.batch_size,
            learning_rate=cfg.learning_rate,
            aux_weight=cfg.aux_weight,
            leaky_slope=cfg.leaky_slope,
            seed=cfg.seed,
        ),
        members=cfg.members,
        filter_fraction=cfg.filter_fraction,
        filter_rounds=cfg.filter_rounds,
        source=cfg.source,
        bandwidth=cfg.bandwidth,
        density=cfg.density,
    )
    result = run_anomaly(
        data, boost, ablation=cfg.ablation, source=cfg.source,
        standardize=cfg.standardize, workers=cfg.workers,
    )
    if cfg.source == "identity":
        cfg.m = cfg.k = data.d  # echo the forced width
    out = _echo_config(cfg)
    out["data.rows"] = data.n
    out["data.columns"] = data.d
    if result.auc_roc is not None:
        out["metrics.auc_roc"] = result.auc_roc
        out["metrics.auc_pr"] = result.auc_pr
    first = np.mean([m.trace.total[0] for m in result.ensemble.members])
    last = np.mean([m.trace.total[-1] for m in result.ensemble.members])
    out["loss.first_epoch_total_mean"] = float(first)
    out["loss.last_epoch_total_mean"] = float(last)
    out["timing.train_seconds"] = result.train_seconds
    out["timing.score_seconds"] = result.score_seconds
    if cfg.out_scores:
        rows = (
            [i, repr(float(s))] + ([int(data.labels[i])] if data.labels is not None else [])
            for i, s in enumerate(result.scores)
        )
        header = ["index", "score"] + (["label"] if data.labels is not None else [])
        _write_csv_atomic(cfg.out_scores, header, rows)
    if cfg.out_model:
        save_ensemble(cfg.out_model, [m.model for m in result.ensemble.members])
    _emit_report(cfg, out)
    return EXIT_OK


def _cmd_cluster(cfg: RunConfig) -> int:
    data = load_csv(cfg.input, label_column=_label_selector(cfg), has_header=cfg.has_header)
    train_cfg = TrainConfig(
        m=cfg.m,
        epochs=cfg.epochs,
        task="clustering",
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        aux_weight=cfg.aux_weight,
        leaky_slope=cfg.leaky_slope,
        seed=cfg.seed,
    )
    result = run_clustering(
        data,
        train_cfg,
        restarts=cfg.restarts,
        ablation=cfg.ablation,
        source=cfg.source,
        standardize=cfg.standardize,
        normalize_embeddings=cfg.normalize_embeddings,
        kmeans_max_iters=cfg.kmeans_max_iters,
        bandwidth=cfg.bandwidth,
        density=cfg.density,
        map_dim=cfg.k,
        workers=cfg.workers,
    )
    out = _echo_config(cfg)
    out["data.rows"] = data.n
    out["data.columns"] = data.d
    out["metrics.nmi_mean"] = result.nmi_mean
    out["metrics.nmi_std"] = result.nmi_std
    out["metrics.f_mean"] = result.f_mean
    out["metrics.f_std"] = result.f_std
    out["loss.first_epoch_total"] = float(result.trace.total[0])
    out["loss.last_epoch_total"] = float(result.trace.total[-1])
    out["timing.train_seconds"] = result.train_seconds
    out["timing.cluster_seconds"] = result.cluster_seconds
    if cfg.out_assignments:
        rows = (
            [i, int(a)] + ([int(data.labels[i])] if data.labels is not None else [])
            for i, a in enumerate(result.assignments)
        )
        header = ["index", "cluster"] + (["label"] if data.labels is not None else [])
        _write_csv_atomic(cfg.out_assignments, header, rows)
    if cfg.out_model:
        save_model(cfg.out_model, result.model)
    _emit_report(cfg, out)
    return EXIT_OK


def _cmd_project(cfg: RunConfig) -> int:
    if not cfg.out_matrix:
        raise ConfigError("invalid configuration:\nproject needs out_matrix")
    data = load_csv(cfg.input, label_column=_label_selector(cfg), has_header=cfg.has_header)
    X = standardize_dataset(data)[0].features if cfg.standardize else data.features
    t0 = time.perf_counter()
    if cfg.source == "identity":
        mapping = identity_map(data.d)
        cfg.k = data.d
    elif cfg.source == "srp":
        mapping = sparse_rp(data.d, cfg.k, density=cfg.density, seed=cfg.seed)
    else:
        mapping = rff(data.d, cfg.k, bandwidth=cfg.bandwidth, data=X, seed=cfg.seed)
    projected = apply_map(mapping, X)
    out = _echo_config(cfg)
    out["data.rows"] = data.n
    out["data.columns"] = data.d
    out["timing.project_seconds"] = time.perf_counter() - t0
    header = [f"p{i}" for i in range(projected.shape[1])]
    _write_csv_atomic(
        cfg.out_matrix, header, ([repr(float(v)) for v in row] for row in projected)
    )
    _emit_report(cfg, out)
    return EXIT_OK


def _read_eval_columns(cfg: RunConfig) -> tuple:
    try:
        with open(cfg.input, "r", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise DataError(f"cannot read {cfg.input}: {err}") from err
    if not rows:
        raise DataError(f"{cfg.input} is empty")
    header = None
    if cfg.has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{cfg.input} has no data rows")

    def column_index(selector, what: str) -> int:
        if selector is None:
            raise ConfigError(f"invalid configuration:\neval needs {what}")
        if isinstance(selector, str) and not selector.lstrip("-").isdigit():
            if header is None or selector not in header:
                raise DataError(f"{what} {selector!r} not found in header {header}")
            return header.index(selector)
        idx = int(selector)
        if not 0 <= idx < len(rows[0]):
            raise DataError(f"{what} index {idx} out of range")
        return idx

    s_idx = column_index(cfg.score_column, "score column")
    l_idx = column_index(cfg.label_column if cfg.label_column is not None else "label", "label column")
    scores, labels = [], []
    for r, cells in enumerate(rows, start=2 if cfg.has_header else 1):
        try:
            scores.append(float(cells[s_idx]))
            labels.append(int(float(cells[l_idx])))
        except (ValueError, IndexError) as err:
            raise DataError(f"bad row {r} in {cfg.input}: {err}") from None
    return np.asarray(scores), np.asarray(labels)


def _cmd_eval(cfg: RunConfig) -> int:
    scores, labels = _read_eval_columns(cfg)
    out = _echo_config(cfg)
    out["data.rows"] = scores.size
    out["metrics.auc_roc"] = auc_roc(scores, labels)
    out["metrics.auc_pr"] = auc_pr(scores, labels)
    _emit_report(cfg, out)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--input", help="input CSV path")
    p.add_argument("--label-column", dest="label_column", help="label column name or 0-based index")
    p.add_argument("--has-header", dest="has_header", action=argparse.BooleanOptionalAction)
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out-report", dest="out_report")


def _add_train_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", choices=list(SOURCES))
    p.add_argument("--ablation")
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--aux-weight", dest="aux_weight", type=float)
    p.add_argument("--leaky-slope", dest="leaky_slope", type=float)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--density", type=float)
    p.add_argument("--out-model", dest="out_model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randist", description=__doc__)
    parser.add_argument("--version", action="version", version=f"randist {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)

    p = sub.add_parser("anomaly", help="train the detector ensemble and score every row")
    _add_common(p)
    _add_train_common(p)
    p.add_argument("--members", type=int)
    p.add_argument("--filter-fraction", dest="filter_fraction", type=float)
    p.add_argument("--filter-rounds", dest="filter_rounds", type=int)
    p.add_argument("--out-scores", dest="out_scores")

    p = sub.add_parser("cluster", help="learn an embedding and K-means it against labels")
    _add_common(p)
    _add_train_common(p)
    p.add_argument("--restarts", type=int)
    p.add_argument("--kmeans-max-iters", dest="kmeans_max_iters", type=int)
    p.add_argument("--normalize-embeddings", dest="normalize_embeddings",
                   action=argparse.BooleanOptionalAction)
    p.add_argument("--out-assignments", dest="out_assignments")

    p = sub.add_parser("project", help="apply a frozen random mapping and write the matrix")
    _add_common(p)
    p.add_argument("--source", choices=list(SOURCES))
    p.add_argument("--k", type=int)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--density", type=float)
    p.add_argument("--out-matrix", dest="out_matrix")

    p = sub.add_parser("eval", help="compute ranking metrics from a scores+labels CSV")
    _add_common(p)
    p.add_argument("--score-column", dest="score_column")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


_COMMANDS = {
    "anomaly": _cmd_anomaly,
    "cluster": _cmd_cluster,
    "project": _cmd_project,
    "eval": _cmd_eval,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.task == "selftest":
        return EXIT_OK if checks.run_selftest() else EXIT_NUMERIC
    cli_values = {
        k: v for k, v in vars(args).items() if k in _FIELD_TYPES and k != "task"
    }
    file_values = _parse_config_file(args.config) if args.config else {}
    cfg = _resolve(args.task, file_values, cli_values)
    _validate(cfg)
    return _COMMANDS[cfg.task](cfg)


def main(argv=None) -> int:
    try:
        return run(argv)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ModelFileError, OSError) as err:
        print(f"input/output error: {err}", file=sys.stderr)
        return EXIT_IO
    except NumericError as err:
        print(f"numeric error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
