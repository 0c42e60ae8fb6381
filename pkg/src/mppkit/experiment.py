"""Configuration-driven experiment runner and report emission.

A run walks four stages: load and clean the dataset, build the stratified
fold plan, cross-validate every configured model, and assemble the
comparison (plus a GBDT importance ranking fitted on the full cleaned
dataset).  Emitted CSV/JSON files are byte-identical for a fixed
(config, seed, dataset); wall-clock timestamps stay on the in-memory
bundle and never reach the report files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .data import DataError, load_dataset, load_schema, stratified_kfold
from .evaluation import CvReport, ModelSpec, cross_validate, resolve_params
from .numeric import derive_seed
from .trees import ImportanceReport, feature_importance, fit_gbdt

REPORT_FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Bad experiment configuration (usage error, not a data error)."""


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: Path
    schema_path: Path
    models: tuple[ModelSpec, ...]
    k: int = 5
    seed: int = 0
    out_dir: Path = Path("reports")
    formats: tuple[str, ...] = REPORT_FORMATS

    def __post_init__(self):
        if not self.models:
            raise ConfigError("model list must be non-empty")
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError("model list contains duplicates")
        for m in self.models:
            try:
                resolve_params(m.name, m.params)
            except ValueError as exc:  # unknown name/param is a usage error
                raise ConfigError(str(exc)) from exc
        if self.k < 2:
            raise ConfigError("fold count must be at least 2")
        for fmt in self.formats:
            if fmt not in REPORT_FORMATS:
                raise ConfigError(f"unknown report format {fmt!r}")

    def digest(self) -> str:
        doc = {
            "data": str(self.data_path),
            "schema": str(self.schema_path),
            "models": {m.name: m.params for m in self.models},
            "folds": self.k,
            "seed": self.seed,
            "formats": list(self.formats),
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _parse_models(raw) -> tuple[ModelSpec, ...]:
    if isinstance(raw, dict):
        return tuple(ModelSpec(name, dict(params or {})) for name, params in raw.items())
    if isinstance(raw, list):
        specs = []
        for entry in raw:
            if isinstance(entry, str):
                specs.append(ModelSpec(entry))
            elif isinstance(entry, dict) and "name" in entry:
                specs.append(ModelSpec(entry["name"], dict(entry.get("params", {}))))
            else:
                raise ConfigError(f"cannot parse model entry {entry!r}")
        return tuple(specs)
    raise ConfigError("'models' must be a list of names or a name -> params mapping")


def _parse_formats(raw) -> tuple[str, ...]:
    if raw in (None, "both"):
        return REPORT_FORMATS
    if raw in REPORT_FORMATS:
        return (raw,)
    raise ConfigError(f"unknown report format {raw!r} (expected csv, json, or both)")


def load_config(
    path,
    seed: int | None = None,
    folds: int | None = None,
    models: list[str] | None = None,
    out_dir=None,
    fmt: str | None = None,
) -> ExperimentConfig:
    """Parse a JSON config file; keyword overrides mirror the CLI flags.

    Dataset and schema paths are resolved relative to the config file, the
    output directory relative to the working directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    for key in ("data", "schema", "models"):
        if key not in doc:
            raise ConfigError(f"config file is missing key {key!r}")

    base = path.parent
    specs = _parse_models(doc["models"])
    if models is not None:
        overrides = {m.name: m.params for m in specs}
        specs = tuple(ModelSpec(name, overrides.get(name, {})) for name in models)
    return ExperimentConfig(
        data_path=base / doc["data"],
        schema_path=base / doc["schema"],
        models=specs,
        k=int(folds if folds is not None else doc.get("folds", 5)),
        seed=int(seed if seed is not None else doc.get("seed", 0)),
        out_dir=Path(out_dir if out_dir is not None else doc.get("out", "reports")),
        formats=_parse_formats(fmt if fmt is not None else doc.get("format", "both")),
    )


@dataclass(frozen=True, eq=False)
class ReportBundle:
    reports: tuple[CvReport, ...]
    importance: ImportanceReport | None
    config_digest: str
    toolkit_version: str
    seed: int
    k: int
    started_at: str = field(repr=False, default="")
    finished_at: str = field(repr=False, default="")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_experiment(config: ExperimentConfig) -> ReportBundle:
    """Execute the four-stage workflow for every configured model."""
    started = _now()

    try:  # stage 1: load and clean
        schema = load_schema(config.schema_path)
        dataset = load_dataset(config.data_path, schema)
    except DataError as exc:
        raise DataError(f"stage 1 (load and clean): {exc}") from exc

    try:  # stage 2: fold plan (cross_validate rebuilds the identical plan)
        stratified_kfold(dataset, config.k, config.seed)
    except (DataError, ValueError) as exc:
        raise DataError(f"stage 2 (fold plan): {exc}") from exc

    # stage 3: per-model cross-validation
    reports = tuple(
        cross_validate(spec, dataset, config.k, config.seed) for spec in config.models
    )

    # stage 4: comparison assembly; importance from a full-dataset GBDT fit
    importance = None
    for spec in config.models:
        if spec.name == "gbdt":
            params = resolve_params("gbdt", spec.params)
            full_fit = fit_gbdt(
                dataset,
                params["rounds"],
                params["shrinkage"],
                params["max_depth"],
                params["min_samples_leaf"],
            )
            importance = feature_importance(full_fit, schema)

    return ReportBundle(
        reports=reports,
        importance=importance,
        config_digest=config.digest(),
        toolkit_version=__version__,
        seed=config.seed,
        k=config.k,
        started_at=started,
        finished_at=_now(),
    )


def compare_models(bundle: ReportBundle) -> list[dict]:
    """Comparison rows sorted by accuracy descending, ties by model name."""
    if not bundle.reports:
        raise ValueError("empty bundle")
    rows = []
    for r in bundle.reports:
        row = {"model": r.model, "accuracy": r.accuracy}
        for cm in r.per_class:
            row[f"precision_{cm.class_id}"] = cm.precision
            row[f"recall_{cm.class_id}"] = cm.recall
            row[f"f1_{cm.class_id}"] = cm.f1
        rows.append(row)
    return sorted(rows, key=lambda row: (-row["accuracy"], row["model"]))


_COMPARISON_COLUMNS = ["model", "accuracy"] + [
    f"{metric}_{c}" for c in range(3) for metric in ("precision", "recall", "f1")
]


def _fmt(value) -> str:
    return f"{value:.6f}" if isinstance(value, float) else str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    # feature names may contain commas, so go through the csv writer;
    # a fixed line terminator keeps output bytes platform-independent
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_fmt(cell) for cell in row] for row in rows)


def _report_to_obj(r: CvReport) -> dict:
    return {
        "model": r.model,
        "params": r.params,
        "confusion_matrix": [[int(v) for v in row] for row in r.matrix],
        "accuracy": r.accuracy,
        "per_class": [
            {
                "class_id": cm.class_id,
                "tp": cm.tp,
                "fp": cm.fp,
                "fn": cm.fn,
                "tn": cm.tn,
                "precision": cm.precision,
                "recall": cm.recall,
                "f1": cm.f1,
                "precision_defined": cm.precision_defined,
                "recall_defined": cm.recall_defined,
                "f1_defined": cm.f1_defined,
            }
            for cm in r.per_class
        ],
        "fold_accuracies": list(r.fold_accuracies),
        "fold_accuracy_mean": r.fold_accuracy_mean,
        "fold_accuracy_std": r.fold_accuracy_std,
        "seed": r.seed,
        "folds": r.k,
        "fold_plan_digest": r.fold_plan_digest,
    }


def emit_report(bundle: ReportBundle, fmt: str, out_dir) -> list[Path]:
    """Write comparison/metrics/importance CSV tables and/or the JSON summary.

    CSV values carry 6 decimal places for human tables; summary.json keeps
    full precision.  Output bytes are deterministic for a fixed bundle.
    """
    if fmt == "both":
        formats = REPORT_FORMATS
    elif fmt in REPORT_FORMATS:
        formats = (fmt,)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "csv" in formats:
        comparison = compare_models(bundle)
        path = out / "comparison.csv"
        _write_csv(path, _COMPARISON_COLUMNS, [[row[c] for c in _COMPARISON_COLUMNS] for row in comparison])
        written.append(path)
        for r in bundle.reports:
            path = out / f"metrics_{r.model}.csv"
            header = [
                "class", "tp", "fp", "fn", "tn",
                "precision", "recall", "f1",
                "precision_defined", "recall_defined", "f1_defined",
            ]
            rows = [
                [
                    cm.class_id, cm.tp, cm.fp, cm.fn, cm.tn,
                    float(cm.precision), float(cm.recall), float(cm.f1),
                    int(cm.precision_defined), int(cm.recall_defined), int(cm.f1_defined),
                ]
                for cm in r.per_class
            ]
            _write_csv(path, header, rows)
            written.append(path)
        if bundle.importance is not None:
            # full precision here: the ranking's weights must sum to 1 within
            # 1e-9, which 6-decimal rounding cannot guarantee
            path = out / "importance.csv"
            _write_csv(
                path,
                ["feature", "importance"],
                [[name, repr(float(weight))] for name, weight in bundle.importance.entries],
            )
            written.append(path)

    if "json" in formats:
        summary = {
            "metadata": {
                "toolkit_version": bundle.toolkit_version,
                "config_digest": bundle.config_digest,
                "seed": bundle.seed,
                "folds": bundle.k,
                "models": [r.model for r in bundle.reports],
            },
            "comparison": compare_models(bundle),
            "reports": {r.model: _report_to_obj(r) for r in bundle.reports},
            "importance": None
            if bundle.importance is None
            else {
                "entries": [[name, weight] for name, weight in bundle.importance.entries],
                "total": bundle.importance.total,
            },
        }
        path = out / "summary.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)

    return written
