"""End-to-end experiment driver: ingest through report, with artifacts.

Every stage failure is wrapped in a StageError naming the stage, so the CLI
can emit a single-line diagnostic and the right exit code. All artifacts are
written with sorted keys and fixed formatting; two runs with the same config
produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import classify, discretize, select
from .config import PipelineConfig
from .data import (
    ATTACK23,
    CATEGORY5,
    Dataset,
    map_labels,
    parse_records,
    reference_sample_counts,
    sample_indices,
    stratified_folds,
)
from .errors import DataError, StageError
from .evaluate import EvaluationReport, cross_validate_plan


@dataclass
class RunResult:
    report: EvaluationReport
    artifacts: dict[str, Path]


def _stage(name: str):
    """Decorator mapping stage failures onto StageError with exit codes."""

    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except (DataError, OSError, ValueError) as exc:
                raise StageError(name, str(exc), exit_code=2) from exc
            except Exception as exc:  # invariant violations and the like
                raise StageError(name, str(exc), exit_code=3) from exc

        return inner

    return wrap


@_stage("ingest")
def _ingest(config: PipelineConfig) -> Dataset:
    path = Path(config.input_path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_records(fh)


@_stage("sample")
def _sample(config: PipelineConfig, ds: Dataset):
    if config.sample is None:
        return ds, None
    if config.sample.target == "reference":
        counts = reference_sample_counts()
    else:
        counts = {
            str(k): int(v)
            for k, v in json.loads(Path(config.sample.target).read_text()).items()
        }
    idx = sample_indices(ds, counts, config.sample.seed)
    manifest = {
        "seed": config.sample.seed,
        "target_counts": counts,
        "selected_indices": [int(i) for i in idx],
    }
    return ds.subset(idx), manifest


@_stage("label-map")
def _map(config: PipelineConfig, ds: Dataset) -> Dataset:
    if config.granularity == CATEGORY5:
        return map_labels(ds, CATEGORY5)
    return ds


@_stage("evaluate")
def _evaluate(config: PipelineConfig, ds: Dataset, plan) -> EvaluationReport:
    return cross_validate_plan(ds, config.experiment, plan, seed=config.cv.seed)


@_stage("train")
def _deployment_artifacts(config: PipelineConfig, ds: Dataset):
    """Fit the full-data discretizer, selection, and model for deployment."""
    dmodel = discretize.fit_discretizer(ds, candidates=config.experiment.candidates)
    dds = discretize.apply_discretizer(dmodel, ds)
    selection = select.run_selection(
        dds, config.experiment.selection.method, config.experiment.selection.alpha
    )
    reduced = dds.project(selection.subset.indices)
    if config.experiment.classifier.boost:
        model = classify.train_adaboost_m1(
            reduced,
            rounds=config.experiment.classifier.rounds,
            smoothing=config.experiment.classifier.smoothing,
        )
        kind = "adaboost-nb"
    else:
        model = classify.train_naive_bayes(
            reduced, smoothing=config.experiment.classifier.smoothing
        )
        kind = "nb"
    model_payload = {
        "version": 1,
        "type": kind,
        "features": list(selection.subset.indices),
        "model": model.to_payload(),
    }
    return dmodel, selection, model_payload


def load_model_payload(payload: dict):
    """Decode a serialized model artifact into (kind, model, feature indices)."""
    kind = payload["type"]
    features = [int(i) for i in payload["features"]]
    if kind == "adaboost-nb":
        model = classify.EnsembleModel.from_payload(payload["model"])
    elif kind == "nb":
        model = classify.NaiveBayesModel.from_payload(payload["model"])
    else:
        raise ValueError(f"unknown model type {kind!r}")
    return kind, model, features


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def run_experiment(config: PipelineConfig) -> RunResult:
    """Execute ingest -> sample -> label-map -> CV evaluation -> artifacts."""
    ds = _ingest(config)
    ds, manifest = _sample(config, ds)
    ds = _map(config, ds)

    try:
        plan = stratified_folds(ds, config.cv.k, config.cv.seed)
    except ValueError as exc:
        raise StageError("fold", str(exc), exit_code=2) from exc

    report = _evaluate(config, ds, plan)
    descriptor_config = config.to_payload()
    descriptor_config.pop("output_dir")  # not part of the experiment identity
    report.descriptor["config"] = descriptor_config

    dmodel, selection, model_payload = _deployment_artifacts(config, ds)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}

    def emit(name: str, text: str) -> None:
        path = out / name
        path.write_text(text)
        artifacts[name] = path

    emit("config.json", config.to_json())
    emit("foldplan.json", json.dumps(plan.to_payload(), sort_keys=True) + "\n")
    if manifest is not None:
        emit(
            "sample_manifest.json",
            json.dumps(manifest, sort_keys=True, indent=2) + "\n",
        )
    emit("discretizer.json", dmodel.to_json())
    emit("selection.json", selection.to_json())
    emit("model.json", json.dumps(model_payload, sort_keys=True, indent=2) + "\n")
    emit("report.json", report.to_json())
    emit("report.txt", report.format_table())
    return RunResult(report=report, artifacts=artifacts)


# Method grid mirrored by the reproduce-tables command: (method, alpha, boost).
TABLE_GRID = (
    ("cfs-bestfirst", None, False),
    ("cfs-greedy", None, False),
    ("ig", 0.3, False),
    ("gainratio", 0.2, False),
    ("correlation", 0.3, False),
    ("hybrid", None, False),
    ("hybrid", None, True),
)


def _grid_rows(granularity: str):
    rows = [row for row in TABLE_GRID if not (granularity == CATEGORY5 and row[2])]
    return rows


def reproduce_tables(
    input_path: str,
    output_dir: str,
    seed: int = 0,
    rounds: int = 10,
    alpha: float | None = None,
    sample: bool = True,
    k: int = 10,
) -> dict[str, Path]:
    """Run the full selector-comparison grids at both label granularities.

    Emits one machine-readable JSON and one text table per granularity, plus
    a per-attack F-measure comparison of the hybrid pipeline with and
    without boosting (23-class only).
    """
    from .config import (
        ClassifierConfig,
        CrossValConfig,
        DEFAULT_HYBRID_ALPHA,
        ExperimentConfig,
        SampleConfig,
        SelectionConfig,
    )

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    hybrid_reports: dict[bool, EvaluationReport] = {}

    for granularity, tag in ((ATTACK23, "23class"), (CATEGORY5, "5class")):
        rows = []
        for method, row_alpha, boost in _grid_rows(granularity):
            effective_alpha = (
                row_alpha
                if row_alpha is not None
                else (alpha if alpha is not None else DEFAULT_HYBRID_ALPHA)
            )
            config = PipelineConfig(
                input_path=input_path,
                granularity=granularity,
                sample=SampleConfig(seed=seed) if sample else None,
                experiment=ExperimentConfig(
                    selection=SelectionConfig(method=method, alpha=effective_alpha),
                    classifier=ClassifierConfig(boost=boost, rounds=rounds),
                ),
                cv=CrossValConfig(k=k, seed=seed),
                output_dir=str(out / f"{tag}-{method}{'-boost' if boost else ''}"),
            )
            result = run_experiment(config)
            report = result.report
            if granularity == ATTACK23 and method == "hybrid":
                hybrid_reports[boost] = report
            sel = report.descriptor["selection"]
            rows.append(
                {
                    "method": method + ("+adaboost" if boost else ""),
                    "alpha": sel["alpha"],
                    "n_features": len(sel["features"]),
                    "features": sel["features"],
                    "f_measure": report.weighted.f_measure,
                    "fpr": report.weighted.fpr,
                }
            )
        payload = {"granularity": granularity, "seed": seed, "rows": rows}
        json_path = out / f"selector_comparison_{tag}.json"
        _write_json(json_path, payload)
        written[json_path.name] = json_path
        txt_path = out / f"selector_comparison_{tag}.txt"
        txt_path.write_text(_format_grid(granularity, rows))
        written[txt_path.name] = txt_path

    if True in hybrid_reports and False in hybrid_reports:
        cmp_path = out / "per_attack_f.txt"
        cmp_path.write_text(
            _format_attack_comparison(hybrid_reports[False], hybrid_reports[True])
        )
        written[cmp_path.name] = cmp_path
        cmp_json = out / "per_attack_f.json"
        _write_json(
            cmp_json,
            {
                "unboosted": {
                    lbl: m.f_measure
                    for lbl, m in sorted(hybrid_reports[False].per_class.items())
                },
                "boosted": {
                    lbl: m.f_measure
                    for lbl, m in sorted(hybrid_reports[True].per_class.items())
                },
            },
        )
        written[cmp_json.name] = cmp_json
    return written


def _format_grid(granularity: str, rows) -> str:
    header = f"{'method':<22}{'alpha':>7}{'#feat':>7}{'F-measure':>11}{'FPR':>8}  features"
    lines = [f"selector comparison ({granularity})", header, "-" * len(header)]
    for row in rows:
        alpha = "" if row["alpha"] is None else f"{row['alpha']:.2f}"
        feats = ",".join(str(i) for i in row["features"])
        lines.append(
            f"{row['method']:<22}{alpha:>7}{row['n_features']:>7}"
            f"{row['f_measure']:>11.3f}{row['fpr']:>8.3f}  {feats}"
        )
    return "\n".join(lines) + "\n"


def _format_attack_comparison(unboosted: EvaluationReport, boosted: EvaluationReport) -> str:
    labels = [lbl for lbl in unboosted.matrix.labels if lbl != "normal"]
    header = f"{'attack':<18}{'F (nb)':>10}{'F (adaboost-nb)':>17}"
    lines = ["per-attack F-measure, hybrid selection", header, "-" * len(header)]
    for lbl in labels:
        f0 = unboosted.per_class[lbl].f_measure
        f1 = boosted.per_class[lbl].f_measure
        lines.append(f"{lbl:<18}{f0:>10.3f}{f1:>17.3f}")
    return "\n".join(lines) + "\n"
