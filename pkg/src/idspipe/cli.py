"""Command-line driver for reproducible experiments.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation. Set IDSPIPE_DATA to a directory to resolve relative input paths
against it.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import classify, data, discretize, select
from .config import (
    DEFAULT_HYBRID_ALPHA,
    ClassifierConfig,
    CrossValConfig,
    ExperimentConfig,
    PipelineConfig,
    SampleConfig,
    SelectionConfig,
)
from .errors import DataError, StageError
from .evaluate import build_report
from .pipeline import load_model_payload, reproduce_tables, run_experiment


def _resolve_input(path: str) -> str:
    """Resolve an input path, falling back to the IDSPIPE_DATA directory."""
    if Path(path).exists():
        return path
    root = os.environ.get("IDSPIPE_DATA")
    if root and (Path(root) / path).exists():
        return str(Path(root) / path)
    return path


@click.group()
def cli():
    """Intrusion-detection experiment pipeline."""


@cli.command()
@click.argument("input_path")
@click.option("--out", required=True, help="Output dataset CSV path.")
@click.option(
    "--granularity",
    type=click.Choice(data.GRANULARITIES),
    default=data.ATTACK23,
    show_default=True,
)
@click.option(
    "--sample",
    default=None,
    help="Distribution-match before output: 'reference' or a JSON counts file.",
)
@click.option("--sample-seed", type=int, default=0, show_default=True)
def ingest(input_path, out, granularity, sample, sample_seed):
    """Parse a 42/43-field record file into a validated dataset CSV."""
    path = _resolve_input(input_path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            ds = data.parse_records(fh)
    except OSError as exc:
        raise StageError("ingest", str(exc), exit_code=2) from exc
    except DataError as exc:
        raise StageError("ingest", str(exc), exit_code=2) from exc
    if sample:
        counts = (
            data.reference_sample_counts()
            if sample == "reference"
            else {
                str(k): int(v) for k, v in json.loads(Path(sample).read_text()).items()
            }
        )
        idx = data.sample_indices(ds, counts, sample_seed)
        manifest = {
            "seed": sample_seed,
            "target_counts": counts,
            "selected_indices": [int(i) for i in idx],
        }
        ds = ds.subset(idx)
        manifest_path = Path(out).with_name(Path(out).name + ".manifest.json")
        manifest_path.parent.mkdir(parents=True, exist_ok=True)
        manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    if granularity == data.CATEGORY5:
        ds = data.map_labels(ds, data.CATEGORY5)
    data.write_dataset(ds, out)
    click.echo(f"wrote {len(ds)} records to {out}")


@cli.command("discretize")
@click.argument("dataset_path")
@click.option("--out", required=True, help="Output directory.")
@click.option(
    "--candidates",
    type=click.Choice(discretize.CANDIDATE_MODES),
    default="boundary",
    show_default=True,
)
def discretize_cmd(dataset_path, out, candidates):
    """Fit MDL cut points on a dataset and write the binned copy."""
    ds = data.read_dataset(_resolve_input(dataset_path))
    model = discretize.fit_discretizer(ds, candidates=candidates)
    binned = discretize.apply_discretizer(model, ds)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "discretizer.json").write_text(model.to_json())
    data.write_dataset(binned, out_dir / "discretized.csv")
    click.echo(f"wrote discretizer and binned dataset to {out_dir}")


@cli.command("select")
@click.argument("dataset_path")
@click.option(
    "--method",
    type=click.Choice(select.SELECTION_METHODS),
    default="hybrid",
    show_default=True,
)
@click.option("--alpha", type=float, default=DEFAULT_HYBRID_ALPHA, show_default=True)
@click.option("--out", required=True, help="Output selection JSON path.")
def select_cmd(dataset_path, method, alpha, out):
    """Run one selection method on a fully discrete dataset."""
    ds = data.read_dataset(_resolve_input(dataset_path))
    result = select.run_selection(ds, method, alpha)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(result.to_json())
    click.echo(
        f"selected {len(result.subset.indices)} features: "
        + ",".join(str(i) for i in result.subset.indices)
    )


@cli.command("train")
@click.argument("dataset_path")
@click.option("--selection", "selection_path", default=None, help="Selection JSON.")
@click.option("--boost/--no-boost", default=True, show_default=True)
@click.option("--rounds", type=int, default=10, show_default=True)
@click.option("--smoothing", type=float, default=1.0, show_default=True)
@click.option("--out", required=True, help="Output model JSON path.")
def train_cmd(dataset_path, selection_path, boost, rounds, smoothing, out):
    """Train the (optionally boosted) naive Bayes classifier."""
    ds = data.read_dataset(_resolve_input(dataset_path))
    features = list(range(1, len(ds.schema) + 1))
    if selection_path:
        result = select.SelectionResult.from_json(Path(selection_path).read_text())
        features = list(result.subset.indices)
        ds = ds.project(features)
    if boost:
        model = classify.train_adaboost_m1(ds, rounds=rounds, smoothing=smoothing)
        payload = {
            "version": 1,
            "type": "adaboost-nb",
            "features": features,
            "model": model.to_payload(),
        }
    else:
        model = classify.train_naive_bayes(ds, smoothing=smoothing)
        payload = {
            "version": 1,
            "type": "nb",
            "features": features,
            "model": model.to_payload(),
        }
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    click.echo(f"trained {payload['type']} model on {len(ds)} records")


@cli.command("eval")
@click.argument("dataset_path")
@click.option("--model", "model_path", required=True, help="Model JSON path.")
@click.option("--out", required=True, help="Output report JSON path.")
def eval_cmd(dataset_path, model_path, out):
    """Evaluate a trained model on a held-out discrete dataset."""
    ds = data.read_dataset(_resolve_input(dataset_path))
    kind, model, features = load_model_payload(
        json.loads(Path(model_path).read_text())
    )
    projected = ds.project(features)
    if kind == "adaboost-nb":
        codes = classify.ensemble_predict_batch(model, projected)
        labels = model.labels
    else:
        codes = classify.nb_predict_batch(model, projected)
        labels = model.labels
    preds = np.asarray([labels[c] for c in codes], dtype=object)
    label_set = sorted(set(labels) | set(ds.labels.tolist()))
    report = build_report(
        ds.labels,
        preds,
        label_set,
        descriptor={"mode": "holdout", "model": kind, "features": list(features)},
    )
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(report.to_json())
    click.echo(report.format_table())


def _apply_overrides(config: PipelineConfig, **kw) -> PipelineConfig:
    exp = config.experiment
    selection = SelectionConfig(
        method=kw["method"] or exp.selection.method,
        alpha=exp.selection.alpha if kw["alpha"] is None else kw["alpha"],
    )
    classifier = ClassifierConfig(
        boost=exp.classifier.boost if kw["boost"] is None else kw["boost"],
        rounds=exp.classifier.rounds if kw["rounds"] is None else kw["rounds"],
        smoothing=exp.classifier.smoothing,
    )
    sample = config.sample
    if kw["sample"] is not None:
        sample = None if kw["sample"] == "none" else SampleConfig(
            target=kw["sample"], seed=kw["seed"] if kw["seed"] is not None else 0
        )
    return PipelineConfig(
        input_path=kw["input_path"] or config.input_path,
        granularity=kw["granularity"] or config.granularity,
        sample=sample,
        experiment=ExperimentConfig(
            discretization=kw["discretization"] or exp.discretization,
            candidates=exp.candidates,
            selection=selection,
            classifier=classifier,
        ),
        cv=CrossValConfig(
            k=config.cv.k if kw["k"] is None else kw["k"],
            seed=config.cv.seed if kw["seed"] is None else kw["seed"],
        ),
        output_dir=kw["output_dir"] or config.output_dir,
    )


@cli.command("run")
@click.option("--config", "config_path", default=None, help="Config JSON file.")
@click.option("--input", "input_path", default=None, help="Input record file.")
@click.option("--granularity", type=click.Choice(data.GRANULARITIES), default=None)
@click.option(
    "--discretization", type=click.Choice(("leaky", "fold-safe")), default=None
)
@click.option("--method", type=click.Choice(select.SELECTION_METHODS), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--boost/--no-boost", "boost", default=None)
@click.option("--rounds", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option(
    "--sample",
    default=None,
    help="'reference', a JSON counts file, or 'none' to disable sampling.",
)
@click.option("--out", "output_dir", default=None, help="Artifact directory.")
def run_cmd(config_path, **kw):
    """Run the full pipeline from a config file plus flag overrides."""
    if config_path:
        try:
            base = PipelineConfig.from_json(Path(config_path).read_text())
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise click.UsageError(f"invalid config file {config_path}: {exc}") from exc
    elif kw["input_path"]:
        base = PipelineConfig(input_path=kw["input_path"])
    else:
        raise click.UsageError("provide --config or --input")
    try:
        config = _apply_overrides(base, **kw)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    config = PipelineConfig(
        input_path=_resolve_input(config.input_path),
        granularity=config.granularity,
        sample=config.sample,
        experiment=config.experiment,
        cv=config.cv,
        output_dir=config.output_dir,
    )
    result = run_experiment(config)
    click.echo(result.report.format_table())
    click.echo(f"artifacts in {config.output_dir}")


@cli.command("reproduce-tables")
@click.argument("input_path")
@click.option("--out", required=True, help="Output directory for the tables.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--rounds", type=int, default=10, show_default=True)
@click.option("--alpha", type=float, default=None, help="Hybrid-stage alpha override.")
@click.option("--k", type=int, default=10, show_default=True)
@click.option(
    "--sample/--no-sample",
    default=True,
    show_default=True,
    help="Draw the reference 62,984-record sample before evaluating.",
)
def reproduce_tables_cmd(input_path, out, seed, rounds, alpha, k, sample):
    """Run the full selector-comparison grids at both granularities."""
    written = reproduce_tables(
        _resolve_input(input_path),
        out,
        seed=seed,
        rounds=rounds,
        alpha=alpha,
        sample=sample,
        k=k,
    )
    for name in sorted(written):
        click.echo(f"wrote {written[name]}")


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except StageError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception as exc:  # internal invariant violations
        click.echo(f"internal error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
