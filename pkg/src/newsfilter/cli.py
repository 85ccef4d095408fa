"""Operator CLI: one subcommand per pipeline stage.

Every command prints a one-line JSON run manifest (seeds, input/output file
hashes, parameters) to stdout, and artifacts that have a JSON-object format
embed the hashes of their inputs. Exit codes: 0 success, 2 usage error,
3 data/schema error, 4 invariant violation.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
import sys
import time

import click
import numpy as np

from . import features as features_mod
from . import preprocess as preprocess_mod
from . import select as select_mod
from . import service as service_mod
from .errors import InvariantError, SchemaError
from .filterlist import (
    build_list as build_filterlist,
    filterlist_from_json,
    filterlist_to_json,
    delta_to_json,
    lookup_with_comparisons,
    make_delta,
)
from .models import (
    ModelBundle,
    evaluate,
    labels_to_int,
    load_model,
    save_model,
    split_dataset,
    train_gnb,
    train_lr,
    train_mlp,
    train_rf,
)
from .synth import DEFAULT_MEDIANS, MedianPair, SynthConfig, generate_synthetic
from .telemetry import load_dataset, save_dataset


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest(command: str, params: dict, inputs: dict[str, str],
              outputs: dict[str, str]) -> None:
    doc = {
        "command": command,
        "params": params,
        "inputs": {path: _sha256(path) for path in inputs.values() if path},
        "outputs": {path: _sha256(path) for path in outputs.values() if path},
    }
    click.echo(json.dumps(doc, sort_keys=True))


def _pipeline_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (SchemaError, FileNotFoundError, IsADirectoryError) as exc:
            click.echo(json.dumps({"error": str(exc), "kind": "data"}), err=True)
            sys.exit(3)
        except InvariantError as exc:
            click.echo(json.dumps({"error": str(exc), "kind": "invariant"}), err=True)
            sys.exit(4)
    return wrapper


def _parse_grid(spec: str) -> list[int]:
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise SchemaError("grid must be start:stop:step or a comma list")
        start, stop, step = (int(p) for p in parts)
        values = list(range(start, stop + 1, step))
        if stop not in values:
            values.append(stop)
        return values
    return [int(p) for p in spec.split(",") if p.strip()]


@click.group()
def main():
    """Content-agnostic fake-news-site detection pipeline."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON file with n_real/n_fake/seed and optional median overrides.")
@click.option("--n-real", type=int, default=None)
@click.option("--n-fake", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def synth(config_path, n_real, n_fake, seed, out):
    """Generate a calibrated synthetic dataset (JSONL)."""
    base = {"n_real": 1183, "n_fake": 637, "seed": 0}
    medians = dict(DEFAULT_MEDIANS)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{config_path}: malformed config ({exc.msg})")
        base.update({k: doc[k] for k in ("n_real", "n_fake", "seed") if k in doc})
        for name, pair in doc.get("medians", {}).items():
            medians[name] = MedianPair(real=float(pair["real"]), fake=float(pair["fake"]))
    if n_real is not None:
        base["n_real"] = n_real
    if n_fake is not None:
        base["n_fake"] = n_fake
    if seed is not None:
        base["seed"] = seed

    config = SynthConfig(n_real=base["n_real"], n_fake=base["n_fake"],
                         seed=base["seed"], medians=medians)
    records = generate_synthetic(config)
    save_dataset(records, out)
    _manifest("synth", base, {"config": config_path or ""}, {"out": out})


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None,
              help="Feature catalog TSV; default: the built-in 187-entry catalog.")
@click.option("--categories", "categories_path", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def extract(data, catalog_path, categories_path, out):
    """Extract the 187-entry feature matrix from a dataset file."""
    catalog = features_mod.load_catalog(catalog_path)
    categories = features_mod.load_category_list(categories_path)
    records = load_dataset(data)
    matrix = features_mod.extract_matrix(records, catalog, categories)
    features_mod.save_matrix(matrix, out, provenance={"dataset_sha256": _sha256(data)})
    _manifest("extract", {"rows": len(matrix.rows)},
              {"data": data, "catalog": catalog_path or ""}, {"out": out})


@main.command("select")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default="5:187:5", show_default=True)
@click.option("--step", default=1, show_default=True, type=int)
@click.option("--split-seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def select_cmd(matrix_path, grid, step, split_seed, out):
    """Rank features with RFE and sweep K on the validation split."""
    matrix = features_mod.load_matrix(matrix_path)
    data, labels = matrix.to_arrays()
    if any(label is None for label in labels):
        raise SchemaError("selection requires a fully labeled matrix")
    y = labels_to_int(labels)
    names = list(matrix.catalog.names)

    split = split_dataset(len(labels), labels, seed=split_seed)
    fitted = preprocess_mod.fit_arrays(data[split.train], names)
    transformed = fitted.transform_array(data)

    grid_values = _parse_grid(grid)
    result = select_mod.sweep_k(
        transformed[split.train], y[split.train],
        transformed[split.validation], y[split.validation],
        grid=grid_values, step=step, names=names,
    )
    doc = json.loads(result.to_json())
    doc["provenance"] = {"matrix_sha256": _sha256(matrix_path), "split_seed": split_seed}
    with open(out, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, sort_keys=True)
        handle.write("\n")
    _manifest("select", {"grid": grid_values, "step": step, "split_seed": split_seed,
                         "chosen_k": result.chosen_k},
              {"matrix": matrix_path}, {"out": out})


def _load_selection(path: str, names: list[str]) -> select_mod.SelectionResult:
    with open(path, "r", encoding="utf-8") as handle:
        return select_mod.SelectionResult.from_json(handle.read(), names)


@main.command()
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--selection", "selection_path", required=True, type=click.Path(exists=True))
@click.option("--model", "kind", required=True,
              type=click.Choice(["rf", "lr", "gnb", "mlp"]))
@click.option("--mode", default="async", show_default=True,
              type=click.Choice(["async", "realtime"]))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--split-seed", default=0, show_default=True, type=int)
@click.option("--hidden", default=20, show_default=True, type=int,
              help="Hidden width for the mlp kind.")
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def train(matrix_path, selection_path, kind, mode, seed, split_seed, hidden, out):
    """Train a classifier on the train split of a matrix."""
    matrix = features_mod.load_matrix(matrix_path)
    data, labels = matrix.to_arrays()
    if any(label is None for label in labels):
        raise SchemaError("training requires a fully labeled matrix")
    y = labels_to_int(labels)
    names = list(matrix.catalog.names)
    selection = _load_selection(selection_path, names)

    selected = selection.selected_names()
    if mode == "realtime":
        flags = {e.name: e.realtime_available for e in matrix.catalog.entries}
        selected = [n for n in selected if flags[n]]
        if not selected:
            raise InvariantError("no selected features are available in real time")

    split = split_dataset(len(labels), labels, seed=split_seed)
    fitted = preprocess_mod.fit_arrays(data[split.train], names)
    transformed = fitted.transform_array(data)
    index = {name: i for i, name in enumerate(names)}
    cols = [index[n] for n in selected]

    train_x = transformed[split.train][:, cols]
    train_y = y[split.train]
    if kind == "rf":
        model = train_rf(train_x, train_y, n_trees=100, seed=seed)
    elif kind == "lr":
        model = train_lr(train_x, train_y)
    elif kind == "gnb":
        model = train_gnb(train_x, train_y)
    else:
        model = train_mlp(
            train_x, train_y,
            transformed[split.validation][:, cols], y[split.validation],
            hidden=hidden, seed=seed,
        )

    bundle = ModelBundle(
        kind=kind,
        model=model,
        preprocessor=fitted,
        selected_features=selected,
        metadata={
            "mode": mode,
            "seed": seed,
            "split_seed": split_seed,
            "selected_count": len(selected),
            "matrix_sha256": _sha256(matrix_path),
            "selection_sha256": _sha256(selection_path),
        },
    )
    save_model(bundle, out)
    _manifest("train", {"model": kind, "mode": mode, "seed": seed,
                        "split_seed": split_seed, "features": len(selected)},
              {"matrix": matrix_path, "selection": selection_path}, {"out": out})


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--split-seed", default=None, type=int,
              help="Defaults to the split seed recorded in the model.")
@click.option("--threshold", default=0.5, show_default=True, type=float)
@click.option("--report", "report_path", required=True, type=click.Path())
@_pipeline_errors
def eval_cmd(model_path, matrix_path, split_seed, threshold, report_path):
    """Score the test split and emit the metric report (tp/fp/precision/...)."""
    bundle = load_model(model_path)
    recorded = bundle.metadata.get("matrix_sha256")
    actual = _sha256(matrix_path)
    if recorded and recorded != actual:
        raise InvariantError(
            "matrix does not match the one the model was trained on "
            f"(recorded {recorded[:12]}..., got {actual[:12]}...)"
        )
    matrix = features_mod.load_matrix(matrix_path)
    data, labels = matrix.to_arrays()
    y = labels_to_int(labels)
    if split_seed is None:
        split_seed = int(bundle.metadata.get("split_seed", 0))
    split = split_dataset(len(labels), labels, seed=split_seed)

    scores = bundle.score_matrix(matrix)
    metrics = evaluate(scores[split.test], y[split.test], threshold=threshold)
    report = metrics.as_dict()
    report["provenance"] = {
        "model_sha256": _sha256(model_path),
        "matrix_sha256": actual,
        "split_seed": split_seed,
        "threshold": threshold,
        "test_rows": len(split.test),
        "mode": bundle.metadata.get("mode"),
        "model_kind": bundle.kind,
    }
    with open(report_path, "w", encoding="utf-8") as handle:
        json.dump(report, handle, sort_keys=True)
        handle.write("\n")
    click.echo(json.dumps({k: round(v, 4) for k, v in metrics.as_dict().items()},
                          sort_keys=True))
    _manifest("eval", {"split_seed": split_seed, "threshold": threshold},
              {"model": model_path, "matrix": matrix_path}, {"report": report_path})


@main.command("build-list")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--fake-threshold", default=0.5, show_default=True, type=float)
@click.option("--real-threshold", default=0.9, show_default=True, type=float)
@click.option("--checkpoint", required=True, type=int)
@click.option("--updated-at", default=0, show_default=True, type=int,
              help="UTC seconds stamped on entries; fixed default keeps builds reproducible.")
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def build_list_cmd(model_path, data, fake_threshold, real_threshold,
                   checkpoint, updated_at, out):
    """Classify a dataset and write the canonical filterlist document."""
    bundle = load_model(model_path)
    records = load_dataset(data)
    matrix = features_mod.extract_matrix(records)
    scores = bundle.score_matrix(matrix)
    flist = build_filterlist(
        [(record.domain, float(score)) for record, score in zip(records, scores)],
        fake_threshold=fake_threshold,
        real_threshold=real_threshold,
        checkpoint=checkpoint,
        updated_at=updated_at,
    )
    with open(out, "w", encoding="utf-8") as handle:
        handle.write(filterlist_to_json(flist))
        handle.write("\n")
    _manifest("build-list", {"checkpoint": checkpoint, "entries": len(flist.entries),
                             "fake_threshold": fake_threshold,
                             "real_threshold": real_threshold},
              {"model": model_path, "data": data}, {"out": out})


@main.command()
@click.option("--old", "old_path", required=True, type=click.Path(exists=True))
@click.option("--new", "new_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@_pipeline_errors
def delta(old_path, new_path, out):
    """Minimal delta between two filterlist files."""
    with open(old_path, "r", encoding="utf-8") as handle:
        old = filterlist_from_json(handle.read())
    with open(new_path, "r", encoding="utf-8") as handle:
        new = filterlist_from_json(handle.read())
    result = make_delta(old, new)
    with open(out, "w", encoding="utf-8") as handle:
        handle.write(delta_to_json(result))
        handle.write("\n")
    _manifest("delta", {"from": result.from_checkpoint, "to": result.to_checkpoint,
                        "upserts": len(result.upserts), "removals": len(result.removals)},
              {"old": old_path, "new": new_path}, {"out": out})


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@_pipeline_errors
def serve(config_path):
    """Run the filterlist push service."""
    config = service_mod.ServiceConfig.from_file(config_path)
    _manifest("serve", {"host": config.host, "port": config.port,
                        "quorum_threshold": config.quorum_threshold,
                        "delta_retention": config.delta_retention},
              {"config": config_path}, {})
    service_mod.run(config)


@main.command("bench-lookup")
@click.option("--list", "list_path", required=True, type=click.Path(exists=True))
@click.option("--queries", default=10_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@_pipeline_errors
def bench_lookup(list_path, queries, seed):
    """Measure binary-search comparison counts against the log2 bound."""
    with open(list_path, "r", encoding="utf-8") as handle:
        flist = filterlist_from_json(handle.read())
    n = len(flist.entries)
    if n == 0:
        raise InvariantError("cannot benchmark an empty filterlist")
    rng = np.random.default_rng(seed)
    domains = flist.domains
    comparisons = []
    started = time.perf_counter()
    for _ in range(queries):
        if rng.random() < 0.5:
            target = domains[int(rng.integers(n))]
        else:
            target = f"q{int(rng.integers(10**9))}.miss.example"
        comparisons.append(lookup_with_comparisons(flist, target)[1])
    elapsed = time.perf_counter() - started
    bound = math.ceil(math.log2(n)) + 1
    click.echo(json.dumps({
        "entries": n,
        "queries": queries,
        "mean_comparisons": round(float(np.mean(comparisons)), 3),
        "max_comparisons": int(np.max(comparisons)),
        "comparison_bound": bound,
        "bound_holds": bool(np.max(comparisons) <= bound),
        "mean_lookup_us": round(elapsed / queries * 1e6, 2),
    }, sort_keys=True))
    _manifest("bench-lookup", {"queries": queries, "seed": seed},
              {"list": list_path}, {})


@main.command("bench-kernel")
@click.option("--rows", default=2000, show_default=True, type=int)
@click.option("--features", default=35, show_default=True, type=int)
@click.option("--trees", default=20, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@_pipeline_errors
def bench_kernel(rows, features, trees, seed):
    """Time random-forest training under the compiled and NumPy kernels."""
    from . import _kernels

    rng = np.random.default_rng(seed)
    data = rng.standard_normal((rows, features))
    labels = (data[:, 0] + 0.5 * rng.standard_normal(rows) > 0).astype(np.int64)

    def run_with(backend):
        original = _kernels.gini_scan
        _kernels.gini_scan = backend
        try:
            started = time.perf_counter()
            model = train_rf(data, labels, n_trees=trees, seed=seed)
            elapsed = time.perf_counter() - started
        finally:
            _kernels.gini_scan = original
        return elapsed, model.predict_proba(data)

    py_time, py_pred = run_with(_kernels.gini_scan_py)
    report = {
        "rows": rows, "features": features, "trees": trees,
        "python_seconds": round(py_time, 3),
        "active_backend": _kernels.BACKEND,
    }
    if _kernels.gini_scan_cy is not None:
        cy_time, cy_pred = run_with(_kernels.gini_scan_cy)
        report["cython_seconds"] = round(cy_time, 3)
        report["speedup"] = round(py_time / cy_time, 2)
        report["identical_predictions"] = bool(np.array_equal(py_pred, cy_pred))
    else:
        report["cython_seconds"] = None
    click.echo(json.dumps(report, sort_keys=True))
    _manifest("bench-kernel", {"rows": rows, "features": features, "trees": trees,
                               "seed": seed}, {}, {})


if __name__ == "__main__":
    main()
