"""Command-line experiment runner.

Three commands: ``inspect`` summarizes a CSV, ``run`` executes the full
experiment from a config file, ``compare`` lays runs side by side. A run
trains the four base learners standalone plus the stacked model, then
writes per-model reports, the five comparison tables, and ROC data. All
artifact bytes are a pure function of (config, seed, data bytes): output
is staged in a scratch directory and only moved into place on success, so
a failed run leaves nothing behind.

Exit codes: 0 success, 2 config error, 3 data error, 4 training or
evaluation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
import tempfile

import numpy as np

from . import __version__
from ._kernels import backend_name
from .config import ExperimentConfig, default_config, dump_config, load_config
from .errors import ConfigError, DataError, IncompatibleRuns, StackgenError, TrainingError
from .ingest import load_csv, prepare_split
from .learners import fit as fit_learner, predict_proba
from .metrics import full_report, roc_csv
from .stacking import fit_stack

# (file tag, table row label, position of the standalone spec in the
# stack's base tuple; None marks the stack itself)
MODELS = (
    ("svm", "SVM", 0),
    ("mlp", "MLP", 1),
    ("rf", "RF", 2),
    ("knn", "KNN", 3),
    ("sg", "SG", None),
)

REPORT_FORMAT = "stackgen-report"
RUN_RECORD_FORMAT = "stackgen-run"


# -- inspect ------------------------------------------------------------


def cmd_inspect(path: str, out=None) -> int:
    out = sys.stdout if out is None else out
    table = load_csv(path, target=None)
    print(f"{path}: {table.n_rows} rows, {len(table.schema)} columns", file=out)
    print(file=out)
    width = max(len(s.name) for s in table.schema)
    print(f"  {'column'.ljust(width)}  {'kind'.ljust(20)}  missing", file=out)
    for s in table.schema:
        missing = sum(1 for c in table.columns[s.name] if c is None)
        print(f"  {s.name.ljust(width)}  {s.kind.ljust(20)}  {missing:7d}", file=out)
    for note in table.notes:
        print(f"  note: {note}", file=out)
    binary = [s.name for s in table.schema if s.kind == "binary_categorical"]
    if binary:
        print(file=out)
        for name in binary:
            cells = [c for c in table.columns[name] if c is not None]
            values = sorted(set(cells), key=lambda v: (len(v), v))
            parts = "  ".join(
                f"{v}={cells.count(v)} ({100.0 * cells.count(v) / len(cells):.1f}%)"
                for v in values
            )
            print(f"  balance {name}: {parts}", file=out)
    return 0


# -- run ----------------------------------------------------------------


def _percent(v: float) -> str:
    return f"{100.0 * v:.2f}%"


def _render_table(title: str, header: list, rows: list) -> str:
    """Aligned plain-text table, percent cells, trailing newline."""
    cells = [header] + [[r[0]] + [_percent(v) for v in r[1:]] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = [title]
    for j, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _tables(reports: dict) -> dict:
    """The five comparison tables over the fixed model order."""
    order = [(tag, label) for tag, label, _ in MODELS]

    def rows(*keys):
        return [[label] + [reports[tag].scalars()[k] for k in keys] for tag, label in order]

    return {
        "table_precision_recall": _render_table(
            "Precision and Recall",
            ["Algorithm", "Macro Precision", "Weighted Precision", "Macro Recall", "Weighted Recall"],
            rows("precision_macro", "precision_weighted", "recall_macro", "recall_weighted"),
        ),
        "table_f_averages": _render_table(
            "F Measure in different Averages",
            ["Algorithm", "Accuracy", "Macro F-Score", "Weighted F-Score"],
            rows("accuracy", "f1_macro", "f1_weighted"),
        ),
        "table_f_beta": _render_table(
            "F-beta with 0.5, 1 and 2 as beta value",
            ["Algorithm", "F0.5-Score", "F1-Score", "F2-Score"],
            rows("f_half_macro", "f1_macro", "f2_macro"),
        ),
        "table_hamming": _render_table(
            "Hamming Loss", ["Algorithm", "Hamming Loss"], rows("hamming_loss")
        ),
        "table_jaccard": _render_table(
            "Jaccard Index", ["Algorithm", "Jaccard Index"], rows("jaccard_class1")
        ),
    }


def _report_doc(tag: str, spec_doc: dict, report) -> dict:
    return {
        "format": REPORT_FORMAT,
        "version": 1,
        "model": tag,
        "spec": spec_doc,
        "threshold": report.threshold,
        "counts": {
            "tp": int(report.counts.tp),
            "fp": int(report.counts.fp),
            "fn": int(report.counts.fn),
            "tn": int(report.counts.tn),
        },
        "flags": sorted(report.flags),
        "metrics": report.scalars(),
    }


def _stage(stage_dir: str, name: str, text: str):
    with open(os.path.join(stage_dir, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_text(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def cmd_run(cfg: ExperimentConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    data_path = cfg.data_path()
    table = load_csv(data_path, target=cfg.target, overrides=cfg.overrides_dict())
    prep = prepare_split(
        table, cfg.fraction_for(table.n_rows), seed=cfg.seed, stratified=cfg.stratify
    )

    spec = cfg.stack_spec()
    models = {}
    stage = "start"
    try:
        for tag, _, pos in MODELS:
            if pos is None:
                stage = "training the stack"
                models[tag] = fit_stack(spec, prep.train.X, prep.train.y)
            else:
                stage = f"training {spec.base[pos].algorithm}"
                models[tag] = fit_learner(spec.base[pos], prep.train.X, prep.train.y)
        reports = {}
        for tag, _, pos in MODELS:
            stage = f"evaluating {'the stack' if pos is None else spec.base[pos].algorithm}"
            m = models[tag]
            scores = m.predict_proba(prep.test.X) if pos is None else predict_proba(m, prep.test.X)
            reports[tag] = full_report(prep.test.y, scores)
    except StackgenError as exc:
        raise TrainingError(f"{stage}: {exc}") from exc

    with open(data_path, "rb") as fh:
        data_sha = hashlib.sha256(fh.read()).hexdigest()
    record = {
        "format": RUN_RECORD_FORMAT,
        "version": 1,
        "package_version": __version__,
        "kernel_backend": backend_name(),
        "seed": cfg.seed,
        "data": cfg.data if cfg.data is not None else f"bundled:{os.path.basename(data_path)}",
        "data_sha256": data_sha,
        "target": cfg.target,
        "n_rows": table.n_rows,
        "n_train": int(prep.train.X.shape[0]),
        "n_test": int(prep.test.X.shape[0]),
        "n_features": int(prep.train.X.shape[1]),
        "models": [tag for tag, _, _ in MODELS],
    }

    out_dir = cfg.out
    parent = os.path.dirname(os.path.abspath(out_dir)) or "."
    os.makedirs(parent, exist_ok=True)
    stage_dir = tempfile.mkdtemp(prefix=".stackgen-partial-", dir=parent)
    try:
        _stage(stage_dir, "config_resolved.yaml", dump_config(cfg.resolved_doc()))
        _stage(stage_dir, "run_record.json", _json_text(record))
        for tag, _, pos in MODELS:
            spec_doc = spec.to_doc() if pos is None else spec.base[pos].to_doc()
            _stage(stage_dir, f"report_{tag}.json", _json_text(_report_doc(tag, spec_doc, reports[tag])))
            _stage(stage_dir, f"roc_{tag}.csv", roc_csv(reports[tag].roc))
        for name, text in _tables(reports).items():
            _stage(stage_dir, name, text)
        os.makedirs(out_dir, exist_ok=True)
        for name in sorted(os.listdir(stage_dir)):
            os.replace(os.path.join(stage_dir, name), os.path.join(out_dir, name))
    finally:
        shutil.rmtree(stage_dir, ignore_errors=True)

    sg = reports["sg"].scalars()
    print(f"wrote {out_dir}: {len(MODELS)} models on {record['n_test']} test rows", file=out)
    print(
        f"SG weighted F1 {_percent(sg['f1_weighted'])}, hamming {_percent(sg['hamming_loss'])}, "
        f"jaccard {_percent(sg['jaccard_class1'])}",
        file=out,
    )
    return 0


# -- compare ------------------------------------------------------------


def _load_run(run_dir: str) -> dict:
    try:
        with open(os.path.join(run_dir, "run_record.json"), "r", encoding="utf-8") as fh:
            record = json.load(fh)
    except OSError as exc:
        raise DataError(f"{run_dir} is not a run directory: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{run_dir}/run_record.json is not valid JSON: {exc}") from None
    reports = {}
    for tag in record.get("models", []):
        path = os.path.join(run_dir, f"report_{tag}.json")
        try:
            with open(path, "r", encoding="utf-8") as fh:
                reports[tag] = json.load(fh)
        except OSError as exc:
            raise DataError(f"missing model report in {run_dir}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"{path} is not valid JSON: {exc}") from None
    if not reports:
        raise DataError(f"{run_dir} lists no models")
    return {"dir": run_dir, "record": record, "reports": reports}


def cmd_compare(run_dirs: list, out=None) -> int:
    out = sys.stdout if out is None else out
    if len(run_dirs) < 2:
        raise ConfigError("compare needs at least two run directories")
    runs = [_load_run(d) for d in run_dirs]

    first = runs[0]
    model_set = sorted(first["reports"])
    metric_set = {tag: sorted(first["reports"][tag]["metrics"]) for tag in model_set}
    for run in runs[1:]:
        if sorted(run["reports"]) != model_set:
            raise IncompatibleRuns(
                f"{run['dir']} has models {sorted(run['reports'])}, expected {model_set}"
            )
        for tag in model_set:
            if sorted(run["reports"][tag]["metrics"]) != metric_set[tag]:
                raise IncompatibleRuns(
                    f"{run['dir']} reports different metrics for {tag} than {first['dir']}"
                )

    datasets = {run["record"].get("data") for run in runs}
    print(f"{len(runs)} runs", file=out)
    for run in runs:
        rec = run["record"]
        label = f"  {run['dir']}  seed={rec.get('seed')}"
        if len(datasets) > 1:
            label += f"  data={rec.get('data')}"
        print(label, file=out)
    print(file=out)

    order = [tag for tag, _, _ in MODELS if tag in model_set]
    order += [t for t in model_set if t not in order]
    width = max(len(m) for tag in order for m in metric_set[tag])
    print(f"{'model':6s} {'metric'.ljust(width)}  {'mean':>9s} {'spread':>9s} {'min':>9s} {'max':>9s}", file=out)
    for tag in order:
        for metric in metric_set[tag]:
            vals = np.array([run["reports"][tag]["metrics"][metric] for run in runs], dtype=float)
            print(
                f"{tag:6s} {metric.ljust(width)}  {vals.mean():9.4f} {vals.std():9.4f} "
                f"{vals.min():9.4f} {vals.max():9.4f}",
                file=out,
            )
    return 0


# -- entry point ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stackgen", description="stacked-generalization experiment runner")
    sub = p.add_subparsers(dest="command", required=True)

    p_inspect = sub.add_parser("inspect", help="summarize a CSV: columns, kinds, missing cells, balance")
    p_inspect.add_argument("data", help="CSV file to inspect")

    p_run = sub.add_parser("run", help="train the base learners and the stack, write reports")
    p_run.add_argument("--config", required=True, help="YAML config file ({} runs the default experiment)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--data", default=None, help="override the config data path")
    p_run.add_argument("--out", default=None, help="override the config output directory")

    p_compare = sub.add_parser("compare", help="side-by-side metric summary over finished runs")
    p_compare.add_argument("dirs", nargs="+", help="run directories to compare")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "inspect":
            return cmd_inspect(args.data)
        if args.command == "run":
            cfg = load_config(args.config)
            doc = cfg.to_doc()
            if args.seed is not None:
                doc["seed"] = args.seed
            if args.data is not None:
                doc["data"] = args.data
            if args.out is not None:
                doc["out"] = args.out
            cfg = ExperimentConfig.from_doc(doc)
            return cmd_run(cfg)
        return cmd_compare(args.dirs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 4
    except StackgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
