"""Confusion matrices, per-class/macro metrics, run reports and stage timing."""
from __future__ import annotations

import csv
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, PipelineError

# Column order of the bracketed summary line.
SUMMARY_ORDER = ("specificity", "sensitivity", "precision", "accuracy", "f1")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted classes."""
    matrix: np.ndarray
    classes: tuple

    @property
    def total(self) -> int:
        return int(self.matrix.sum())


def confusion(actual, predicted, classes) -> ConfusionMatrix:
    """``classes`` is a class count (integer-coded labels) or a label sequence."""
    actual = np.asarray(actual)
    predicted = np.asarray(predicted)
    if actual.shape != predicted.shape or actual.ndim != 1:
        raise DataError("actual and predicted must be 1-D vectors of equal length")
    if isinstance(classes, (int, np.integer)):
        classes = tuple(range(int(classes)))
        a, p = actual.astype(int), predicted.astype(int)
        if len(a) and (min(a.min(), p.min()) < 0 or max(a.max(), p.max()) >= len(classes)):
            raise DataError("label outside the known class set")
    else:
        classes = tuple(classes)
        lookup = {c: i for i, c in enumerate(classes)}
        try:
            a = np.array([lookup[v] for v in actual.tolist()], dtype=int)
            p = np.array([lookup[v] for v in predicted.tolist()], dtype=int)
        except KeyError as exc:
            raise DataError(f"label {exc.args[0]!r} outside the known class set") from None
    C = len(classes)
    m = np.zeros((C, C), dtype=np.int64)
    np.add.at(m, (a, p), 1)
    return ConfusionMatrix(m, classes)


def _ratio(num, den):
    return np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)


@dataclass
class Metrics:
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    tn: np.ndarray
    per_class: dict          # metric name -> (C,) array, fractions
    macro: dict              # metric name -> float, fractions
    overall_accuracy: float = 0.0    # trace / total (fraction of rows classified correctly)

    def percent(self) -> dict:
        return {k: 100.0 * v for k, v in self.macro.items()}


def metrics(cm) -> Metrics:
    """One-vs-rest confusion elements and the five metrics; 0/0 -> 0."""
    m = np.asarray(cm.matrix if isinstance(cm, ConfusionMatrix) else cm, dtype=np.int64)
    total = m.sum()
    tp = np.diag(m).astype(float)
    fp = m.sum(axis=0) - tp          # predicted as i, actually another class
    fn = m.sum(axis=1) - tp          # actually i, predicted as another class
    tn = total - tp - fp - fn
    precision = _ratio(tp, tp + fp)
    sensitivity = _ratio(tp, tp + fn)
    per_class = {
        "specificity": _ratio(tn, fp + tn),
        "sensitivity": sensitivity,
        "precision": precision,
        "accuracy": _ratio(tp + tn, np.full_like(tp, float(total))),
        "f1": _ratio(2 * precision * sensitivity, precision + sensitivity),
    }
    macro = {k: float(v.mean()) if len(v) else 0.0 for k, v in per_class.items()}
    overall = float(tp.sum() / total) if total else 0.0
    return Metrics(tp, fp, fn, tn, per_class, macro, overall)


def format_percent(v) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def summary_line(name, macro: dict) -> str:
    return f"{name} [" + ",".join(format_percent(100 * macro[k]) for k in SUMMARY_ORDER) + "]"


# --------------------------------------------------------------------------
# timing

class StageTimer:
    """Wall-clock milliseconds per executed (stage, sub-stage)."""

    def __init__(self):
        self.rows = []

    @contextmanager
    def stage(self, module, submodule=""):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.rows.append((module, submodule, 1000.0 * (time.perf_counter() - t0)))

    def names(self):
        return [(m, s) for m, s, _ in self.rows]


# --------------------------------------------------------------------------
# report

@dataclass
class ModelResult:
    model_id: str
    best_params: dict
    candidates: list
    confusion: ConfusionMatrix
    metrics: Metrics
    curve: object            # TrainingCurve
    fit_seconds: float = 0.0
    predictions: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "model": self.model_id,
            "best_params": self.best_params,
            "summary": summary_line(self.model_id, self.metrics.macro),
            "metrics_percent": self.metrics.percent(),
            "overall_accuracy_percent": 100.0 * self.metrics.overall_accuracy,
            "per_class": {
                str(c): {"tp": int(self.metrics.tp[i]), "fp": int(self.metrics.fp[i]),
                         "fn": int(self.metrics.fn[i]), "tn": int(self.metrics.tn[i]),
                         **{k: float(v[i]) for k, v in self.metrics.per_class.items()}}
                for i, c in enumerate(self.confusion.classes)
            },
            "confusion": {"classes": [str(c) for c in self.confusion.classes],
                          "matrix": self.confusion.matrix.tolist()},
            "candidates": self.candidates,
            "curve": {"kind": self.curve.kind, "loss": list(self.curve.loss),
                      "accuracy": list(self.curve.accuracy)},
            "predictions": list(self.predictions),
            **({"details": self.extra} if self.extra else {}),
        }


@dataclass
class RunReport:
    models: list                     # ModelResult, in execution order
    config: dict
    seed: int
    plan: list
    selected_features: dict = None
    data: dict = None
    timings: list = field(default_factory=list)     # (module, submodule, ms)
    artifacts: dict = field(default_factory=dict)   # e.g. the exported representation

    def to_json(self) -> dict:
        """Everything except wall-clock values, so equal runs serialize equally."""
        return {
            "seed": self.seed,
            "config": self.config,
            "plan": self.plan,
            "data": self.data or {},
            "selected_features": self.selected_features,
            "models": [m.to_json() for m in self.models],
        }

    def summary(self) -> str:
        return "\n".join(summary_line(m.model_id, m.metrics.macro) for m in self.models)


def assemble_report(model_results, config: dict, seed: int, plan, selected_features=None,
                    data=None, timings=()) -> RunReport:
    if not model_results:
        raise PipelineError("no model produced results")
    return RunReport(list(model_results), config, seed, list(plan), selected_features,
                     data, list(timings))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.str_):
        return str(obj)
    return obj


def dumps_report(report: RunReport) -> str:
    return json.dumps(_clean(report.to_json()), indent=2) + "\n"


def write_report(report: RunReport, out_dir) -> list:
    """Write report.json, curves_<model>.csv, confusion_<model>.csv, timings.csv."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "report.json"]
        written[0].write_text(dumps_report(report), encoding="utf-8")
        for m in report.models:
            p = out / f"curves_{m.model_id}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow([m.curve.kind, "loss", "accuracy"])
                for i, loss, acc in m.curve.rows():
                    w.writerow([i, repr(float(loss)), repr(float(acc))])
            written.append(p)
            p = out / f"confusion_{m.model_id}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["actual\\predicted"] + [str(c) for c in m.confusion.classes])
                for c, row in zip(m.confusion.classes, m.confusion.matrix.tolist()):
                    w.writerow([str(c)] + row)
            written.append(p)
        p = out / "timings.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["module", "submodule", "milliseconds"])
            for mod, sub, ms in report.timings:
                w.writerow([mod, sub, f"{ms:.3f}"])
        written.append(p)
    except OSError as exc:
        raise PipelineError(f"cannot write report to {out}: {exc.strerror or exc}") from None
    return written
