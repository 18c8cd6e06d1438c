"""Fixed-order orchestration: clean -> represent -> preprocess -> train -> evaluate."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import cleaning, config as config_mod, dataset_io, representation
from .errors import HarError, PipelineError, StageError
from .evaluation import ModelResult, StageTimer, assemble_report, confusion, metrics
from .models import fit_predict_classical, fit_predict_cnn
from .preprocessing import apply_scaler, balance, fit_scaler, select_features, split
from .preprocessing.split import SplitPlan, drop_rows
from .utils import encode_labels

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StagePlan:
    stages: tuple           # ((module, name), ...)

    @property
    def names(self) -> list:
        return [name for _, name in self.stages]

    def enabled(self, name) -> bool:
        return name in self.names


def build_plan(cfg: config_mod.PipelineConfig) -> StagePlan:
    st = [("cleaning", "impute")]
    if cfg.filter != "none":
        st.append(("cleaning", "filter"))
    if cfg.data_treatment in ("segmentation", "features_extraction"):
        st.append(("representation", "segment"))
    if cfg.data_treatment == "features_extraction":
        st.append(("representation", "extract_features"))
    if cfg.drop_subjects or cfg.drop_activities or cfg.drop_sessions:
        st.append(("preprocessing", "drop"))
    st.append(("preprocessing", "split"))
    if cfg.normalization_method != "none":
        st.append(("preprocessing", "scale"))
    if cfg.features_selection:
        st.append(("preprocessing", "select"))
    if cfg.data_balancing_method != "none":
        st.append(("preprocessing", "balance"))
    for m in cfg.use_ml:
        st.append(("models", m))
    for m in cfg.use_dl:
        st.append(("models", m))
    st.append(("evaluation", "evaluate"))
    return StagePlan(tuple(st))


@dataclass
class Prepared:
    """Model-ready arrays derived from one FeatureMatrix and a split."""
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    plan: SplitPlan             # folds over the (possibly balanced) training rows
    feature_names: tuple
    layout: Optional[tuple]
    selection: object = None
    scaler: object = None
    train_counts_after_balance: Optional[dict] = None


def prepare(matrix, split_plan, y, cfg, timer, plan: StagePlan, select=True, tag="") -> Prepared:
    """Scale, select and balance using training rows only; test rows only get transformed."""
    X = matrix.values
    tr, te = split_plan.train_rows, split_plan.test_rows
    X_train, X_test = X[tr], X[te]
    names, layout = matrix.feature_names, matrix.layout
    out = Prepared(X_train, y[tr], X_test, y[te], split_plan, names, layout)

    if plan.enabled("scale"):
        with _stage(timer, "preprocessing", "scale" + tag):
            params = fit_scaler(X_train, cfg.normalization_method)
            out.X_train = apply_scaler(params, X_train)
            out.X_test = apply_scaler(params, X_test)
            out.scaler = params
    if select and plan.enabled("select"):
        with _stage(timer, "preprocessing", "select" + tag):
            sel = select_features(out.X_train, out.y_train, cfg.selection_method,
                                  cfg.n_features_to_select, seed=cfg.seed)
            out.X_train = out.X_train[:, sel.kept]
            out.X_test = out.X_test[:, sel.kept]
            out.feature_names = tuple(names[i] for i in sel.kept)
            out.layout = None
            out.selection = sel
    if plan.enabled("balance"):
        with _stage(timer, "preprocessing", "balance" + tag):
            res = balance(out.X_train, out.y_train, cfg.data_balancing_method, seed=cfg.seed)
            out.X_train, out.y_train = res.X, res.y
            # every output row inherits the CV fold of the training row it came from
            out.plan = SplitPlan(train_rows=np.arange(len(res.y)), test_rows=np.zeros(0, int),
                                 fold_of=split_plan.fold_of[res.source], method=split_plan.method,
                                 k_fold=split_plan.k_fold)
            out.train_counts_after_balance = {int(c): int((res.y == c).sum())
                                              for c in np.unique(res.y)}
    return out


class _stage:
    """Time a stage and tag any failure with its name."""

    def __init__(self, timer, module, name):
        self.cm = timer.stage(module, name)
        self.name = name

    def __enter__(self):
        self.cm.__enter__()

    def __exit__(self, typ, exc, tb):
        self.cm.__exit__(None, None, None)
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (HarError, ValueError, ArithmeticError, np.linalg.LinAlgError)):
            raise StageError(self.name, exc) from exc
        return False


def resolve_config(cfg: config_mod.PipelineConfig):
    """Cross-check against the file and pin an inferred sampling frequency."""
    meta = dataset_io.peek_dataset(cfg)
    warns = config_mod.validate(cfg, meta)
    if cfg.sampling_frequency is None and meta.inferred_sampling_frequency is not None:
        cfg = cfg.replace(sampling_frequency=int(round(meta.inferred_sampling_frequency)))
    return cfg, warns


def run(cfg: config_mod.PipelineConfig, jobs: int = 1):
    timer = StageTimer()
    with _stage(timer, "input", "load"):
        cfg, warns = resolve_config(cfg)
        for w in warns:
            log.warning(w)
        data = dataset_io.load_dataset(cfg)
    plan = build_plan(cfg)

    with _stage(timer, "cleaning", "impute"):
        data = cleaning.impute(data, cleaning.ImputationPolicy(cfg.sub_method, cfg.constant_value),
                               max_gap=cfg.window_samples)
    if plan.enabled("filter"):
        with _stage(timer, "cleaning", "filter"):
            spec = cleaning.FilterSpec(cfg.filter, cfg.filter_order, cfg.cut, data.sampling_frequency)
            data = cleaning.apply_filter(data, cleaning.design_filter(spec))

    windows = None
    if plan.enabled("segment"):
        with _stage(timer, "representation", "segment"):
            windowed = representation.segment(data, cfg.time_window, cfg.overlap)
            windows = windowed.as_matrix()
        matrix = windows
    else:
        matrix = representation.passthrough_raw(data)
    if plan.enabled("extract_features"):
        with _stage(timer, "representation", "extract_features"):
            matrix = representation.extract_features(windowed, cfg.features_domain)
    exported = matrix

    if plan.enabled("drop"):
        with _stage(timer, "preprocessing", "drop"):
            kept = drop_rows(matrix, cfg.drop_subjects, cfg.drop_activities, cfg.drop_sessions)
            matrix = matrix.take(kept)
            if cfg.data_treatment == "features_extraction":
                windows = windows.take(kept)       # window rows align with feature rows
            elif windows is not None:
                windows = matrix

    with _stage(timer, "preprocessing", "split"):
        split_plan = split(matrix, cfg.split_method, cfg.test_size, cfg.k_fold,
                           cfg.test_subjects, seed=cfg.seed)
    y, classes = encode_labels(matrix.labels)
    n_classes = len(classes)

    main = prepare(matrix, split_plan, y, cfg, timer, plan)
    cnn_input = main
    if "CNN" in cfg.use_dl and cfg.data_treatment == "features_extraction" and not cfg.use_features:
        cnn_input = prepare(windows, split_plan, y, cfg, timer, plan, select=False, tag="[CNN]")

    results = []
    for model_id in cfg.use_ml:
        with _stage(timer, "models", model_id):
            trained, pred = fit_predict_classical(model_id, main.X_train, main.y_train, main.plan,
                                                  main.X_test, n_classes, seed=cfg.seed, jobs=jobs)
        results.append((trained, pred, main.y_test))
    for model_id in cfg.use_dl:
        with _stage(timer, "models", model_id):
            trained, pred, _ = fit_predict_cnn(cnn_input.X_train, cnn_input.y_train, cnn_input.plan,
                                               cnn_input.X_test, n_classes, epochs=cfg.epochs,
                                               loss_threshold=cfg.loss_threshold,
                                               layout=cnn_input.layout, seed=cfg.seed, jobs=jobs)
        results.append((trained, pred, cnn_input.y_test))

    with _stage(timer, "evaluation", "evaluate"):
        model_results = []
        for trained, pred, y_true in results:
            cm = confusion(classes[y_true], classes[pred], classes)
            model_results.append(ModelResult(
                model_id=trained.model_id, best_params=trained.params,
                candidates=trained.candidates,
                confusion=cm, metrics=metrics(cm), curve=trained.curve,
                fit_seconds=trained.fit_seconds, predictions=[str(p) for p in classes[pred]],
                extra=trained.extra))
        selected = None
        if main.selection is not None:
            selected = main.selection.to_json(list(matrix.feature_names))
        data_summary = {
            "rows": int(matrix.n_rows),
            "features": len(main.feature_names),
            "classes": [str(c) for c in classes],
            "sampling_frequency": data.sampling_frequency,
            "train_rows": int(len(split_plan.train_rows)),
            "test_rows": int(len(split_plan.test_rows)),
            "train_subjects": sorted({str(s) for s in matrix.subjects[split_plan.train_rows]}),
            "test_subjects": sorted({str(s) for s in matrix.subjects[split_plan.test_rows]}),
            "train_class_counts": {str(classes[c]): int((main.y_train == c).sum())
                                   for c in range(n_classes)},
            "warnings": list(warns),
        }
        report = assemble_report(model_results, config_mod.as_dict(cfg), cfg.seed,
                                 plan.names, selected, data_summary, timer.rows)
    report.timings = timer.rows
    if cfg.export_representation:
        report.artifacts["representation"] = exported
    return report

