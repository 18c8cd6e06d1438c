"""Grid-search training over the model bank with k-fold cross-validation."""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from ..errors import PipelineError
from ..evaluation import confusion, metrics
from ..rng import derive_rng
from . import cnn
from .discriminant import LDA, QDA
from .neighbors import KNN
from .svm import LinearSVM
from .tree import DecisionTree, RandomForest

log = logging.getLogger(__name__)

CLASSICAL = ("kNN", "wkNN", "LDA", "QDA", "SVM", "RF", "DT")

DEFAULT_GRIDS = {
    "kNN": {"k": [1, 3, 5, 7, 9]},
    "wkNN": {"k": [1, 3, 5, 7, 9]},
    "DT": {"max_depth": [4, 8, 16, None], "criterion": ["gini", "entropy"]},
    "RF": {"n_estimators": [50, 100], "max_depth": [8, 16, None]},
    "SVM": {"C": [0.1, 1.0, 10.0], "loss": ["hinge", "squared_hinge"]},
    "LDA": {"ridge": [1e-6, 1e-3]},
    "QDA": {"ridge": [1e-6, 1e-3]},
}


@dataclass(frozen=True)
class HyperGrid:
    model_id: str
    axes: tuple                 # ((name, (values...)), ...)

    @classmethod
    def from_dict(cls, model_id, axes: dict) -> "HyperGrid":
        return cls(model_id, tuple((k, tuple(v)) for k, v in axes.items()))

    @classmethod
    def default(cls, model_id) -> "HyperGrid":
        return cls.from_dict(model_id, DEFAULT_GRIDS[model_id])

    def candidates(self) -> list:
        """Cartesian product, first axis varying slowest."""
        names = [a for a, _ in self.axes]
        combos = itertools.product(*(v for _, v in self.axes))
        out = [dict(zip(names, c)) for c in combos]
        if not out:
            raise PipelineError(f"empty hyperparameter grid for {self.model_id}")
        return out


def make_model(model_id, params, seed=0):
    if model_id == "kNN":
        return KNN(k=params["k"])
    if model_id == "wkNN":
        return KNN(k=params["k"], weighted=True)
    if model_id == "LDA":
        return LDA(ridge=params.get("ridge", 1e-6))
    if model_id == "QDA":
        return QDA(ridge=params.get("ridge", 1e-6))
    if model_id == "DT":
        return DecisionTree(max_depth=params.get("max_depth"),
                            criterion=params.get("criterion", "gini"), seed=seed)
    if model_id == "RF":
        return RandomForest(n_estimators=params.get("n_estimators", 100),
                            max_depth=params.get("max_depth"),
                            criterion=params.get("criterion", "gini"),
                            max_features=params.get("max_features", "sqrt"), seed=seed)
    if model_id == "SVM":
        return LinearSVM(C=params.get("C", 1.0), loss=params.get("loss", "squared_hinge"))
    raise PipelineError(f"unknown model {model_id!r}")


@dataclass
class TrainingCurve:
    kind: str                   # "epoch" or "candidate"
    loss: list
    accuracy: list

    def rows(self):
        return list(zip(range(len(self.loss)), self.loss, self.accuracy))


@dataclass
class TrainedModel:
    model_id: str
    params: dict
    model: object
    candidates: list = field(default_factory=list)
    best_index: int = 0
    curve: Optional[TrainingCurve] = None
    fit_seconds: float = 0.0
    extra: dict = field(default_factory=dict)


def _fold_scores(y_true, y_pred, n_classes):
    agg = metrics(confusion(y_true, y_pred, n_classes)).macro
    return agg


def _check_fold_classes(y_fit, n_classes, model_id, fold):
    missing = sorted(set(range(n_classes)) - set(np.unique(y_fit).tolist()))
    if missing:
        raise PipelineError(f"{model_id}: CV fold {fold} training part is missing class "
                            f"index(es) {missing}")


def _cv_job(model_id, params, X, y, fit_pos, val_pos, n_classes, seed):
    model = make_model(model_id, params, seed)
    model.fit(X[fit_pos], y[fit_pos], n_classes)
    return _fold_scores(y[val_pos], model.predict(X[val_pos]), n_classes)


def _run(jobs, tasks):
    if jobs == 1 or len(tasks) <= 1:
        return [fn(*args) for fn, args in tasks]
    return Parallel(n_jobs=jobs)(delayed(fn)(*args) for fn, args in tasks)


def fit_predict_classical(model_id, X_train, y_train, plan, X_test, n_classes,
                          grid: Optional[HyperGrid] = None, seed=0, jobs=1):
    """Grid search with k-fold CV; refit the winner on all training rows.

    Winner = highest mean CV accuracy, then macro-F1, then lowest index.
    """
    grid = grid or HyperGrid.default(model_id)
    cands = grid.candidates()
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train, dtype=int)
    folds = [plan.fold(f) for f in range(plan.k_fold)]
    for f, (fit_pos, _) in enumerate(folds):
        _check_fold_classes(y_train[fit_pos], n_classes, model_id, f)

    t0 = time.perf_counter()
    tasks = []
    for ci, params in enumerate(cands):
        for f, (fit_pos, val_pos) in enumerate(folds):
            job_seed = int(derive_rng(seed, model_id, "cv", ci, f).integers(2**63))
            tasks.append((_cv_job, (model_id, params, X_train, y_train, fit_pos, val_pos,
                                    n_classes, job_seed)))
    scores = _run(jobs, tasks)

    table = []
    for ci, params in enumerate(cands):
        per_fold = scores[ci * len(folds):(ci + 1) * len(folds)]
        mean = {k: float(np.mean([s[k] for s in per_fold])) for k in per_fold[0]}
        table.append({
            "index": ci,
            "params": params,
            "fold_accuracy": [s["accuracy"] for s in per_fold],
            "fold_f1": [s["f1"] for s in per_fold],
            "mean_accuracy": mean["accuracy"],
            "mean_f1": mean["f1"],
            "mean_metrics": mean,
        })
    best = min(table, key=lambda r: (-r["mean_accuracy"], -r["mean_f1"], r["index"]))["index"]
    refit_seed = int(derive_rng(seed, model_id, "refit").integers(2**63))
    model = make_model(model_id, cands[best], refit_seed).fit(X_train, y_train, n_classes)
    curve = TrainingCurve("candidate", [1.0 - r["mean_accuracy"] for r in table],
                          [r["mean_accuracy"] for r in table])
    trained = TrainedModel(model_id, cands[best], model, table, best, curve,
                           fit_seconds=time.perf_counter() - t0)
    return trained, model.predict(np.asarray(X_test, dtype=float))


# --------------------------------------------------------------------------
# CNN

def _cnn_fold_job(x, y, fit_pos, val_pos, n_classes, epochs, seed):
    try:
        res = cnn.train(x[fit_pos], y[fit_pos], n_classes, epochs, seed)
    except cnn.DivergenceError as exc:
        return {"error": str(exc)}
    val_loss, val_acc = cnn.evaluate(res.params, x[val_pos], y[val_pos]) if len(val_pos) else (np.inf, 0.0)
    return {"params": res.params, "losses": res.losses, "accuracies": res.accuracies,
            "val_loss": val_loss, "val_accuracy": val_acc}


def ensemble_members(val_losses, loss_threshold):
    """Folds whose validation loss is within ``loss_threshold`` of the best one."""
    losses = np.asarray(val_losses, dtype=float)
    ok = np.isfinite(losses)
    if not ok.any():
        return []
    best = losses[ok].min()
    return [int(i) for i in np.flatnonzero(ok & (losses <= best + loss_threshold))]


def vote(prob_list):
    """Majority vote of member argmaxes; ties go to the higher summed probability."""
    probs = np.stack(prob_list)                                  # (M, N, C)
    N, C = probs.shape[1:]
    votes = np.zeros((N, C))
    for p in probs:
        votes[np.arange(N), p.argmax(axis=1)] += 1
    top = votes == votes.max(axis=1, keepdims=True)
    return np.argmax(np.where(top, probs.sum(axis=0), -np.inf), axis=1)


def fit_predict_cnn(X_train, y_train, plan, X_test, n_classes, epochs=100,
                    loss_threshold=0.4, layout=None, seed=0, jobs=1):
    x = cnn.as_sequences(X_train, layout)
    xt = cnn.as_sequences(X_test, layout)
    y = np.asarray(y_train, dtype=int)
    t0 = time.perf_counter()
    tasks = []
    for f in range(plan.k_fold):
        fit_pos, val_pos = plan.fold(f)
        _check_fold_classes(y[fit_pos], n_classes, "CNN", f)
        fold_seed = int(derive_rng(seed, "CNN", "fold", f).integers(2**63))
        tasks.append((_cnn_fold_job, (x, y, fit_pos, val_pos, n_classes, epochs, fold_seed)))
    results = _run(jobs, tasks)

    failed = {f: r["error"] for f, r in enumerate(results) if "error" in r}
    for f, msg in failed.items():
        log.warning("CNN fold %d aborted: %s", f, msg)
    if len(failed) == len(results):
        raise PipelineError("CNN: every fold diverged: " + "; ".join(failed.values()))
    val_losses = [r.get("val_loss", np.inf) for r in results]
    members = ensemble_members(val_losses, loss_threshold)
    probs = [cnn.predict_proba(results[m]["params"], xt) for m in members]
    pred = vote(probs)

    good = [r for r in results if "error" not in r]
    curve = TrainingCurve("epoch", list(np.mean([r["losses"] for r in good], axis=0)),
                          list(np.mean([r["accuracies"] for r in good], axis=0)))
    folds = [{"fold": f, "val_loss": None if "error" in r else r["val_loss"],
              "val_accuracy": None if "error" in r else r["val_accuracy"],
              "error": r.get("error"), "in_ensemble": f in members}
             for f, r in enumerate(results)]
    trained = TrainedModel("CNN", {"epochs": epochs, "loss_threshold": loss_threshold,
                                   "ensemble": members},
                           [results[m]["params"] for m in members], folds, members[0] if members else 0,
                           curve, fit_seconds=time.perf_counter() - t0,
                           extra={"fold_curves": [{"loss": r.get("losses"), "accuracy": r.get("accuracies")}
                                                  for r in results]})
    return trained, pred, curve
