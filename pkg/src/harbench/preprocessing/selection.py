"""Feature selection fitted on training rows."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ..models.tree import RandomForest

FOREST_TREES = 50
RFE_STEP = 0.10
L1_STRENGTH = 0.01


@dataclass(frozen=True, eq=False)
class SelectionResult:
    kept: np.ndarray            # ordered feature indices
    scores: np.ndarray          # one importance score per input feature
    method: str

    def to_json(self, names=None):
        kept = self.kept.tolist()
        return {"method": self.method,
                "kept": [names[i] for i in kept] if names is not None else kept,
                "scores": ({names[i]: float(s) for i, s in enumerate(self.scores)}
                           if names is not None else self.scores.tolist())}


def forest_importances(X, y, seed=0, n_trees=FOREST_TREES):
    n_classes = int(y.max()) + 1
    return RandomForest(n_estimators=n_trees, seed=seed).fit(X, y, n_classes).feature_importances_


def l1_logistic(X, y, strength=L1_STRENGTH, n_iter=2000):
    """One-vs-rest L1 logistic regression by accelerated proximal gradient.

    Minimises mean log-loss + ``strength`` * ||w||_1 on z-scored features;
    the intercept is not penalised. Returns coefficients of shape (C', F).
    """
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    Z = np.where(sd > 0, (X - mu) / np.where(sd > 0, sd, 1.0), 0.0)
    n, F = Z.shape
    classes = np.unique(y)
    targets = [classes[1]] if len(classes) == 2 else list(classes)
    Y = np.stack([(y == c).astype(float) for c in targets], axis=1)       # (n, C')
    Za = np.hstack([Z, np.ones((n, 1))])
    lip = 0.25 * np.linalg.norm(Za, 2) ** 2 / n
    step = 1.0 / lip
    W = np.zeros((F + 1, len(targets)))
    V = W.copy()
    t = 1.0
    for _ in range(n_iter):
        p = 1.0 / (1.0 + np.exp(-(Za @ V)))
        G = Za.T @ (p - Y) / n
        W_new = V - step * G
        W_new[:F] = np.sign(W_new[:F]) * np.maximum(np.abs(W_new[:F]) - step * strength, 0.0)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        V = W_new + ((t - 1) / t_new) * (W_new - W)
        if np.max(np.abs(W_new - W)) < 1e-10:
            W = W_new
            break
        W, t = W_new, t_new
    return W[:F].T


def select_features(X, y, method, n_features_to_select=None, threshold=0.0, seed=0) -> SelectionResult:
    """Choose columns of ``X`` (training rows only). ``y`` is integer-coded."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    F = X.shape[1]
    if method == "variance":
        scores = X.var(axis=0)
        kept = np.flatnonzero(scores > threshold)
    elif method == "l1":
        coef = l1_logistic(X, y)
        scores = np.abs(coef).max(axis=0)
        kept = np.flatnonzero(scores > 0)
    elif method == "tree_based":
        scores = forest_importances(X, y, seed)
        kept = np.flatnonzero(scores > scores.mean())
    elif method == "recursive":
        if n_features_to_select is None:
            raise ConfigError("recursive selection needs n_features_to_select")
        target = min(int(n_features_to_select), F)
        active = np.arange(F)
        scores = np.zeros(F)
        rnd = 0
        while len(active) > target:
            imp = forest_importances(X[:, active], y, seed + rnd)
            scores[active] = imp
            n_drop = min(max(1, int(RFE_STEP * len(active))), len(active) - target)
            worst = np.lexsort((active, imp))[:n_drop]        # lowest importance, then index
            active = np.delete(active, worst)
            rnd += 1
        kept = np.sort(active)
    else:
        raise ConfigError(f"unknown selection method {method!r}")
    if not len(kept):
        raise DataError(f"feature selection ({method}) kept no features; "
                        "lower the threshold or use another method")
    return SelectionResult(np.asarray(kept, dtype=int), np.asarray(scores, dtype=float), method)
