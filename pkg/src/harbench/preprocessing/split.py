"""Exclusion of unwanted rows and train/test + k-fold partitioning."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..representation import FeatureMatrix
from ..rng import derive_rng
from ..utils import first_appearance, largest_remainder


class DataWarning(UserWarning):
    pass


def drop_rows(matrix: FeatureMatrix, subjects=(), activities=(), sessions=()) -> np.ndarray:
    """Indices of the rows that survive the exclusion lists."""
    if sessions and matrix.sessions is None:
        raise DataError("cannot drop sessions: the dataset has no session column")
    keep = np.ones(matrix.n_rows, dtype=bool)
    for ids, column, what in ((subjects, matrix.subjects, "subject"),
                              (activities, matrix.labels, "activity"),
                              (sessions, matrix.sessions, "session")):
        if not ids:
            continue
        ids = [str(i) for i in ids]
        present = set(np.unique(column).tolist())
        unknown = [i for i in ids if i not in present]
        if unknown:
            warnings.warn(f"drop: unknown {what} id(s) {', '.join(unknown)}", DataWarning, stacklevel=3)
        keep &= ~np.isin(column, ids)
    if not keep.any():
        raise DataError("empty dataset: every row was dropped")
    return np.flatnonzero(keep)


def drop(matrix: FeatureMatrix, subjects=(), activities=(), sessions=()) -> FeatureMatrix:
    """Remove every row whose subject, activity or session is listed."""
    kept = drop_rows(matrix, subjects, activities, sessions)
    if len(kept) == matrix.n_rows:
        return matrix
    return matrix.take(kept)


@dataclass(eq=False)
class SplitPlan:
    train_rows: np.ndarray
    test_rows: np.ndarray
    fold_of: np.ndarray        # fold id per entry of train_rows
    method: str
    k_fold: int

    def fold(self, f):
        """Positions (into train_rows) of the fit and validation parts of fold ``f``."""
        val = np.flatnonzero(self.fold_of == f)
        fit = np.flatnonzero(self.fold_of != f)
        return fit, val


def _check_train_classes(labels, train_rows):
    missing = sorted(set(np.unique(labels).tolist()) - set(np.unique(labels[train_rows]).tolist()))
    if missing:
        raise DataError(f"class(es) {', '.join(missing)} absent from the training set after split")


def _stratified_folds(labels, k, rng):
    """Fold id per position; classes are dealt round-robin so sizes differ by <= 1."""
    order = []
    for cls in first_appearance(labels):
        pos = np.flatnonzero(labels == cls)
        order.append(rng.permutation(pos))
    order = np.concatenate(order)
    fold_of = np.empty(len(labels), dtype=int)
    fold_of[order] = np.arange(len(order)) % k
    return fold_of


def split(matrix: FeatureMatrix, method="intra", test_size=0.25, k_fold=3,
          test_subjects=(), seed=0) -> SplitPlan:
    rng = derive_rng(seed, "split")
    labels = matrix.labels
    n = matrix.n_rows
    if method == "intra":
        classes = first_appearance(labels)
        sizes = np.array([(labels == c).sum() for c in classes])
        quota = largest_remainder(sizes, int(round(test_size * n)))
        quota = np.minimum(quota, sizes - 1)
        test = []
        for c, q in zip(classes, quota):
            pos = rng.permutation(np.flatnonzero(labels == c))
            test.append(pos[:q])
        test_rows = np.sort(np.concatenate(test)).astype(int)
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_rows] = False
        train_rows = np.flatnonzero(train_mask)
        _check_train_classes(labels, train_rows)
        fold_of = _stratified_folds(labels[train_rows], k_fold, rng)
    elif method == "inter":
        subjects = first_appearance(matrix.subjects)
        if len(subjects) < 2:
            raise DataError("inter-subject split needs at least 2 subjects")
        if test_subjects:
            chosen = [str(s) for s in test_subjects]
            unknown = [s for s in chosen if s not in set(subjects.tolist())]
            if unknown:
                raise DataError(f"test_subjects not in dataset: {', '.join(unknown)}")
            if len(set(chosen)) >= len(subjects):
                raise DataError("test_subjects leaves no subject for training")
        else:
            m = min(len(subjects) - 1, max(1, math.ceil(test_size * len(subjects))))
            chosen = rng.permutation(subjects)[:m].tolist()
        test_mask = np.isin(matrix.subjects, chosen)
        test_rows = np.flatnonzero(test_mask)
        train_rows = np.flatnonzero(~test_mask)
        _check_train_classes(labels, train_rows)
        train_subjects = first_appearance(matrix.subjects[train_rows])
        if len(train_subjects) < k_fold:
            raise DataError(f"inter split: {len(train_subjects)} training subjects cannot "
                            f"form {k_fold} subject-wise folds")
        perm = rng.permutation(train_subjects)
        fold_of_subject = {s: i % k_fold for i, s in enumerate(perm)}
        fold_of = np.array([fold_of_subject[s] for s in matrix.subjects[train_rows]], dtype=int)
    else:
        raise DataError(f"unknown split method {method!r}")
    return SplitPlan(train_rows=train_rows, test_rows=test_rows, fold_of=fold_of,
                     method=method, k_fold=k_fold)
