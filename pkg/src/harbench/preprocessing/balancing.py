"""Class balancing by under- and over-sampling (training rows only)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..distance import knn, sq_dists
from ..errors import ConfigError, DataError
from ..rng import derive_rng
from ..utils import first_appearance, largest_remainder

UNDER = ("random_under", "near_miss", "edited_nn")
OVER = ("random_over", "smote", "adasyn", "kmeans_smote")


@dataclass(eq=False)
class BalanceResult:
    X: np.ndarray
    y: np.ndarray
    source: np.ndarray          # original row behind each output row (parent ``a`` if synthetic)
    synthetic: np.ndarray       # bool mask
    partner: np.ndarray         # parent ``b`` of synthetic rows, -1 otherwise
    lam: np.ndarray             # interpolation weight of synthetic rows, nan otherwise


def _counts(y):
    classes = first_appearance(y)
    return classes, np.array([(y == c).sum() for c in classes])


def _kept(X, y, rows):
    rows = np.sort(np.asarray(rows, dtype=int))
    n = len(rows)
    return BalanceResult(X[rows], y[rows], rows, np.zeros(n, bool), np.full(n, -1), np.full(n, np.nan))


def random_under(X, y, rng):
    classes, counts = _counts(y)
    target = counts.min()
    keep = [rng.choice(np.flatnonzero(y == c), size=target, replace=False) for c in classes]
    return _kept(X, y, np.concatenate(keep))


def near_miss(X, y, k=5):
    """NearMiss-1: per larger class keep the rows closest (mean distance to their
    k nearest minority rows) to the minority class."""
    classes, counts = _counts(y)
    mino = classes[np.argmin(counts)]
    target = counts.min()
    mino_rows = np.flatnonzero(y == mino)
    keep = [mino_rows]
    for c in classes:
        if c == mino:
            continue
        rows = np.flatnonzero(y == c)
        _, dist = knn(X[rows], X[mino_rows], k)
        score = dist.mean(axis=1)
        order = np.lexsort((rows, score))
        keep.append(rows[order[:target]])
    return _kept(X, y, np.concatenate(keep))


def edited_nn_mask(X, y, k=5):
    """True for rows to remove: more than k/2 of their k neighbours disagree."""
    idx, _ = knn(X, X, k, exclude_self=True)
    disagree = (y[idx] != y[:, None]).sum(axis=1)
    return disagree > k / 2


def edited_nn(X, y, k=5):
    if len(y) <= k:
        raise DataError(f"edited_nn needs more than k={k} training rows")
    return _kept(X, y, np.flatnonzero(~edited_nn_mask(X, y, k)))


def random_over(X, y, rng):
    classes, counts = _counts(y)
    target = counts.max()
    extra = [rng.choice(np.flatnonzero(y == c), size=target - n, replace=True)
             for c, n in zip(classes, counts) if n < target]
    rows = np.concatenate([np.arange(len(y))] + extra) if extra else np.arange(len(y))
    n = len(rows)
    return BalanceResult(X[rows], y[rows], rows, np.zeros(n, bool), np.full(n, -1),
                         np.full(n, np.nan))


def _interpolate(X, y, anchors, partners, rng):
    lam = rng.random(len(anchors))
    Xs = X[anchors] + lam[:, None] * (X[partners] - X[anchors])
    return Xs, y[anchors], lam


def _append(X, y, parts):
    """Originals followed by synthetic blocks ``(anchors, partners, lam, Xs)``."""
    n = len(y)
    if not parts:
        return BalanceResult(X.copy(), y.copy(), np.arange(n), np.zeros(n, bool),
                             np.full(n, -1), np.full(n, np.nan))
    a = np.concatenate([p[0] for p in parts])
    b = np.concatenate([p[1] for p in parts])
    lam = np.concatenate([p[2] for p in parts])
    Xs = np.vstack([p[3] for p in parts])
    m = len(a)
    return BalanceResult(np.vstack([X, Xs]), np.concatenate([y, y[a]]),
                         np.concatenate([np.arange(n), a]),
                         np.concatenate([np.zeros(n, bool), np.ones(m, bool)]),
                         np.concatenate([np.full(n, -1), b]),
                         np.concatenate([np.full(n, np.nan), lam]))


def _check_k(counts, classes, k, method):
    target = counts.max()
    for c, n in zip(classes, counts):
        if n < target and n < k + 1:
            raise DataError(f"{method}: class {c} has {n} rows; at least k+1 = {k + 1} required")


def _same_class_neighbours(X, rows, k):
    idx, _ = knn(X[rows], X[rows], k, exclude_self=True)
    return rows[idx]                                             # (m, k) global indices


def smote(X, y, rng, k=5):
    classes, counts = _counts(y)
    _check_k(counts, classes, k, "smote")
    target = counts.max()
    parts = []
    for c, n in zip(classes, counts):
        if n == target:
            continue
        rows = np.flatnonzero(y == c)
        nbrs = _same_class_neighbours(X, rows, k)
        g = target - n
        pick = rng.integers(0, n, size=g)
        anchors = rows[pick]
        partners = nbrs[pick, rng.integers(0, nbrs.shape[1], size=g)]
        Xs, _, lam = _interpolate(X, y, anchors, partners, rng)
        parts.append((anchors, partners, lam, Xs))
    return _append(X, y, parts)


def adasyn_allocation(X, y, cls, total, k=5):
    """Synthetic-row quota per row of class ``cls``, proportional to the share
    of other-class rows among its k nearest neighbours."""
    rows = np.flatnonzero(y == cls)
    d2 = sq_dists(X[rows], X)
    d2[np.arange(len(rows)), rows] = np.inf
    nbr = np.argsort(d2, axis=1, kind="stable")[:, :k]
    ratio = (y[nbr] != cls).sum(axis=1) / k
    return rows, ratio, largest_remainder(ratio, total)


def adasyn(X, y, rng, k=5):
    classes, counts = _counts(y)
    _check_k(counts, classes, k, "adasyn")
    target = counts.max()
    parts = []
    for c, n in zip(classes, counts):
        if n == target:
            continue
        rows, _, quota = adasyn_allocation(X, y, c, target - n, k)
        nbrs = _same_class_neighbours(X, rows, k)
        pick = np.repeat(np.arange(len(rows)), quota)
        anchors = rows[pick]
        partners = nbrs[pick, rng.integers(0, nbrs.shape[1], size=len(pick))]
        Xs, _, lam = _interpolate(X, y, anchors, partners, rng)
        parts.append((anchors, partners, lam, Xs))
    return _append(X, y, parts)


def kmeans(X, n_clusters, rng, n_iter=300):
    """Lloyd's algorithm with k-means++ seeding. Returns (labels, centers)."""
    n = len(X)
    n_clusters = min(n_clusters, n)
    centers = [X[rng.integers(n)]]
    for _ in range(1, n_clusters):
        d2 = sq_dists(X, np.array(centers)).min(axis=1)
        total = d2.sum()
        nxt = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers.append(X[nxt])
    centers = np.array(centers, dtype=float)
    labels = np.full(n, -1)
    for _ in range(n_iter):
        new = np.argmin(sq_dists(X, centers), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(n_clusters):
            if (labels == j).any():
                centers[j] = X[labels == j].mean(axis=0)
    return labels, centers


def kmeans_smote(X, y, rng, k=5, minority_share=0.5):
    """SMOTE inside k-means clusters dominated by the class being grown.

    Clusters = number of classes. A cluster qualifies for class c when more
    than ``minority_share`` of its rows (and at least 2) belong to c. The
    class's quota is split across qualifying clusters in proportion to the
    mean pairwise distance of the class's rows there (sparser gets more).
    Classes with no qualifying cluster fall back to plain SMOTE.
    """
    classes, counts = _counts(y)
    target = counts.max()
    labels, _ = kmeans(X, len(classes), rng)
    parts = []
    for c, n in zip(classes, counts):
        if n == target:
            continue
        g = target - n
        groups, weights = [], []
        for j in np.unique(labels):
            in_j = labels == j
            rows = np.flatnonzero(in_j & (y == c))
            if len(rows) >= 2 and len(rows) / in_j.sum() > minority_share:
                d = np.sqrt(sq_dists(X[rows], X[rows]))
                groups.append(rows)
                weights.append(d.sum() / (len(rows) * (len(rows) - 1)))
        if not groups:
            groups, weights = [np.flatnonzero(y == c)], [1.0]
            if len(groups[0]) < 2:
                raise DataError(f"kmeans_smote: class {c} has fewer than 2 rows")
        quota = largest_remainder(weights, g)
        for rows, q in zip(groups, quota):
            if q == 0:
                continue
            nbrs = _same_class_neighbours(X, rows, min(k, len(rows) - 1))
            pick = rng.integers(0, len(rows), size=q)
            anchors = rows[pick]
            partners = nbrs[pick, rng.integers(0, nbrs.shape[1], size=q)]
            Xs, _, lam = _interpolate(X, y, anchors, partners, rng)
            parts.append((anchors, partners, lam, Xs))
    return _append(X, y, parts)


def balance(X, y, method, k=5, seed=0) -> BalanceResult:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(first_appearance(y)) < 2:
        raise DataError("balancing needs at least 2 classes in the training set")
    rng = derive_rng(seed, "balance", method)
    if method == "random_under":
        return random_under(X, y, rng)
    if method == "near_miss":
        return near_miss(X, y, k)
    if method == "edited_nn":
        return edited_nn(X, y, k)
    if method == "random_over":
        return random_over(X, y, rng)
    if method == "smote":
        return smote(X, y, rng, k)
    if method == "adasyn":
        return adasyn(X, y, rng, k)
    if method == "kmeans_smote":
        return kmeans_smote(X, y, rng, k)
    raise ConfigError(f"unknown balancing method {method!r}")
