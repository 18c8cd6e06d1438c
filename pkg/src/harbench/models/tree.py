"""CART decision trees and random forests on integer-coded labels."""
from __future__ import annotations

import numpy as np

from ..rng import derive_rng


def _impurity(counts, criterion):
    """Impurity of count vectors along the last axis."""
    n = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, counts / np.where(n > 0, n, 1), 0.0)
    if criterion == "gini":
        return 1.0 - (p ** 2).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0).sum(axis=-1)


class DecisionTree:
    """Binary CART; thresholds at midpoints between sorted unique values.

    ``max_features`` < n_features draws a random feature subset at every
    split (random-forest mode); with all features the tree is deterministic.
    """

    def __init__(self, max_depth=None, criterion="gini", max_features=None,
                 min_samples_split=2, seed=0):
        self.max_depth = max_depth
        self.criterion = criterion
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.seed = seed

    def fit(self, X, y, n_classes=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_classes_ = int(n_classes if n_classes is not None else y.max() + 1)
        self.n_features_ = X.shape[1]
        self._rng = derive_rng(self.seed, "tree")
        feature, threshold, left, right, value = [], [], [], [], []
        importance = np.zeros(self.n_features_)

        def new_node(counts):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(counts)
            return len(feature) - 1

        root_counts = np.bincount(y, minlength=self.n_classes_).astype(float)
        stack = [(new_node(root_counts), np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            counts = value[node]
            if (len(idx) < self.min_samples_split or (counts > 0).sum() <= 1
                    or (self.max_depth is not None and depth >= self.max_depth)):
                continue
            best = self._best_split(X[idx], y[idx], counts)
            if best is None:
                continue
            f, thr, decrease = best
            importance[f] += decrease
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            feature[node] = f
            threshold[node] = thr
            ln = new_node(np.bincount(y[li], minlength=self.n_classes_).astype(float))
            rn = new_node(np.bincount(y[ri], minlength=self.n_classes_).astype(float))
            left[node], right[node] = ln, rn
            # push right first so the left subtree is numbered first
            stack.append((rn, ri, depth + 1))
            stack.append((ln, li, depth + 1))

        self.feature_ = np.array(feature)
        self.threshold_ = np.array(threshold)
        self.left_ = np.array(left)
        self.right_ = np.array(right)
        self.value_ = np.array(value)
        total = importance.sum()
        self.feature_importances_ = importance / total if total > 0 else importance
        del self._rng
        return self

    def _candidate_features(self):
        F = self.n_features_
        mf = self.max_features
        if mf is None or mf >= F:
            return np.arange(F)
        return np.sort(self._rng.choice(F, size=mf, replace=False))

    def _best_split(self, Xn, yn, counts):
        m = len(yn)
        feats = self._candidate_features()
        xs = Xn[:, feats]                                       # (m, F')
        order = np.argsort(xs, axis=0, kind="stable")
        xs = np.take_along_axis(xs, order, axis=0)
        onehot = np.eye(self.n_classes_)[yn[order]]             # (m, F', C)
        left_counts = np.cumsum(onehot, axis=0)[:-1]            # split after row i
        right_counts = counts[None, None, :] - left_counts
        n_left = np.arange(1, m)[:, None]
        parent = _impurity(counts, self.criterion)
        child = (n_left * _impurity(left_counts, self.criterion)
                 + (m - n_left) * _impurity(right_counts, self.criterion)) / m
        valid = xs[1:] > xs[:-1]
        child = np.where(valid, child, np.inf).T                # (F', m-1): feature-major ties
        flat = int(np.argmin(child))
        fi, pos = divmod(flat, m - 1)
        if not np.isfinite(child[fi, pos]):
            return None
        decrease = m * (parent - child[fi, pos])
        if decrease <= 1e-12:
            return None
        thr = 0.5 * (xs[pos, fi] + xs[pos + 1, fi])
        if not thr < xs[pos + 1, fi]:           # adjacent floats: midpoint rounds up
            thr = xs[pos, fi]
        return int(feats[fi]), float(thr), float(decrease)

    def _leaves(self, X):
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=int)
        active = self.feature_[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            nd = node[rows]
            go_left = X[rows, self.feature_[nd]] <= self.threshold_[nd]
            node[rows] = np.where(go_left, self.left_[nd], self.right_[nd])
            active[rows] = self.feature_[node[rows]] >= 0
        return node

    def predict_proba(self, X):
        v = self.value_[self._leaves(X)]
        return v / v.sum(axis=1, keepdims=True)

    def predict(self, X):
        return np.argmax(self.value_[self._leaves(X)], axis=1)

    @property
    def depth(self):
        depth = np.zeros(len(self.feature_), dtype=int)
        for i in range(len(self.feature_)):
            if self.feature_[i] >= 0:
                depth[self.left_[i]] = depth[self.right_[i]] = depth[i] + 1
        return int(depth.max())


def sqrt_features(n_features):
    return max(1, int(np.sqrt(n_features)))


class RandomForest:
    """Bagged CART trees with per-split random feature subsets; majority vote."""

    def __init__(self, n_estimators=100, max_depth=None, criterion="gini",
                 max_features="sqrt", seed=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.criterion = criterion
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y, n_classes=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_classes_ = int(n_classes if n_classes is not None else y.max() + 1)
        F = X.shape[1]
        mf = sqrt_features(F) if self.max_features == "sqrt" else (self.max_features or F)
        self.trees_ = []
        for t in range(self.n_estimators):
            boot = bootstrap_indices(len(y), self.seed, t)
            tree = DecisionTree(max_depth=self.max_depth, criterion=self.criterion,
                                max_features=mf, seed=int(derive_rng(self.seed, "rf-tree", t)
                                                          .integers(2**63)))
            self.trees_.append(tree.fit(X[boot], y[boot], self.n_classes_))
        self.feature_importances_ = np.mean([t.feature_importances_ for t in self.trees_], axis=0)
        return self

    def predict(self, X):
        votes = np.stack([t.predict(X) for t in self.trees_], axis=1)
        counts = np.stack([(votes == c).sum(axis=1) for c in range(self.n_classes_)], axis=1)
        return np.argmax(counts, axis=1)


def bootstrap_indices(n, seed, tree_index):
    return derive_rng(seed, "rf-bootstrap", tree_index).integers(0, n, size=n)
