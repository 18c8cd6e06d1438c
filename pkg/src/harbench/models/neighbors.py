"""k-nearest-neighbour classifiers (plain and inverse-distance weighted)."""
import numpy as np

from ..distance import knn


class KNN:
    def __init__(self, k=5, weighted=False):
        self.k = k
        self.weighted = weighted

    def fit(self, X, y, n_classes=None):
        self.X_ = np.asarray(X, dtype=float)
        self.y_ = np.asarray(y, dtype=int)
        self.n_classes_ = int(n_classes if n_classes is not None else self.y_.max() + 1)
        return self

    def predict(self, X):
        idx, dist = knn(X, self.X_, self.k)
        labels = self.y_[idx]                                   # (q, k)
        if self.weighted:
            exact = dist == 0
            with np.errstate(divide="ignore"):
                w = np.where(exact.any(axis=1, keepdims=True), exact.astype(float), 1.0 / dist)
        else:
            w = np.ones_like(dist)
        scores = np.zeros((len(idx), self.n_classes_))
        np.add.at(scores, (np.arange(len(idx))[:, None], labels), w)
        # ties: the class of the nearest neighbour among the tied classes
        best = scores.max(axis=1, keepdims=True)
        tied = np.isclose(scores, best, rtol=1e-12, atol=0)
        pred = np.argmax(scores, axis=1)
        multi = tied.sum(axis=1) > 1
        for i in np.flatnonzero(multi):
            for lab in labels[i]:
                if tied[i, lab]:
                    pred[i] = lab
                    break
        return pred
