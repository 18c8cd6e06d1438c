"""One-vs-rest linear SVM trained by full-batch sub-gradient descent."""
import numpy as np


class LinearSVM:
    """Minimises, per class, ``||w||^2 / 2 + C * sum_i loss(y_i (w.x_i + b))``.

    ``loss`` is ``hinge`` (max(0, 1-m)) or ``squared_hinge``. The objective is
    divided by ``C * n`` for step-size purposes; the best iterate by
    objective value is kept.
    """

    def __init__(self, C=1.0, loss="squared_hinge", n_iter=1000, lr=0.5):
        self.C = C
        self.loss = loss
        self.n_iter = n_iter
        self.lr = lr

    def _objective(self, W, b, X, Y, lam):
        m = Y * (X @ W + b)
        slack = np.maximum(0.0, 1.0 - m)
        loss = slack if self.loss == "hinge" else slack ** 2
        return 0.5 * lam * (W ** 2).sum(axis=0) + loss.mean(axis=0)

    def fit(self, X, y, n_classes=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        C = int(n_classes if n_classes is not None else y.max() + 1)
        n, F = X.shape
        Y = np.where(y[:, None] == np.arange(C)[None, :], 1.0, -1.0)     # (n, C)
        lam = 1.0 / (self.C * n)
        # curvature scale of the data term, keeps the step size unit-free
        scale = max(float((X ** 2).sum(axis=1).mean()) + 1.0, 1e-12)
        W = np.zeros((F, C))
        b = np.zeros(C)
        best_W, best_b = W.copy(), b.copy()
        best_obj = self._objective(W, b, X, Y, lam)
        for t in range(1, self.n_iter + 1):
            m = Y * (X @ W + b)
            if self.loss == "hinge":
                g = -Y * (m < 1)
                eta = self.lr / (scale * np.sqrt(t))
            else:
                g = -2.0 * Y * np.maximum(0.0, 1.0 - m)
                eta = self.lr / (2.0 * scale)
            gW = X.T @ g / n + lam * W
            gb = g.mean(axis=0)
            W = W - eta * gW
            b = b - eta * gb
            obj = self._objective(W, b, X, Y, lam)
            improved = obj < best_obj
            best_W[:, improved] = W[:, improved]
            best_b[improved] = b[improved]
            best_obj = np.minimum(obj, best_obj)
        self.coef_ = best_W.T
        self.intercept_ = best_b
        return self

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.coef_.T + self.intercept_

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)
