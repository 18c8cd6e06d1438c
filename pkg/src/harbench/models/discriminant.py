"""Gaussian discriminant analysis: shared (LDA) or per-class (QDA) covariance."""
import numpy as np

from ..errors import PipelineError


def _cholesky(cov, what):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise PipelineError(f"{what} covariance is singular even after ridge regularisation") from None


class LDA:
    def __init__(self, ridge=1e-6):
        self.ridge = ridge

    def fit(self, X, y, n_classes=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        C = int(n_classes if n_classes is not None else y.max() + 1)
        n, F = X.shape
        self.means_ = np.zeros((C, F))
        self.log_priors_ = np.full(C, -np.inf)
        scatter = np.zeros((F, F))
        for c in range(C):
            Xc = X[y == c]
            if not len(Xc):
                continue
            self.means_[c] = Xc.mean(axis=0)
            self.log_priors_[c] = np.log(len(Xc) / n)
            d = Xc - self.means_[c]
            scatter += d.T @ d
        cov = scatter / max(n - C, 1) + self.ridge * np.eye(F)
        L = _cholesky(cov, "pooled")
        # Sigma^-1 mu_c via two triangular solves
        self.coef_ = np.linalg.solve(L.T, np.linalg.solve(L, self.means_.T)).T    # (C, F)
        self.intercept_ = -0.5 * np.einsum("cf,cf->c", self.coef_, self.means_) + self.log_priors_
        return self

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.coef_.T + self.intercept_

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)


class QDA:
    def __init__(self, ridge=1e-6):
        self.ridge = ridge

    def fit(self, X, y, n_classes=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        C = int(n_classes if n_classes is not None else y.max() + 1)
        n, F = X.shape
        self.means_ = np.zeros((C, F))
        self.log_priors_ = np.full(C, -np.inf)
        self.chol_ = np.zeros((C, F, F))
        self.log_det_ = np.zeros(C)
        for c in range(C):
            Xc = X[y == c]
            if not len(Xc):
                self.chol_[c] = np.eye(F)
                continue
            self.means_[c] = Xc.mean(axis=0)
            self.log_priors_[c] = np.log(len(Xc) / n)
            d = Xc - self.means_[c]
            cov = d.T @ d / max(len(Xc) - 1, 1) + self.ridge * np.eye(F)
            L = _cholesky(cov, f"class {c}")
            self.chol_[c] = L
            self.log_det_[c] = 2 * np.log(np.diag(L)).sum()
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        out = np.empty((len(X), len(self.means_)))
        for c in range(len(self.means_)):
            z = np.linalg.solve(self.chol_[c], (X - self.means_[c]).T)     # (F, q)
            out[:, c] = -0.5 * (z ** 2).sum(axis=0) - 0.5 * self.log_det_[c] + self.log_priors_[c]
        return out

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)
