"""Comparison models: ordinary least squares and k-nearest-neighbour."""

import numpy as np


class LinearRegressor:
    """Least-squares fit with intercept."""

    def __init__(self):
        self.coef_ = None
        self.intercept_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        design = np.hstack([np.ones((X.shape[0], 1)), X])
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef_ + self.intercept_


class KNeighborsClassifier:
    """Brute-force majority vote; ties go to the smallest label."""

    def __init__(self, k=5):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.X_ = None
        self.y_ = None
        self.classes_ = None

    def fit(self, X, y):
        self.X_ = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_, self.y_codes_ = np.unique(y, return_inverse=True)
        self.y_ = y
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        k = min(self.k, self.X_.shape[0])
        out = np.empty(X.shape[0], dtype=self.classes_.dtype)
        chunk = 512
        for start in range(0, X.shape[0], chunk):
            block = X[start:start + chunk]
            d2 = (np.sum(block * block, axis=1)[:, None]
                  + np.sum(self.X_ * self.X_, axis=1)[None, :]
                  - 2.0 * (block @ self.X_.T))
            # stable argsort keeps equidistant neighbours in storage order
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            for row, nbrs in enumerate(nearest):
                votes = np.bincount(self.y_codes_[nbrs],
                                    minlength=self.classes_.size)
                out[start + row] = self.classes_[int(np.argmax(votes))]
        return out
