"""Exhaustive (C, gamma) search by k-fold cross-validated accuracy.

Both axes are linear grids. Per fold, squared distances are computed
once; per gamma the train and test kernels are reused across every C,
which is what keeps the exhaustive sweep cheap. Ties resolve to the
smaller C, then the smaller gamma.
"""

from dataclasses import dataclass

import numpy as np

from ..rng import named_stream
from .stats import accuracy
from .svm import ovr_duals, squared_distances


@dataclass(frozen=True)
class GridSpec:
    """Linear axis: count points from start to stop inclusive."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("count must be >= 2")
        if not self.stop > self.start:
            raise ValueError("stop must exceed start")

    def values(self):
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class GridSearchResult:
    best_c: float
    best_gamma: float
    best_score: float
    scores: np.ndarray       # (len(c_values), len(gamma_values))
    c_values: np.ndarray
    gamma_values: np.ndarray


def kfold_indices(n, folds, rng):
    """Shuffled contiguous folds; returns [(train_idx, test_idx), ...]."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    order = rng.permutation(n)
    chunks = np.array_split(order, folds)
    out = []
    for i in range(folds):
        test = chunks[i]
        train = np.concatenate([chunks[j] for j in range(folds) if j != i])
        out.append((train, test))
    return out


def _fold_accuracy(K, K_test, y_train, y_test, classes, c, tol, max_passes, seed):
    duals = ovr_duals(K, y_train, classes, C=c, tol=tol,
                      max_passes=max_passes, seed=seed)
    margins = np.column_stack([K_test @ coef + bias for coef, bias in duals])
    pred = classes[np.argmax(margins, axis=1)]
    return accuracy(y_test, pred)


def cv_accuracy(X, y_bins, c, gamma, folds=5, tol=1e-3, max_passes=10, seed=0):
    """Mean k-fold accuracy at a single (C, gamma) point."""
    X = np.asarray(X, dtype=np.float64)
    y_bins = np.asarray(y_bins)
    rng = named_stream(seed, "cv-shuffle")
    classes = np.unique(y_bins)
    scores = []
    for train_idx, test_idx in kfold_indices(len(y_bins), folds, rng):
        K = np.exp(-gamma * squared_distances(X[train_idx], X[train_idx]))
        K_test = np.exp(-gamma * squared_distances(X[test_idx], X[train_idx]))
        scores.append(_fold_accuracy(K, K_test, y_bins[train_idx],
                                     y_bins[test_idx], classes, c, tol,
                                     max_passes, seed))
    return float(np.mean(scores))


def grid_search(X, y_bins, grid_c: GridSpec, grid_gamma: GridSpec, folds=5,
                tol=1e-3, max_passes=10, seed=0):
    """Evaluate every grid point; returns the argmax and the full table."""
    X = np.asarray(X, dtype=np.float64)
    y_bins = np.asarray(y_bins)
    c_values = grid_c.values()
    gamma_values = grid_gamma.values()
    rng = named_stream(seed, "cv-shuffle")
    splits = kfold_indices(len(y_bins), folds, rng)
    classes = np.unique(y_bins)

    scores = np.zeros((c_values.size, gamma_values.size))
    for train_idx, test_idx in splits:
        d2_train = squared_distances(X[train_idx], X[train_idx])
        d2_test = squared_distances(X[test_idx], X[train_idx])
        y_train = y_bins[train_idx]
        y_test = y_bins[test_idx]
        for gi, gamma in enumerate(gamma_values):
            K = np.exp(-gamma * d2_train)
            K_test = np.exp(-gamma * d2_test)
            for ci, c in enumerate(c_values):
                scores[ci, gi] += _fold_accuracy(
                    K, K_test, y_train, y_test, classes, float(c), tol,
                    max_passes, seed) / folds

    best_flat = int(np.argmax(scores))  # first max: smaller C, then gamma
    ci, gi = divmod(best_flat, gamma_values.size)
    return GridSearchResult(best_c=float(c_values[ci]),
                            best_gamma=float(gamma_values[gi]),
                            best_score=float(scores[ci, gi]),
                            scores=scores, c_values=c_values,
                            gamma_values=gamma_values)
