"""Classifier learning curves: accuracy against training-set size."""

from dataclasses import dataclass

import numpy as np

from ..rng import named_stream
from .baselines import KNeighborsClassifier
from .stats import accuracy
from .svm import SvmClassifier


@dataclass(frozen=True)
class CurvePoint:
    size: int
    train_score: float
    test_score: float


def default_sizes(n_cap=2500, points=10, floor=50):
    """Log-spaced sizes up to the baseline cap, deduplicated."""
    raw = np.geomspace(floor, n_cap, points)
    return sorted({int(round(s)) for s in raw})


def learning_curve(X, y_bins, model_kind="svm", sizes=None, test_fraction=0.2,
                   seed=0, **model_kw):
    """Train at each size on a fixed shuffled split; score train and test."""
    X = np.asarray(X, dtype=np.float64)
    y_bins = np.asarray(y_bins)
    rng = named_stream(seed, "curve-split")
    order = rng.permutation(X.shape[0])
    n_test = int(round(X.shape[0] * test_fraction))
    test_idx, train_idx = order[:n_test], order[n_test:]
    if sizes is None:
        sizes = default_sizes(n_cap=min(2500, train_idx.size))
    sizes = [s for s in sizes if s <= train_idx.size]

    points = []
    for size in sizes:
        subset = train_idx[:size]
        if np.unique(y_bins[subset]).size < 2:
            continue
        model = _make(model_kind, seed, **model_kw)
        model.fit(X[subset], y_bins[subset])
        points.append(CurvePoint(
            size=size,
            train_score=accuracy(y_bins[subset], model.predict(X[subset])),
            test_score=accuracy(y_bins[test_idx], model.predict(X[test_idx]))))
    return points


def _make(kind, seed, **kw):
    if kind == "svm":
        return SvmClassifier(C=kw.get("C", 10.0), gamma=kw.get("gamma", 0.3),
                             seed=seed)
    if kind == "knn":
        return KNeighborsClassifier(k=kw.get("k", 5))
    raise ValueError(f"unknown model kind {kind!r}")
