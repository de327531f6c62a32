"""Permutation-based feature pruning for the bin classifier."""

import numpy as np

from ..rng import named_stream
from .stats import accuracy


def permutation_importance(classifier, X, y, repeats=5, seed=0):
    """Mean accuracy drop per column when that column is shuffled."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    rng = named_stream(seed, "permutation")
    base = accuracy(y, classifier.predict(X))
    importances = np.zeros(X.shape[1])
    for col in range(X.shape[1]):
        drops = []
        for _ in range(repeats):
            shuffled = X.copy()
            shuffled[:, col] = shuffled[rng.permutation(X.shape[0]), col]
            drops.append(base - accuracy(y, classifier.predict(shuffled)))
        importances[col] = float(np.mean(drops))
    return base, importances


def feature_importance_prune(classifier, X, y, feature_names, threshold=0.002,
                             repeats=5, seed=0):
    """Names whose permutation importance clears the threshold.

    At least two features are always retained (the top two by importance
    when fewer clear the bar).
    """
    _, importances = permutation_importance(classifier, X, y,
                                            repeats=repeats, seed=seed)
    retained = [name for name, imp in zip(feature_names, importances)
                if imp >= threshold]
    if len(retained) < 2:
        order = np.argsort(-importances, kind="stable")[:2]
        retained = [feature_names[i] for i in sorted(order)]
    return retained, dict(zip(feature_names, importances.tolist()))
