"""The two-stage energy predictor: bin classifier + per-bin forests.

Training: scale and correlate; discretize the target into quantile bins;
grid-search and train the bin classifier; prune weak features and refit;
train one forest regressor per bin on the rows whose true bin matches.
Prediction: scale, classify the bin, regress within it, clamp at zero.
A 20% held-out split never touches any training step.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..rng import named_stream
from .forest import ForestRegressor
from .gridsearch import GridSpec, grid_search
from .importance import feature_importance_prune
from .scaler import Scaler
from .stats import FeatureMatrix, Metrics, evaluate, pearson_matrix
from .svm import SvmClassifier

FORMAT_VERSION = 1


class TooFewDistinct(Exception):
    pass


class InsufficientData(Exception):
    pass


class SchemaMismatch(Exception):
    pass


def discretize_energy(targets, k):
    """Quantile bin edges (i/k for i in 1..k-1), linear interpolation.

    Duplicate edges collapse with a warning, as do edges equal to the
    distribution minimum (ties there would leave the lowest bin empty).
    Raises TooFewDistinct when fewer than two bins survive.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if k < 2:
        raise ValueError("k must be >= 2")
    if targets.size < k:
        raise ValueError("need at least k targets")
    if np.unique(targets).size < 2:
        raise TooFewDistinct("all targets identical")
    qs = np.arange(1, k) / k
    raw = np.quantile(targets, qs)
    lo = targets.min()
    edges = []
    for e in raw:
        if e > lo and (not edges or e > edges[-1]):
            edges.append(float(e))
    if len(edges) < 1:
        raise TooFewDistinct("quantile edges collapsed to a single bin")
    if len(edges) < k - 1:
        warnings.warn(f"bin edges collapsed: k reduced from {k} to {len(edges) + 1}",
                      RuntimeWarning, stacklevel=2)
    return np.array(edges)


def assign_bins(targets, edges):
    """Bin index = position of the first edge strictly above the value."""
    return np.searchsorted(edges, np.asarray(targets, dtype=np.float64),
                           side="right")


@dataclass(frozen=True)
class TwoStageConfig:
    k_bins: int = 4
    test_fraction: float = 0.2
    grid_c: GridSpec = GridSpec(1.0, 60.0, 6)
    grid_gamma: GridSpec = GridSpec(0.05, 1.5, 6)
    folds: int = 3
    search_subsample: int = 800
    svm_tol: float = 1e-3
    svm_max_passes: int = 10
    prune_threshold: float = 0.002
    prune_repeats: int = 5
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 3


DEFAULT_TWO_STAGE = TwoStageConfig()


@dataclass
class TwoStageModel:
    scaler: Scaler
    bin_edges: np.ndarray
    svm: SvmClassifier
    forests: list
    feature_names: list
    training_metrics: Metrics
    correlations: dict = field(default_factory=dict)
    importances: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def _check_names(self, names):
        if list(names) != list(self.feature_names):
            raise SchemaMismatch(
                f"expected features {self.feature_names}, got {list(names)}")

    def predict(self, X, names=None):
        """kWh/min per row; clamped at zero."""
        if names is not None:
            self._check_names(names)
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.feature_names):
            raise SchemaMismatch(
                f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        Xs = self.scaler.transform(X)
        bins = self.svm.predict(Xs)
        out = np.empty(X.shape[0])
        for b in np.unique(bins):
            rows = bins == b
            out[rows] = self.forests[int(b)].predict(Xs[rows])
        return np.maximum(out, 0.0)

    def predict_row(self, features: dict):
        try:
            row = [features[name] for name in self.feature_names]
        except KeyError as exc:
            raise SchemaMismatch(f"missing feature {exc.args[0]!r}") from exc
        return float(self.predict(np.array([row]))[0])


def split_train_test(n, test_fraction, seed):
    rng = named_stream(seed, "split")
    order = rng.permutation(n)
    n_test = int(round(n * test_fraction))
    return order[n_test:], order[:n_test]


def train_two_stage(X, y, feature_names, config=DEFAULT_TWO_STAGE, seed=0):
    """Fit the full pipeline; returns the deployable model."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] < 500:
        raise InsufficientData(f"{X.shape[0]} rows < 500")
    feature_names = list(feature_names)

    train_idx, test_idx = split_train_test(X.shape[0], config.test_fraction, seed)
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]

    # stage 1: scale, record the correlation structure
    fm = FeatureMatrix(X_train, tuple(feature_names)).with_column("kwh", y_train)
    corr = pearson_matrix(fm)
    correlations = {name: float(corr[i, -1]) for i, name in enumerate(feature_names)}

    scaler_full = Scaler.fit(X_train)
    Xs_train = scaler_full.transform(X_train)

    # stage 2: discretize, search, train and prune the bin classifier
    edges = discretize_energy(y_train, config.k_bins)
    bins_train = assign_bins(y_train, edges)

    search_rng = named_stream(seed, "search-subsample")
    if config.search_subsample and Xs_train.shape[0] > config.search_subsample:
        pick = search_rng.choice(Xs_train.shape[0], size=config.search_subsample,
                                 replace=False)
    else:
        pick = np.arange(Xs_train.shape[0])
    result = grid_search(Xs_train[pick], bins_train[pick], config.grid_c,
                         config.grid_gamma, folds=config.folds,
                         tol=config.svm_tol, max_passes=config.svm_max_passes,
                         seed=seed)

    svm = SvmClassifier(C=result.best_c, gamma=result.best_gamma,
                        tol=config.svm_tol, max_passes=config.svm_max_passes,
                        seed=seed).fit(Xs_train, bins_train)
    retained, importances = feature_importance_prune(
        svm, Xs_train, bins_train, feature_names,
        threshold=config.prune_threshold, repeats=config.prune_repeats,
        seed=seed)

    keep = [feature_names.index(name) for name in retained]
    X_train_kept = X_train[:, keep]
    scaler = Scaler.fit(X_train_kept)
    Xs_kept = scaler.transform(X_train_kept)
    svm = SvmClassifier(C=result.best_c, gamma=result.best_gamma,
                        tol=config.svm_tol, max_passes=config.svm_max_passes,
                        seed=seed).fit(Xs_kept, bins_train)

    # stage 3: one regressor per true bin
    forests = []
    for b in range(len(edges) + 1):
        rows = bins_train == b
        if rows.sum() < 2 * config.min_samples_leaf:
            raise InsufficientData(f"bin {b} holds only {int(rows.sum())} rows")
        forest = ForestRegressor(n_trees=config.n_trees,
                                 max_depth=config.max_depth,
                                 min_samples_leaf=config.min_samples_leaf,
                                 seed=seed * 1000 + b)
        forest.fit(Xs_kept[rows], y_train[rows])
        forests.append(forest)

    model = TwoStageModel(scaler=scaler, bin_edges=edges, svm=svm,
                          forests=forests, feature_names=retained,
                          training_metrics=None, correlations=correlations,
                          importances=importances)
    # stage 4: held-out quality, recorded on the artifact
    pred = model.predict(X_test[:, keep])
    model.training_metrics = evaluate(y_test, pred)
    return model


def model_to_dict(model: TwoStageModel):
    return {
        "format_version": model.format_version,
        "scaler": model.scaler.to_dict(),
        "bin_edges": model.bin_edges.tolist(),
        "svm": model.svm.to_dict(),
        "forests": [f.to_dict() for f in model.forests],
        "feature_names": list(model.feature_names),
        "training_metrics": model.training_metrics.to_dict(),
        "correlations": model.correlations,
        "importances": model.importances,
    }


def model_from_dict(d):
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format_version')!r}")
    return TwoStageModel(
        scaler=Scaler.from_dict(d["scaler"]),
        bin_edges=np.array(d["bin_edges"], dtype=np.float64),
        svm=SvmClassifier.from_dict(d["svm"]),
        forests=[ForestRegressor.from_dict(f) for f in d["forests"]],
        feature_names=list(d["feature_names"]),
        training_metrics=Metrics.from_dict(d["training_metrics"]),
        correlations=d.get("correlations", {}),
        importances=d.get("importances", {}),
        format_version=d["format_version"],
    )


def save_model(model: TwoStageModel, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
