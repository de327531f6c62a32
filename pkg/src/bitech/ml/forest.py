"""Bagged regression trees with variance-reduction splits.

Each tree trains on a bootstrap resample; at every node a random subset
of ceil(p/3) features is searched for the threshold minimizing the sum of
child squared errors (prefix-sum scan over the sorted column). Leaves
store the mean target of their rows, so forest predictions are means of
leaf means and can never leave the training target range.
"""

import math
from dataclasses import dataclass, field

import numpy as np


class EmptyDataset(Exception):
    pass


@dataclass
class _Tree:
    """Flattened nodes: leaf nodes carry feature == -1 and value."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X):
        out = np.empty(X.shape[0], dtype=np.float64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            if self.feature[node] < 0:
                out[rows] = self.value[node]
                continue
            go_left = X[rows, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out

    def to_rows(self):
        return [[int(f), float(t), int(l), int(r), float(v)]
                for f, t, l, r, v in zip(self.feature, self.threshold,
                                         self.left, self.right, self.value)]

    @classmethod
    def from_rows(cls, rows):
        arr = np.array(rows, dtype=np.float64).reshape(-1, 5)
        return cls(feature=arr[:, 0].astype(np.int64),
                   threshold=arr[:, 1],
                   left=arr[:, 2].astype(np.int64),
                   right=arr[:, 3].astype(np.int64),
                   value=arr[:, 4])


class _TreeBuilder:
    def __init__(self, max_depth, min_samples_leaf, max_features, rng):
        self.max_depth = max_depth
        self.min_leaf = min_samples_leaf
        self.max_features = max_features
        self.rng = rng
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def build(self, X, y):
        root = self._new_node()
        self._grow(root, X, y, np.arange(X.shape[0]), depth=0)
        return _Tree(feature=np.array(self.feature, dtype=np.int64),
                     threshold=np.array(self.threshold),
                     left=np.array(self.left, dtype=np.int64),
                     right=np.array(self.right, dtype=np.int64),
                     value=np.array(self.value))

    def _grow(self, node, X, y, rows, depth):
        target = y[rows]
        self.value[node] = float(target.mean())
        if (depth >= self.max_depth or rows.size < 2 * self.min_leaf
                or np.all(target == target[0])):
            return
        split = self._best_split(X, target, rows)
        if split is None:
            return
        feat, thr = split
        go_left = X[rows, feat] <= thr
        left_node = self._new_node()
        right_node = self._new_node()
        self.feature[node] = int(feat)
        self.threshold[node] = float(thr)
        self.left[node] = left_node
        self.right[node] = right_node
        self._grow(left_node, X, y, rows[go_left], depth + 1)
        self._grow(right_node, X, y, rows[~go_left], depth + 1)

    def _best_split(self, X, target, rows):
        p = X.shape[1]
        n_feats = min(self.max_features, p)
        feats = self.rng.choice(p, size=n_feats, replace=False)
        n = rows.size
        best = None
        best_sse = np.inf
        for feat in np.sort(feats):
            xs = X[rows, feat]
            order = np.argsort(xs, kind="stable")
            xs_sorted = xs[order]
            ys_sorted = target[order]
            s1 = np.cumsum(ys_sorted)
            s2 = np.cumsum(ys_sorted ** 2)
            total1 = s1[-1]
            total2 = s2[-1]
            ks = np.arange(self.min_leaf, n - self.min_leaf + 1)
            if ks.size == 0:
                continue
            valid = xs_sorted[ks - 1] < xs_sorted[ks]
            ks = ks[valid]
            if ks.size == 0:
                continue
            left1 = s1[ks - 1]
            left2 = s2[ks - 1]
            sse = (left2 - left1 ** 2 / ks
                   + (total2 - left2) - (total1 - left1) ** 2 / (n - ks))
            k_best = int(ks[np.argmin(sse)])
            sse_best = float(np.min(sse))
            if sse_best < best_sse - 1e-15:
                best_sse = sse_best
                thr = 0.5 * (xs_sorted[k_best - 1] + xs_sorted[k_best])
                best = (int(feat), thr)
        return best


class ForestRegressor:
    def __init__(self, n_trees=100, max_depth=12, min_samples_leaf=3,
                 max_features=None, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = seed
        self.trees_ = None
        self.tree_seeds_ = None
        self.y_range_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.shape[0] == 0:
            raise EmptyDataset("no training rows")
        if X.shape[0] < 2 * self.min_samples_leaf:
            raise EmptyDataset(
                f"{X.shape[0]} rows cannot satisfy min_samples_leaf="
                f"{self.min_samples_leaf}")
        p = X.shape[1]
        max_features = self.max_features or max(1, math.ceil(p / 3))
        seeder = np.random.default_rng(self.seed)
        self.tree_seeds_ = seeder.integers(0, 2 ** 32, size=self.n_trees)
        n = X.shape[0]
        self.trees_ = []
        for tree_seed in self.tree_seeds_:
            rng = np.random.default_rng(int(tree_seed))
            sample = rng.integers(0, n, size=n)
            builder = _TreeBuilder(self.max_depth, self.min_samples_leaf,
                                   max_features, rng)
            self.trees_.append(builder.build(X[sample], y[sample]))
        self.y_range_ = (float(y.min()), float(y.max()))
        return self

    def predict(self, X):
        if not self.trees_:
            raise EmptyDataset("forest is not fitted")
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0])
        for tree in self.trees_:
            total += tree.predict(X)
        return total / len(self.trees_)

    def to_dict(self):
        return {
            "n_trees": self.n_trees, "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features, "seed": self.seed,
            "tree_seeds": [int(s) for s in self.tree_seeds_],
            "y_range": list(self.y_range_),
            "trees": [t.to_rows() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d):
        forest = cls(n_trees=d["n_trees"], max_depth=d["max_depth"],
                     min_samples_leaf=d["min_samples_leaf"],
                     max_features=d["max_features"], seed=d["seed"])
        forest.tree_seeds_ = np.array(d["tree_seeds"], dtype=np.uint64)
        forest.y_range_ = tuple(d["y_range"])
        forest.trees_ = [_Tree.from_rows(rows) for rows in d["trees"]]
        return forest
