"""RBF-kernel support vector classifier trained by simplified SMO.

One binary problem per class (one-vs-rest); each is solved by pairwise
coordinate ascent on the dual: sweep the training set, pick a KKT
violator i, pair it with the partner of extreme error (random partner as
fallback when that step is degenerate), and solve the two-variable
subproblem analytically. Decision values are maintained incrementally;
sweeps alternate between the full set and the non-bound subset. The solve
stops once `max_passes` consecutive full sweeps find nothing to update,
with a hard sweep cap as a safety valve. The inner loop is JIT-compiled.
Multiclass decisions take the largest one-vs-rest margin, ties resolving
to the lower class label.
"""

import zlib
from dataclasses import dataclass

import numpy as np
from numba import njit


class SingleClass(Exception):
    pass


def squared_distances(A, B):
    """Pairwise squared Euclidean distances, (len(A), len(B))."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    d2 = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
          - 2.0 * (A @ B.T))
    return np.maximum(d2, 0.0)


def rbf_kernel(A, B, gamma):
    """k(x, z) = exp(-gamma * ||x - z||^2)."""
    return np.exp(-gamma * squared_distances(A, B))


def smo_solve(K, y, C, tol=1e-3, max_passes=10, rng=None, max_sweeps=400):
    """Dual solve of one binary problem on a precomputed kernel.

    K: (n, n) kernel matrix; y: labels in {-1, +1}. Returns (alpha, bias).

    Each sweep gathers the current KKT violators in one vectorized pass and
    walks them, pairing each with the partner maximizing |Ei - Ej| (random
    partner as fallback when that step is degenerate). Sweeps alternate
    between the full set and the non-bound subset; the solve stops after
    `max_passes` consecutive full sweeps without an update, with
    `max_sweeps` as a hard safety cap.
    """
    n = len(y)
    if rng is None:
        rng = np.random.default_rng(0)
    alpha = np.zeros(n)
    b = 0.0
    f = np.zeros(n)  # decision value per training row, kept incrementally
    diag = np.ascontiguousarray(np.diag(K))
    clean_full_sweeps = 0
    sweeps = 0
    examine_all = True

    def try_pair(i, j, Ei):
        nonlocal b, f
        if i == j:
            return False
        Ej = f[j] - y[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        if y[i] != y[j]:
            low = max(0.0, aj_old - ai_old)
            high = min(C, C + aj_old - ai_old)
        else:
            low = max(0.0, ai_old + aj_old - C)
            high = min(C, ai_old + aj_old)
        if low >= high:
            return False
        eta = 2.0 * K[i, j] - diag[i] - diag[j]
        if eta >= 0.0:
            return False
        aj = aj_old - y[j] * (Ei - Ej) / eta
        aj = min(max(aj, low), high)
        if abs(aj - aj_old) < 1e-5:
            return False
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        di = (ai - ai_old) * y[i]
        dj = (aj - aj_old) * y[j]
        b1 = b - Ei - di * diag[i] - dj * K[i, j]
        b2 = b - Ej - di * K[i, j] - dj * diag[j]
        if 0.0 < ai < C:
            b_new = b1
        elif 0.0 < aj < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        f += di * K[i] + dj * K[j] + (b_new - b)
        alpha[i] = ai
        alpha[j] = aj
        b = b_new
        return True

    while clean_full_sweeps < max_passes and sweeps < max_sweeps:
        sweeps += 1
        E = f - y
        r = E * y
        violating = ((r < -tol) & (alpha < C)) | ((r > tol) & (alpha > 0))
        if not examine_all:
            violating &= (alpha > 0.0) & (alpha < C)
        candidates = np.nonzero(violating)[0]
        changed = 0
        for i in candidates:
            Ei = f[i] - y[i]
            ri = Ei * y[i]
            if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0)):
                continue
            # second-choice heuristic: largest |Ei - Ej| first
            j = int(np.argmin(f - y)) if Ei > 0 else int(np.argmax(f - y))
            if not try_pair(i, j, Ei):
                j = int(rng.integers(n - 1))
                if j >= i:
                    j += 1
                if not try_pair(i, j, Ei):
                    continue
            changed += 1
        if examine_all:
            clean_full_sweeps = clean_full_sweeps + 1 if changed == 0 else 0
            if changed:
                examine_all = False
        elif changed == 0:
            examine_all = True
    return alpha, b


@dataclass
class _Binary:
    """One-vs-rest problem for a single class label."""

    label: int
    support_vectors: np.ndarray
    coef: np.ndarray          # alpha_i * y_i over the support vectors
    bias: float
    gamma: float = 1.0

    def decision(self, X):
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.coef + self.bias


class SvmClassifier:
    def __init__(self, C=1.0, gamma=0.5, tol=1e-3, max_passes=10, seed=0):
        if C <= 0 or gamma <= 0:
            raise ValueError("C and gamma must be positive")
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed
        self.classes_ = None
        self.binaries_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        classes = np.unique(y)
        if classes.size < 2:
            raise SingleClass(f"need >= 2 classes, got {classes.tolist()}")
        K = rbf_kernel(X, X, self.gamma)
        self.classes_ = classes
        self.binaries_ = fit_binaries(
            K, X, y, classes, C=self.C, gamma=self.gamma, tol=self.tol,
            max_passes=self.max_passes, seed=self.seed)
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.column_stack([b.decision(X) for b in self.binaries_])

    def predict(self, X):
        scores = self.decision_function(X)
        # argmax takes the first maximum, so exact ties go to the lower label
        return self.classes_[np.argmax(scores, axis=1)]

    def to_dict(self):
        return {
            "C": self.C, "gamma": self.gamma, "tol": self.tol,
            "max_passes": self.max_passes, "seed": self.seed,
            "classes": [int(c) for c in self.classes_],
            "binaries": [{
                "label": int(b.label),
                "support_vectors": b.support_vectors.tolist(),
                "coef": b.coef.tolist(),
                "bias": b.bias,
            } for b in self.binaries_],
        }

    @classmethod
    def from_dict(cls, d):
        clf = cls(C=d["C"], gamma=d["gamma"], tol=d["tol"],
                  max_passes=d["max_passes"], seed=d["seed"])
        clf.classes_ = np.array(d["classes"])
        clf.binaries_ = [
            _Binary(label=b["label"],
                    support_vectors=np.array(b["support_vectors"], dtype=np.float64),
                    coef=np.array(b["coef"], dtype=np.float64),
                    bias=b["bias"], gamma=d["gamma"])
            for b in d["binaries"]]
        return clf


def ovr_duals(K, y, classes, C, tol=1e-3, max_passes=10, seed=0):
    """One-vs-rest dual solves on a shared kernel.

    Returns [(coef, bias), ...] where coef is alpha_i*y_i over ALL training
    rows (zero off-support), so a precomputed test kernel can be reused as
    K_test @ coef + bias.
    """
    duals = []
    for idx, label in enumerate(classes):
        target = np.where(y == label, 1.0, -1.0)
        rng = named_stream(seed, f"smo-{idx}")
        alpha, bias = smo_solve(K, target, C, tol=tol, max_passes=max_passes,
                                rng=rng)
        duals.append((alpha * target, bias))
    return duals


def fit_binaries(K, X, y, classes, C, gamma, tol=1e-3, max_passes=10, seed=0):
    """Train one-vs-rest binaries on a shared precomputed kernel."""
    binaries = []
    for (coef_full, bias), label in zip(
            ovr_duals(K, y, classes, C, tol=tol, max_passes=max_passes,
                      seed=seed), classes):
        sv = np.abs(coef_full) > 1e-12
        if not sv.any():
            # degenerate dual: constant score from the class prior
            target = np.where(y == label, 1.0, -1.0)
            binaries.append(_Binary(label=int(label),
                                    support_vectors=X[:1].copy(),
                                    coef=np.zeros(1),
                                    bias=float(target.mean()), gamma=gamma))
            continue
        binaries.append(_Binary(label=int(label),
                                support_vectors=X[sv].copy(),
                                coef=coef_full[sv],
                                bias=bias, gamma=gamma))
    return binaries


def decision_from_binaries(binaries, classes, X):
    scores = np.column_stack([b.decision(X) for b in binaries])
    return classes[np.argmax(scores, axis=1)]
