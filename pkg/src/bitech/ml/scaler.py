"""Column-wise standardization fit on the training split only."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray        # raw standard deviation; 0 marks a constant column

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        return cls(mean=X.mean(axis=0), std=X.std(axis=0))

    @property
    def constant_mask(self):
        return self.std == 0.0

    def transform(self, X):
        """Z-score; constant columns pass through centred but unscaled."""
        X = np.asarray(X, dtype=np.float64)
        divisor = np.where(self.std == 0.0, 1.0, self.std)
        return (X - self.mean) / divisor

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(mean=np.array(d["mean"], dtype=np.float64),
                   std=np.array(d["std"], dtype=np.float64))
