"""Feature matrices, correlation analysis, and regression metrics."""

import math
from dataclasses import dataclass

import numpy as np


class ConstantColumn(Exception):
    def __init__(self, name):
        super().__init__(f"column {name!r} is constant")
        self.name = name


class LengthMismatch(Exception):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-major numeric matrix with unique column names."""

    values: np.ndarray
    names: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("values must be 2-D")
        if not np.isfinite(v).all():
            raise ValueError("values must be finite")
        names = tuple(self.names)
        if len(names) != v.shape[1]:
            raise ValueError("one name per column required")
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", names)

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_cols(self):
        return self.values.shape[1]

    def column(self, name):
        return self.values[:, self.names.index(name)]

    def with_column(self, name, column):
        col = np.asarray(column, dtype=np.float64).reshape(-1, 1)
        return FeatureMatrix(np.hstack([self.values, col]), self.names + (name,))


def pearson_matrix(fm: FeatureMatrix) -> np.ndarray:
    """Pairwise Pearson r; symmetric with an exact unit diagonal."""
    if fm.n_rows < 2:
        raise ValueError("need at least 2 rows")
    stds = fm.values.std(axis=0)
    for name, s in zip(fm.names, stds):
        if s == 0.0:
            raise ConstantColumn(name)
    r = np.corrcoef(fm.values, rowvar=False)
    r = (r + r.T) / 2.0
    np.fill_diagonal(r, 1.0)
    return r


@dataclass(frozen=True)
class Metrics:
    r2: float
    rmse: float
    mse: float
    mae: float

    def to_dict(self):
        return {"r2": self.r2, "rmse": self.rmse, "mse": self.mse, "mae": self.mae}

    @classmethod
    def from_dict(cls, d):
        return cls(r2=d["r2"], rmse=d["rmse"], mse=d["mse"], mae=d["mae"])


def evaluate(y_true, y_pred) -> Metrics:
    """Standard regression metrics; rmse is exactly sqrt(mse)."""
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise LengthMismatch(f"shapes {yt.shape} vs {yp.shape}")
    if yt.size < 2:
        raise LengthMismatch("need at least 2 values")
    residuals = yt - yp
    mse = float(np.mean(residuals ** 2))
    mae = float(np.mean(np.abs(residuals)))
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    ss_res = float(np.sum(residuals ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return Metrics(r2=r2, rmse=math.sqrt(mse), mse=mse, mae=mae)


def accuracy(y_true, y_pred):
    yt = np.asarray(y_true)
    yp = np.asarray(y_pred)
    if yt.shape != yp.shape:
        raise LengthMismatch(f"shapes {yt.shape} vs {yp.shape}")
    return float(np.mean(yt == yp))
