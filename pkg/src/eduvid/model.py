"""Stage 5 modelling: z-score standardisation, OLS regression, fit metrics.

Features are standardised (population std) so fitted weights are directly
comparable; the target stays in raw percentage units. The least-squares
solve goes through a QR decomposition for numerical stability; the raw
normal-equations path exists only as an independent oracle in the test
suite. A VIF diagnostic flags the collinearity that can flip weight signs
against marginal correlations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    LengthMismatchError,
    NonFiniteInputError,
    RankDeficientError,
    TooFewRowsError,
    ZeroVarianceColumnError,
    ZeroVarianceTargetError,
)
from .extract import FEATURE_NAMES

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class Standardizer:
    feature_names: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]


@dataclass(frozen=True)
class ModelMetrics:
    rmse: float
    r_squared: float
    n: int


@dataclass(frozen=True)
class RegressionModel:
    """Standardiser plus fitted weights; weights are in target units per
    feature standard deviation."""

    standardizer: Standardizer
    weights: tuple[float, ...]
    intercept: float
    metrics: ModelMetrics


@dataclass(frozen=True)
class Prediction:
    value: float
    within_bounds: bool


@dataclass(frozen=True)
class CvMetrics:
    """Cross-validated fit quality; labelled separately from in-sample."""

    k: int
    seed: int
    rmse_mean: float
    r_squared_mean: float


def fit_standardizer(X, feature_names=FEATURE_NAMES) -> Standardizer:
    """Per-column mean and population standard deviation (ddof 0)."""
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if n < 2:
        raise TooFewRowsError(f"standardiser needs >= 2 rows, got {n}")
    if len(feature_names) != p:
        raise LengthMismatchError(f"{p} columns but {len(feature_names)} names")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    for j in range(p):
        scale = float(np.max(np.abs(X[:, j]))) if n else 0.0
        if stds[j] <= 1e-12 * max(1.0, scale):
            raise ZeroVarianceColumnError(feature_names[j])
    return Standardizer(feature_names=tuple(feature_names),
                        means=tuple(float(m) for m in means),
                        stds=tuple(float(s) for s in stds))


def transform(std: Standardizer, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != len(std.feature_names):
        raise LengthMismatchError(
            f"{X.shape[1]} columns, standardiser has {len(std.feature_names)}")
    return (X - np.asarray(std.means)) / np.asarray(std.stds)


def fit_ols(X_std, y) -> tuple[tuple[float, ...], float]:
    """Least-squares weights and intercept via Householder QR.

    Returns (weights, intercept) minimising the residual sum of squares;
    rejects rank-deficient designs instead of silently picking one of the
    infinitely many solutions.
    """
    X_std = np.asarray(X_std, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X_std.shape
    if len(y) != n:
        raise LengthMismatchError(f"{n} rows but {len(y)} targets")
    if n < p + 1:
        raise TooFewRowsError(f"need >= {p + 1} rows for {p} features, got {n}")
    design = np.column_stack([np.ones(n), X_std])
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(n, p + 1) * _EPS * diag.max():
        raise RankDeficientError("design matrix is rank deficient")
    beta = np.linalg.solve(r, q.T @ y)
    return tuple(float(w) for w in beta[1:]), float(beta[0])


def predict(model: RegressionModel, features) -> Prediction:
    """Predicted percentage viewed for one raw-unit feature vector.

    The value is not clamped; within_bounds flags predictions outside
    [0, 100].
    """
    features = np.asarray(features, dtype=np.float64)
    std = model.standardizer
    if features.shape != (len(std.feature_names),):
        raise LengthMismatchError(
            f"expected {len(std.feature_names)} features, got {features.shape}")
    if not np.all(np.isfinite(features)):
        raise NonFiniteInputError("feature vector holds NaN or infinity")
    value = model.intercept
    for w, x, m, s in zip(model.weights, features, std.means, std.stds):
        value += w * ((x - m) / s)
    return Prediction(value=float(value), within_bounds=0.0 <= value <= 100.0)


def evaluate(model: RegressionModel, X, y) -> ModelMetrics:
    """In-sample RMSE and R-squared against raw-unit features."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) != len(y):
        raise LengthMismatchError(f"{len(X)} rows but {len(y)} targets")
    y_hat = np.array([predict(model, row).value for row in X])
    resid = y - y_hat
    sse = float(resid @ resid)
    dy = y - y.mean()
    sst = float(dy @ dy)
    scale = float(np.max(np.abs(y))) if len(y) else 0.0
    if sst <= len(y) * (32.0 * _EPS * scale) ** 2:
        raise ZeroVarianceTargetError("target has no variance")
    return ModelMetrics(rmse=math.sqrt(sse / len(y)),
                        r_squared=1.0 - sse / sst, n=len(y))


def train_model(X, y, feature_names=FEATURE_NAMES) -> RegressionModel:
    """Standardise, fit and evaluate in one step on raw-unit features."""
    standardizer = fit_standardizer(X, feature_names)
    weights, intercept = fit_ols(transform(standardizer, X), y)
    model = RegressionModel(standardizer=standardizer, weights=weights,
                            intercept=intercept,
                            metrics=ModelMetrics(rmse=0.0, r_squared=0.0, n=0))
    metrics = evaluate(model, X, y)
    return RegressionModel(standardizer=standardizer, weights=weights,
                           intercept=intercept, metrics=metrics)


def cross_validate(X, y, k: int = 5, seed: int = 0,
                   feature_names=FEATURE_NAMES) -> CvMetrics:
    """K-fold CV with a seeded shuffle; reported separately from in-sample."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if k < 2 or k > n:
        raise ValueError(f"k {k} outside [2, {n}]")
    order = np.random.RandomState(seed).permutation(n)
    folds = np.array_split(order, k)
    rmses, r2s = [], []
    for i in range(k):
        test_idx = folds[i]
        train_idx = np.concatenate([folds[j] for j in range(k) if j != i])
        model = train_model(X[train_idx], y[train_idx], feature_names)
        y_hat = np.array([predict(model, row).value for row in X[test_idx]])
        resid = y[test_idx] - y_hat
        rmses.append(math.sqrt(float(resid @ resid) / len(test_idx)))
        dy = y[test_idx] - y[test_idx].mean()
        sst = float(dy @ dy)
        r2s.append(1.0 - float(resid @ resid) / sst if sst > 0 else float("nan"))
    return CvMetrics(k=k, seed=seed, rmse_mean=float(np.mean(rmses)),
                     r_squared_mean=float(np.mean(r2s)))


def vif(X_std) -> list[float]:
    """Variance inflation factors via the auxiliary-regression definition.

    VIF_j = 1 / (1 - R2_j) with R2_j from regressing column j on the other
    columns plus an intercept; perfect collinearity is reported as the
    +infinity sentinel rather than raised.
    """
    X_std = np.asarray(X_std, dtype=np.float64)
    n, p = X_std.shape
    if n < p + 1:
        raise TooFewRowsError(f"need >= {p + 1} rows for {p} features, got {n}")
    if p == 1:
        return [1.0]
    out = []
    for j in range(p):
        target = X_std[:, j]
        others = np.delete(X_std, j, axis=1)
        design = np.column_stack([np.ones(n), others])
        beta, *_ = np.linalg.lstsq(design, target, rcond=None)
        resid = target - design @ beta
        sse = float(resid @ resid)
        dt = target - target.mean()
        sst = float(dt @ dt)
        if sst == 0.0:
            out.append(float("inf"))
            continue
        r2 = 1.0 - sse / sst
        out.append(float("inf") if 1.0 - r2 < 1e-12 else 1.0 / (1.0 - r2))
    return out


# --- serialization ------------------------------------------------------------

def model_to_dict(model: RegressionModel, vifs: list[float] | None = None,
                  training: dict | None = None) -> dict:
    d = {
        "feature_names": list(model.standardizer.feature_names),
        "means": list(model.standardizer.means),
        "stds": list(model.standardizer.stds),
        "weights": list(model.weights),
        "intercept": model.intercept,
        "metrics": {
            "rmse": model.metrics.rmse,
            "r_squared": model.metrics.r_squared,
            "n": model.metrics.n,
        },
    }
    if vifs is not None:
        d["vif"] = [v if math.isfinite(v) else None for v in vifs]
    if training is not None:
        d["training"] = training
    return d


def model_from_dict(d: dict) -> RegressionModel:
    standardizer = Standardizer(feature_names=tuple(d["feature_names"]),
                                means=tuple(d["means"]), stds=tuple(d["stds"]))
    metrics = ModelMetrics(rmse=d["metrics"]["rmse"],
                           r_squared=d["metrics"]["r_squared"],
                           n=d["metrics"]["n"])
    return RegressionModel(standardizer=standardizer,
                           weights=tuple(d["weights"]),
                           intercept=d["intercept"], metrics=metrics)


def vifs_from_dict(d: dict) -> list[float] | None:
    if "vif" not in d:
        return None
    return [float("inf") if v is None else v for v in d["vif"]]


def load_reference_model() -> tuple[RegressionModel, dict]:
    """Published reference fit (documented context, not a verification
    target); returns the model and the full fixture dict."""
    text = resources.files("eduvid").joinpath("data/reference_model.json").read_text()
    d = json.loads(text)
    return model_from_dict(d), d
