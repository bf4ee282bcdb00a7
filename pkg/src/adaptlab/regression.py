"""Least-squares linear regression over adaptation-option features.

The fit standardizes each feature to zero mean / unit variance over the
training window (conditioning only; capacity is unchanged), solves the
normal equations, and folds the standardization back into raw-space
weights, so a trained model is just ``predict(x) = weights @ x + intercept``.

When the Gram matrix is not positive definite (duplicate or constant
features, fewer samples than dimensions) a small ridge term scaled to the
Gram trace is added to the weight block, keeping the solve deterministic
with no tuning. Models are immutable; retraining produces a new model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Ridge scale applied to the weight diagonal when the plain solve fails.
RIDGE_SCALE = 1e-8


@dataclass(frozen=True)
class LabeledSample:
    """One training pair: feature vector and the verifier-estimated quality."""

    features: np.ndarray
    target: float


@dataclass(frozen=True)
class LinearModel:
    """Immutable affine predictor ``weights @ x + intercept``."""

    weights: np.ndarray
    intercept: float
    trained_on: int

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]


def _as_matrix(samples: list[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        raise ValueError("dataset must be nonempty")
    dim = len(samples[0].features)
    for i, s in enumerate(samples):
        if len(s.features) != dim:
            raise ValueError(f"inconsistent feature length at sample {i}: {len(s.features)} != {dim}")
    x = np.array([s.features for s in samples], dtype=np.float64)
    y = np.array([s.target for s in samples], dtype=np.float64)
    return x, y


def _solve_normal_equations(gram: np.ndarray, rhs: np.ndarray, n_features: int) -> np.ndarray:
    """Solve gram @ theta = rhs, adding trace-scaled ridge on failure."""
    try:
        np.linalg.cholesky(gram)
        theta = np.linalg.solve(gram, rhs)
        if np.all(np.isfinite(theta)):
            return theta
    except np.linalg.LinAlgError:
        pass
    trace_scale = float(np.trace(gram[:n_features, :n_features])) / max(n_features, 1)
    ridge = RIDGE_SCALE * max(trace_scale, 1.0)
    regularized = gram.copy()
    for _ in range(8):
        regularized[np.arange(n_features), np.arange(n_features)] += ridge
        try:
            theta = np.linalg.solve(regularized, rhs)
            if np.all(np.isfinite(theta)):
                return theta
        except np.linalg.LinAlgError:
            pass
        ridge *= 10.0
    raise np.linalg.LinAlgError("normal equations unsolvable even with ridge regularization")


def fit(samples: list[LabeledSample]) -> LinearModel:
    """Least-squares fit of targets on features.

    Deterministic for a fixed sample order, and permutation of the samples
    moves the solution only at floating-point noise level (the minimizer
    itself is order-independent).
    """
    x, y = _as_matrix(samples)
    m, n = x.shape

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    xs = (x - mean) / std

    design = np.hstack([xs, np.ones((m, 1))])
    gram = design.T @ design
    rhs = design.T @ y
    theta = _solve_normal_equations(gram, rhs, n)

    scaled_w = theta[:n]
    scaled_b = theta[n]
    weights = scaled_w / std
    intercept = float(scaled_b - weights @ mean)
    return LinearModel(weights=weights, intercept=intercept, trained_on=m)


def predict(model: LinearModel, features) -> float:
    """Raw prediction weights @ x + intercept; deliberately not clamped."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"feature length {x.shape} does not match model dimension {model.input_dim}")
    return float(model.weights @ x + model.intercept)


def predict_batch(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Predictions for a (count, input_dim) feature matrix."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(f"feature matrix shape {x.shape} does not match model dimension {model.input_dim}")
    return x @ model.weights + model.intercept


def empirical_risk(model: LinearModel, samples: list[LabeledSample]) -> float:
    """Mean squared residual on the given samples.

    Residuals are squared in float64 and accumulated with exact summation,
    so the result does not depend on how the sum might be chunked.
    """
    x, y = _as_matrix(samples)
    if x.shape[1] != model.input_dim:
        raise ValueError(f"feature length {x.shape[1]} does not match model dimension {model.input_dim}")
    residuals = y - (x @ model.weights + model.intercept)
    squares = residuals * residuals
    return math.fsum(squares.tolist()) / len(samples)


def retrain(model: LinearModel, all_samples: list[LabeledSample], window_cap: int | None = None) -> LinearModel:
    """Full refit on the accumulated samples, keeping only the newest
    ``window_cap`` of them when a cap is given. Equals ``fit`` on that window."""
    if window_cap is not None:
        if window_cap < 1:
            raise ValueError("window_cap must be positive")
        all_samples = all_samples[-window_cap:]
    if all_samples and len(all_samples[0].features) != model.input_dim:
        raise ValueError("sample feature length does not match the model being retrained")
    return fit(all_samples)
