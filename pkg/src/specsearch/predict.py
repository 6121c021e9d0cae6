"""Kernel regression from image features.

Fits nu-SVR models with an RBF kernel on standardized features, either to
predict the two logistic relevance parameters of unseen images or to predict
automated specificity directly.  The leave-one-out protocol guarantees that
an image's own targets never influence its prediction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._smo import solve_nu_svr_dual
from .corpus import Dataset
from .retrieval import LRParams

__all__ = [
    "RegressionError",
    "SvrHyper",
    "KernelRegressor",
    "fit_svr",
    "predict_lr_params",
    "loocv_predict_params",
    "fit_specificity_regressor",
    "save_model",
    "load_model",
]

#: Standard deviations below this are treated as constant dimensions.
SCALE_FLOOR = 1e-12


class RegressionError(ValueError):
    """Invalid input to a kernel-regression fit or prediction."""


@dataclass(frozen=True)
class SvrHyper:
    """nu-SVR hyperparameters; ``gamma=None`` derives the RBF width from the
    standardized features as 1 / (d * mean per-dimension variance)."""

    nu: float = 0.5
    c: float = 1.0
    gamma: float | None = None

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise RegressionError(f"nu must lie in (0, 1], got {self.nu}")
        if self.c <= 0.0:
            raise RegressionError(f"C must be positive, got {self.c}")
        if self.gamma is not None and self.gamma <= 0.0:
            raise RegressionError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class KernelRegressor:
    """A fitted RBF regressor: prediction is
    ``sum_j dual_coefs[j] * exp(-gamma * ||x - support[j]||^2) + bias``
    on standardized inputs."""

    support_inputs: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    gamma: float
    nu: float
    c: float
    epsilon: float
    feature_means: np.ndarray
    feature_scales: np.ndarray

    @property
    def n_features(self) -> int:
        return self.feature_means.shape[0]

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.feature_means) / self.feature_scales

    def predict(self, x: Sequence[float]) -> float:
        return float(self.predict_many(np.asarray(x, dtype=float)[None, :])[0])

    def predict_many(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise RegressionError(
                f"expected inputs with {self.n_features} features, got shape {x.shape}"
            )
        xs = self.standardize(x)
        if self.support_inputs.shape[0] == 0:
            return np.full(x.shape[0], self.bias)
        sq = (
            (xs * xs).sum(axis=1)[:, None]
            + (self.support_inputs * self.support_inputs).sum(axis=1)[None, :]
            - 2.0 * xs @ self.support_inputs.T
        )
        k = np.exp(-self.gamma * np.maximum(sq, 0.0))
        return k @ self.dual_coefs + self.bias


def _standardization(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    means = x.mean(axis=0)
    scales = x.std(axis=0)
    scales = np.where(scales < SCALE_FLOOR, SCALE_FLOOR, scales)
    return means, scales


def _rbf_kernel(a: np.ndarray, gamma: float) -> np.ndarray:
    sq = ((a * a).sum(axis=1)[:, None] + (a * a).sum(axis=1)[None, :] - 2.0 * a @ a.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def fit_svr(
    x: Sequence[Sequence[float]], y: Sequence[float], hyper: SvrHyper | None = None
) -> KernelRegressor:
    """Fit a nu-SVR with RBF kernel on standardized features.

    The dual is solved to a KKT violation of at most 1e-3; the fit is
    deterministic for fixed inputs.
    """
    hyper = hyper or SvrHyper()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise RegressionError(f"feature matrix must be 2-D, got shape {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise RegressionError(f"{x.shape[0]} inputs vs {y.shape[0]} targets")
    if x.shape[0] < 2:
        raise RegressionError("nu-SVR needs at least 2 training points")
    if np.all(x == x[0]) and np.ptp(y) > 0.0:
        raise RegressionError("all training inputs are identical but targets differ")

    means, scales = _standardization(x)
    xs = (x - means) / scales
    if hyper.gamma is not None:
        gamma = hyper.gamma
    else:
        total_var = float(xs.var(axis=0).sum())
        gamma = 1.0 / total_var if total_var > 0.0 else 1.0
    kernel = _rbf_kernel(xs, gamma)
    result = solve_nu_svr_dual(kernel, y, c=hyper.c, nu=hyper.nu)
    keep = np.abs(result.dual_coef) > 1e-12
    return KernelRegressor(
        support_inputs=xs[keep].copy(),
        dual_coefs=result.dual_coef[keep].copy(),
        bias=result.bias,
        gamma=gamma,
        nu=hyper.nu,
        c=hyper.c,
        epsilon=result.epsilon,
        feature_means=means,
        feature_scales=scales,
    )


def predict_lr_params(
    reg0: KernelRegressor, reg1: KernelRegressor, x: Sequence[float], image_id: str = ""
) -> LRParams:
    """Predicted logistic parameters for one feature vector."""
    return LRParams(
        image_id=image_id,
        beta0=reg0.predict(x),
        beta1=reg1.predict(x),
        source="predicted",
    )


def _feature_matrix(db: Dataset) -> np.ndarray:
    missing = [rec.id for rec in db if rec.features is None]
    if missing:
        raise RegressionError(f"images without features: {missing[:5]}")
    return np.asarray([rec.features for rec in db], dtype=float)


def loocv_predict_params(
    db: Dataset, gt: Mapping[str, LRParams], hyper: SvrHyper | None = None
) -> dict[str, LRParams]:
    """Leave-one-out predicted parameters for every image.

    For each image, both regressors are fitted on all other images' features
    and ground-truth parameters, so the held-out image's own targets cannot
    leak into its prediction.
    """
    missing = [rec.id for rec in db if rec.id not in gt]
    if missing:
        raise RegressionError(f"images without ground-truth parameters: {missing[:5]}")
    features = _feature_matrix(db)
    beta0 = np.array([gt[rec.id].beta0 for rec in db])
    beta1 = np.array([gt[rec.id].beta1 for rec in db])
    predicted: dict[str, LRParams] = {}
    for i, rec in enumerate(db):
        mask = np.ones(len(db), dtype=bool)
        mask[i] = False
        reg0 = fit_svr(features[mask], beta0[mask], hyper)
        reg1 = fit_svr(features[mask], beta1[mask], hyper)
        predicted[rec.id] = predict_lr_params(reg0, reg1, features[i], image_id=rec.id)
    return predicted


def fit_specificity_regressor(
    x: Sequence[Sequence[float]], spec: Sequence[float], hyper: SvrHyper | None = None
) -> KernelRegressor:
    """Fit a regressor mapping image features to automated specificity.

    Constant specificity targets are rejected: downstream rank correlation
    would be undefined.
    """
    spec = np.asarray(spec, dtype=float)
    if spec.size and np.ptp(spec) == 0.0:
        raise RegressionError(
            "degenerate targets: specificity values are constant, "
            "rank correlation with predictions would be undefined"
        )
    return fit_svr(x, spec, hyper)


def save_model(reg: KernelRegressor, path) -> None:
    """Dump a fitted regressor; loading reproduces predictions to 1e-12."""
    payload = {
        "support_inputs": reg.support_inputs.tolist(),
        "dual_coefs": reg.dual_coefs.tolist(),
        "bias": reg.bias,
        "gamma": reg.gamma,
        "nu": reg.nu,
        "c": reg.c,
        "epsilon": reg.epsilon,
        "feature_means": reg.feature_means.tolist(),
        "feature_scales": reg.feature_scales.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path) -> KernelRegressor:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    n_features = len(payload["feature_means"])
    support = np.asarray(payload["support_inputs"], dtype=float).reshape(-1, n_features)
    return KernelRegressor(
        support_inputs=support,
        dual_coefs=np.asarray(payload["dual_coefs"], dtype=float),
        bias=float(payload["bias"]),
        gamma=float(payload["gamma"]),
        nu=float(payload["nu"]),
        c=float(payload["c"]),
        epsilon=float(payload["epsilon"]),
        feature_means=np.asarray(payload["feature_means"], dtype=float),
        feature_scales=np.asarray(payload["feature_scales"], dtype=float),
    )
