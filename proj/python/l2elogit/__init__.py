"""Robust sparse logistic regression by the L2 criterion (L2E)."""

import json

import numpy as np

from . import _core
from ._core import ConfigError, DataError, L2EError, curvature_bound, lambda_grid, logistic

__all__ = [
    "ConfigError",
    "DataError",
    "L2EError",
    "curvature_bound",
    "cv",
    "fit",
    "lambda_grid",
    "lambda_max",
    "logistic",
    "path",
    "simulate",
]


def _xy(x, y):
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float).ravel()
    if x.ndim == 1:
        x = x[:, None]
    return x, y


def lambda_max(x, y, alpha, loss="l2e"):
    x, y = _xy(x, y)
    return _core.lambda_max(x, y, alpha, loss)


def fit(x, y, loss="l2e", lam=0.0, alpha=1.0, **kwargs):
    """Single penalized fit. Returns the decoded JSON document."""
    x, y = _xy(x, y)
    out = json.loads(_core.fit_json(x, y, loss=loss, lam=lam, alpha=alpha, **kwargs))
    out["beta"] = np.asarray(out["beta"], dtype=float)
    out["beta_original"] = np.asarray(out["beta_original"], dtype=float)
    return out


def path(x, y, loss="l2e", alpha=1.0, **kwargs):
    """Regularization path over a decreasing lambda grid."""
    x, y = _xy(x, y)
    return _core.path(x, y, loss=loss, alpha=alpha, **kwargs)


def cv(x, y, loss="l2e", alpha=1.0, **kwargs):
    """Robust cross-validation; returns the decoded JSON document."""
    x, y = _xy(x, y)
    return json.loads(_core.cv_json(x, y, loss=loss, alpha=alpha, **kwargs))


def simulate(scenario="low-dim-shift", shift=3.0, outliers=1, seed=1, replicate=0):
    """Raw design, labels, contamination mask and true support of one replicate."""
    x, y, mask, support = _core.simulate(scenario, shift, outliers, seed, replicate)
    return x, y, np.asarray(mask, dtype=bool), list(support)
