"""Closed-form and out-of-sample performance measures for fitted estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import solve_sym
from .covariance_model import CovarianceModel
from .estimators import METHOD_GB, METHOD_RD, METHOD_UNC, Estimator

__all__ = [
    "MseBreakdown",
    "EmpiricalMse",
    "DirectionalReport",
    "theoretical_mse",
    "bias_decomposition",
    "mse_breakdown",
    "empirical_mse",
    "directional_statistic",
    "volatility",
]


@dataclass(frozen=True)
class MseBreakdown:
    """Total-error accounting for one method: closed-form MSE, its squared-bias
    and variance split, and optionally a measured out-of-sample MSE."""

    method: str
    theoretical_mse: float
    bias_sq: float
    variance: float
    empirical_mse: float | None = None


@dataclass(frozen=True)
class EmpiricalMse:
    """Mean squared forecast error per forecast day, plus the sum over days."""

    per_day: np.ndarray
    total: float


@dataclass(frozen=True)
class DirectionalReport:
    """Fraction of samples whose forecast moved to the correct side of the
    reference price, per forecast day."""

    per_day: np.ndarray
    mean_over_days: float
    n_samples: int


def _check_split(model: CovarianceModel, est: Estimator) -> None:
    if est.m != model.m or est.horizon != model.horizon:
        raise ValueError(
            f"estimator shape ({est.horizon}, {est.m}) does not match model split "
            f"({model.horizon}, {model.m})"
        )


def theoretical_mse(model: CovarianceModel, est: Estimator) -> float:
    """Closed-form mean squared error of the estimator under the model.

    unc: trace(sigma_zz).
    gb:  trace(sigma_zz) - trace(sigma_zy @ coeff').
    rd:  trace(sigma_zz) + trace(C sigma_yy C') - 2 trace(sigma_zy C').
    """
    _check_split(model, est)
    base = float(np.trace(model.sigma_zz))
    if est.method == METHOD_UNC:
        return base
    if est.method == METHOD_GB:
        return base - float(np.einsum("ij,ij->", model.sigma_zy, est.coeff))
    if est.method == METHOD_RD:
        c = est.coeff
        quad = float(np.einsum("ij,ij->", c @ model.sigma_yy, c))
        cross = float(np.einsum("ij,ij->", model.sigma_zy, c))
        return base + quad - 2.0 * cross
    raise ValueError(f"unknown method {est.method!r}")


def bias_decomposition(model: CovarianceModel, est: Estimator) -> tuple[float, float]:
    """Split the closed-form MSE into squared bias and variance.

    The unconditional mean is all bias (trace(sigma_zz), zero variance); the
    full conditional mean is booked as all variance (zero squared bias); the
    reduced-dimension squared bias is trace((I - C R) sigma_zz (I - C R)')
    with ``R`` the reverse conditional-mean map of the observation given the
    future block.  Variance is the closed-form MSE minus the squared bias.
    """
    _check_split(model, est)
    total = theoretical_mse(model, est)
    if est.method == METHOD_UNC:
        return total, 0.0
    if est.method == METHOD_GB:
        return 0.0, total
    if est.method == METHOD_RD:
        r = solve_sym(model.sigma_zz, model.sigma_zy, "sigma_zz").T
        icr = np.eye(model.horizon) - est.coeff @ r
        bias_sq = float(np.einsum("ij,ij->", icr @ model.sigma_zz, icr))
        return bias_sq, total - bias_sq
    raise ValueError(f"unknown method {est.method!r}")


def mse_breakdown(
    model: CovarianceModel, est: Estimator, empirical: float | None = None
) -> MseBreakdown:
    """Assemble the full closed-form accounting for one estimator."""
    bias_sq, variance = bias_decomposition(model, est)
    return MseBreakdown(
        method=est.method,
        theoretical_mse=theoretical_mse(model, est),
        bias_sq=bias_sq,
        variance=variance,
        empirical_mse=empirical,
    )


def empirical_mse(predictions: np.ndarray, actuals: np.ndarray) -> EmpiricalMse:
    """Average squared error over samples, per forecast day and summed."""
    predictions = np.asarray(predictions, dtype=float)
    actuals = np.asarray(actuals, dtype=float)
    if predictions.shape != actuals.shape or predictions.ndim != 2:
        raise ValueError(
            f"predictions and actuals must share a (K, H) shape, got "
            f"{predictions.shape} and {actuals.shape}"
        )
    if predictions.shape[0] < 1:
        raise ValueError("need at least one sample")
    per_day = ((actuals - predictions) ** 2).mean(axis=0)
    return EmpiricalMse(per_day=per_day, total=float(per_day.sum()))


def directional_statistic(
    predictions_raw: np.ndarray, actuals_raw: np.ndarray, z0: np.ndarray
) -> DirectionalReport:
    """Score 1 when forecast and actual sit strictly on the same side of the
    per-sample reference price ``z0``; ties score 0.  Averaged over samples."""
    predictions_raw = np.asarray(predictions_raw, dtype=float)
    actuals_raw = np.asarray(actuals_raw, dtype=float)
    z0 = np.asarray(z0, dtype=float)
    if predictions_raw.shape != actuals_raw.shape or predictions_raw.ndim != 2:
        raise ValueError("predictions and actuals must share a (K, H) shape")
    if z0.shape != (predictions_raw.shape[0],):
        raise ValueError("z0 must hold one reference price per sample")
    ref = z0[:, None]
    hits = ((actuals_raw - ref) * (predictions_raw - ref) > 0).astype(float)
    per_day = hits.mean(axis=0)
    return DirectionalReport(
        per_day=per_day,
        mean_over_days=float(per_day.mean()),
        n_samples=predictions_raw.shape[0],
    )


def volatility(est: Estimator, scale: float | None = None) -> np.ndarray:
    """Per-day forecast standard deviation from the posterior covariance.

    Diagonal entries are clamped at zero before the square root; ``scale``
    (a window's day-Q price) converts to price units.
    """
    std = np.sqrt(np.clip(np.diag(est.posterior_cov), 0.0, None))
    if scale is not None:
        std = std * float(scale)
    return std
