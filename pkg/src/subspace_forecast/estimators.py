"""Linear forecasters for the future block of a window.

Three estimators share one interface: the unconditional mean (coefficients
zero), the full conditional mean given the observation block, and a
reduced-dimension conditional mean that first filters the observation onto
the leading principal subspace.  All operate in the centered ratio domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import solve_sym, spectral_condition, symmetrize
from .covariance_model import CovarianceModel, Subspace
from .errors import IllConditionedError

__all__ = [
    "METHOD_UNC",
    "METHOD_GB",
    "METHOD_RD",
    "METHODS",
    "ProjectionOperator",
    "Estimator",
    "fit_unconditional",
    "fit_gauss_bayes",
    "build_projection",
    "fit_reduced_dimension",
    "predict",
]

METHOD_UNC = "unc"
METHOD_GB = "gb"
METHOD_RD = "rd"
METHODS = (METHOD_UNC, METHOD_GB, METHOD_RD)


@dataclass(frozen=True)
class ProjectionOperator:
    """Least-squares filter ``w = G y`` onto a subspace basis, with the
    covariances the filtered coordinates induce."""

    G: np.ndarray
    V_ML: np.ndarray
    sigma_ww: np.ndarray
    sigma_zw: np.ndarray

    @property
    def L(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class Estimator:
    """Fitted linear forecaster: centered observation to centered forecast.

    ``cond`` is the condition number of the matrix that was inverted during
    fitting (None for the unconditional mean); ``subspace_dim`` is the L of
    the reduced-dimension method.
    """

    method: str
    coeff: np.ndarray
    posterior_cov: np.ndarray
    cond: float | None = None
    subspace_dim: int | None = None

    @property
    def m(self) -> int:
        return self.coeff.shape[1]

    @property
    def horizon(self) -> int:
        return self.coeff.shape[0]


def fit_unconditional(model: CovarianceModel) -> Estimator:
    """Forecast the (zero) mean; posterior covariance is sigma_zz itself."""
    return Estimator(
        method=METHOD_UNC,
        coeff=np.zeros((model.horizon, model.m)),
        posterior_cov=model.sigma_zz.copy(),
    )


def fit_gauss_bayes(model: CovarianceModel) -> Estimator:
    """Full conditional mean of the future block given the observation block.

    The coefficient matrix is sigma_zy @ inv(sigma_yy), realized as a solve;
    the posterior covariance is the Schur complement of sigma_yy.  An
    ill-conditioned sigma_yy is solved anyway and reported through ``cond``;
    only exact numerical singularity raises.
    """
    cond_yy = spectral_condition(model.sigma_yy)
    coeff = solve_sym(model.sigma_yy, model.sigma_yz, "sigma_yy").T
    posterior = symmetrize(model.sigma_zz - coeff @ model.sigma_yz)
    return Estimator(method=METHOD_GB, coeff=coeff, posterior_cov=posterior, cond=cond_yy)


def build_projection(model: CovarianceModel, sub: Subspace) -> ProjectionOperator:
    """Least-squares coordinates on ``V_ML``: ``G = inv(V_ML' V_ML) V_ML'``.

    Raises IllConditionedError when the basis is rank deficient (the Gram
    matrix is numerically singular), including any ``L > m`` request.
    """
    v_ml = sub.V_ML
    gram = symmetrize(v_ml.T @ v_ml)
    gram_cond = spectral_condition(gram)
    if not np.isfinite(gram_cond):
        raise IllConditionedError(
            f"subspace basis with L={sub.L} is rank deficient over the observation rows",
            condition_number=gram_cond,
        )
    g = solve_sym(gram, v_ml.T, "subspace Gram matrix")
    sigma_ww = symmetrize(g @ model.sigma_yy @ g.T)
    sigma_zw = model.sigma_zy @ g.T
    return ProjectionOperator(G=g, V_ML=v_ml, sigma_ww=sigma_ww, sigma_zw=sigma_zw)


def fit_reduced_dimension(model: CovarianceModel, proj: ProjectionOperator) -> Estimator:
    """Conditional mean given the filtered coordinates ``w = G y``.

    The combined coefficient matrix ``sigma_zw @ inv(sigma_ww) @ G`` maps the
    raw observation directly to the forecast.
    """
    cond_ww = spectral_condition(proj.sigma_ww)
    a = solve_sym(proj.sigma_ww, proj.sigma_zw.T, "sigma_ww").T
    coeff = a @ proj.G
    posterior = symmetrize(model.sigma_zz - a @ proj.sigma_zw.T)
    return Estimator(
        method=METHOD_RD,
        coeff=coeff,
        posterior_cov=posterior,
        cond=cond_ww,
        subspace_dim=proj.L,
    )


def predict(est: Estimator, y: np.ndarray) -> np.ndarray:
    """Apply the fitted coefficients to one centered observation vector."""
    y = np.asarray(y, dtype=float)
    if y.shape != (est.m,):
        raise ValueError(f"observation must have shape ({est.m},), got {y.shape}")
    return est.coeff @ y
