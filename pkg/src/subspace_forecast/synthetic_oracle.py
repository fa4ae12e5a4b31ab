"""Ground-truth Gaussian sampler and Monte-Carlo checks for the closed forms.

Estimators fitted from a known covariance can be scored against brute-force
sampling: :func:`mc_mse` replays the forecast on fresh draws, and
:func:`mc_bias` estimates the conditional bias by stratifying on the future
block and replicating observations from the reverse conditional law.  Both
return the estimate together with its sampling standard error.

Fixture covariances come from :func:`random_covariance`, which pins an exact
eigenvalue spectrum on a random orthogonal basis so conditioning is
controllable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import solve_sym, symmetrize
from .errors import DomainError, ParseError
from .estimators import Estimator

__all__ = [
    "GaussianSpec",
    "McEstimate",
    "sample",
    "mc_mse",
    "mc_bias",
    "random_covariance",
    "geometric_spectrum",
    "load_gaussian_spec",
]


@dataclass(frozen=True)
class GaussianSpec:
    """A ground-truth Gaussian law: mean, covariance, and a sampling seed."""

    dim: int
    true_cov: np.ndarray
    true_mean: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        cov = np.asarray(self.true_cov, dtype=float)
        if cov.shape != (self.dim, self.dim):
            raise ValueError(f"true_cov must be ({self.dim}, {self.dim}), got {cov.shape}")
        scale = float(np.abs(cov).max(initial=0.0))
        if scale > 0 and float(np.abs(cov - cov.T).max()) > 1e-12 * scale:
            raise DomainError("true_cov must be symmetric")
        cov = symmetrize(cov)
        eigs = np.linalg.eigvalsh(cov)
        if float(eigs.min()) < -1e-10 * max(float(eigs.max()), 1e-300):
            raise DomainError("true_cov must be positive semidefinite")
        mean = (
            np.zeros(self.dim)
            if self.true_mean is None
            else np.asarray(self.true_mean, dtype=float)
        )
        if mean.shape != (self.dim,):
            raise ValueError(f"true_mean must have shape ({self.dim},), got {mean.shape}")
        cov.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "true_cov", cov)
        object.__setattr__(self, "true_mean", mean)


@dataclass(frozen=True)
class McEstimate:
    """A Monte-Carlo estimate with its sampling standard error."""

    value: float
    se: float
    n: int

    def __float__(self) -> float:
        return self.value


def _sqrt_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix via its eigendecomposition."""
    s, v = np.linalg.eigh(symmetrize(cov))
    return (v * np.sqrt(np.clip(s, 0.0, None))) @ v.T


def sample(spec: GaussianSpec, n: int) -> np.ndarray:
    """Draw ``n`` vectors; deterministic per seed (same seed, same matrix)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(spec.seed)
    factor = _sqrt_factor(spec.true_cov)
    return spec.true_mean + rng.standard_normal((n, spec.dim)) @ factor


def _split_blocks(spec: GaussianSpec, est: Estimator, split: int):
    h = spec.dim - split
    if split != est.m or h != est.horizon:
        raise ValueError(
            f"estimator shape ({est.horizon}, {est.m}) does not match spec dim "
            f"{spec.dim} split at {split}"
        )
    cov = spec.true_cov
    return (
        cov[:split, :split],
        cov[:split, split:],
        cov[split:, :split],
        cov[split:, split:],
        spec.true_mean[:split],
        spec.true_mean[split:],
    )


def mc_mse(spec: GaussianSpec, est: Estimator, split: int, n: int) -> McEstimate:
    """Empirical mean squared error of the estimator over ``n`` fresh draws."""
    _, _, _, _, mean_y, mean_z = _split_blocks(spec, est, split)
    x = sample(spec, n)
    y_c = x[:, :split] - mean_y
    z_c = x[:, split:] - mean_z
    err = z_c - y_c @ est.coeff.T
    sq = np.einsum("ij,ij->i", err, err)
    se = float(sq.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return McEstimate(value=float(sq.mean()), se=se, n=n)


def mc_bias(
    spec: GaussianSpec, est: Estimator, split: int, n: int, n_y: int = 100
) -> McEstimate:
    """Empirical squared conditional bias, stratified on the future block.

    For each of ``n // n_y`` draws of the future block z, ``n_y`` observation
    vectors are replicated from the reverse conditional law (mean ``R (z -
    mean_z)``), the forecasts are averaged to estimate the conditional mean,
    and its squared distance to z is recorded.  The replication noise that
    inflates that distance is estimated from the within-stratum scatter and
    subtracted, so the estimator is unbiased for ``E || E[zhat | z] - z ||^2``.
    """
    syy, _, szy, szz, mean_y, mean_z = _split_blocks(spec, est, split)
    n_rep = max(2, min(n_y, n))
    n_z = max(1, n // n_rep)
    # reverse conditional: y | z is Gaussian with mean R (z - mean_z) + mean_y
    r = solve_sym(szz, szy, "sigma_zz").T
    cond_cov = symmetrize(syy - r @ szy)
    y_factor = _sqrt_factor(cond_cov)
    z_factor = _sqrt_factor(szz)
    rng = np.random.default_rng(spec.seed)
    z_c = rng.standard_normal((n_z, est.horizon)) @ z_factor
    eps = rng.standard_normal((n_z, n_rep, split)) @ y_factor
    y_c = z_c @ r.T
    zhat = (y_c[:, None, :] + eps) @ est.coeff.T
    m_k = zhat.mean(axis=1)
    resid = zhat - m_k[:, None, :]
    noise = np.einsum("kij,kij->k", resid, resid) / (n_rep - 1)
    b_k = np.einsum("ki,ki->k", m_k - z_c, m_k - z_c) - noise / n_rep
    se = float(b_k.std(ddof=1) / math.sqrt(n_z)) if n_z > 1 else float("inf")
    return McEstimate(value=float(b_k.mean()), se=se, n=n_z * n_rep)


def random_covariance(dim: int, spectrum: np.ndarray, seed: int = 0) -> np.ndarray:
    """Covariance with the given eigenvalues on a random orthogonal basis."""
    s = np.asarray(spectrum, dtype=float)
    if s.shape != (dim,):
        raise ValueError(f"spectrum must have shape ({dim},), got {s.shape}")
    if np.any(s < 0):
        raise ValueError("spectrum must be nonnegative")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return symmetrize((q * s) @ q.T)


def geometric_spectrum(dim: int, condition: float) -> np.ndarray:
    """Eigenvalues decaying geometrically from 1 down to ``1 / condition``."""
    if dim < 2 or condition < 1:
        raise ValueError("need dim >= 2 and condition >= 1")
    return condition ** (-np.arange(dim) / (dim - 1))


def load_gaussian_spec(path: str, seed: int = 0) -> GaussianSpec:
    """Read a covariance matrix from a plain CSV file (testing convenience)."""
    try:
        cov = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        if isinstance(exc, OSError):
            raise
        raise ParseError(f"{path}: not a numeric CSV matrix: {exc}") from exc
    return GaussianSpec(dim=cov.shape[0], true_cov=cov, seed=seed)
