"""Sample covariance of windowed data, its block partition, and its spectrum.

The covariance of the centered window coordinates is split at column ``m``
into an observation block ``sigma_yy``, a future block ``sigma_zz``, and the
cross blocks.  Its eigendecomposition (which realizes the singular value
decomposition, the matrix being symmetric positive semidefinite) supplies the
principal subspaces used by the reduced-dimension estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import spectral_condition, symmetrize
from .data_pipeline import DataMatrix
from .errors import DomainError, InsufficientDataError

__all__ = [
    "CovarianceModel",
    "Subspace",
    "empirical_covariance",
    "condition_number",
    "choose_subspace",
    "dump_covariance_csv",
    "DENOM_SAMPLES",
    "DENOM_COLUMNS",
]

# Sample-covariance denominator conventions.  The default divides by the
# sample count minus one; "columns" divides by the column count instead and
# exists only to reproduce that alternative reading of the scale factor.
DENOM_SAMPLES = "samples"
DENOM_COLUMNS = "columns"


@dataclass(frozen=True)
class CovarianceModel:
    """Symmetric PSD covariance with a y/z block split and its eigenpairs.

    ``eigenvalues`` are sorted descending and clamped at zero; ``V`` holds the
    matching orthonormal eigenvectors as columns.
    """

    sigma_xx: np.ndarray
    m: int
    eigenvalues: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        for name in ("sigma_xx", "eigenvalues", "V"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_matrix(cls, sigma: np.ndarray, m: int) -> "CovarianceModel":
        """Build a model from an explicit covariance matrix.

        The matrix must be square, symmetric to 1e-12 relative, and positive
        semidefinite up to round-off (eigenvalues above ``-1e-10 * s_max``);
        tiny negative eigenvalues are clamped to zero.
        """
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError(f"covariance must be square, got {sigma.shape}")
        d = sigma.shape[0]
        if not 1 <= m < d:
            raise ValueError(f"split m must be in [1, {d - 1}], got {m}")
        scale = float(np.abs(sigma).max())
        if scale > 0 and float(np.abs(sigma - sigma.T).max()) > 1e-12 * scale:
            raise DomainError("covariance is not symmetric within 1e-12 relative")
        sigma = symmetrize(sigma)
        s, vecs = np.linalg.eigh(sigma)
        smax = float(s.max(initial=0.0))
        if float(s.min()) < -1e-10 * max(smax, 1e-300):
            raise DomainError("covariance is not positive semidefinite within tolerance")
        order = np.argsort(-s, kind="stable")
        return cls(
            sigma_xx=sigma,
            m=m,
            eigenvalues=np.clip(s[order], 0.0, None),
            V=vecs[:, order],
        )

    @property
    def dim(self) -> int:
        return self.sigma_xx.shape[0]

    @property
    def horizon(self) -> int:
        return self.dim - self.m

    @property
    def sigma_yy(self) -> np.ndarray:
        return self.sigma_xx[: self.m, : self.m]

    @property
    def sigma_yz(self) -> np.ndarray:
        return self.sigma_xx[: self.m, self.m :]

    @property
    def sigma_zy(self) -> np.ndarray:
        # transpose view of sigma_yz, equal to it by construction
        return self.sigma_xx[: self.m, self.m :].T

    @property
    def sigma_zz(self) -> np.ndarray:
        return self.sigma_xx[self.m :, self.m :]


@dataclass(frozen=True)
class Subspace:
    """Leading ``L``-dimensional principal subspace of a covariance model.

    ``V_ML`` is the observation-rows restriction of ``V_L`` (the first ``m``
    rows), the basis actually used to filter observations.
    """

    L: int
    V_L: np.ndarray
    V_ML: np.ndarray
    energy_fraction: float


def empirical_covariance(train: DataMatrix, denominator: str = DENOM_SAMPLES) -> CovarianceModel:
    """Sample covariance of centered training rows, split at ``train.split_m``."""
    k = train.n_samples
    if k < 2:
        raise InsufficientDataError(f"covariance needs at least 2 training rows, got {k}")
    if denominator == DENOM_SAMPLES:
        denom = k - 1
    elif denominator == DENOM_COLUMNS:
        denom = train.dim
    else:
        raise ValueError(f"unknown denominator convention {denominator!r}")
    sigma = train.X.T @ train.X / denom
    return CovarianceModel.from_matrix(symmetrize(sigma), train.split_m)


def condition_number(a: np.ndarray) -> float:
    """Spectral condition number; ``inf`` once s_min falls to 1e-15 of s_max."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"condition number needs a square matrix, got {a.shape}")
    if a.size == 0:
        raise ValueError("condition number of an empty matrix is undefined")
    return spectral_condition(a)


def choose_subspace(model: CovarianceModel, L: int) -> Subspace:
    """Take the ``L`` leading eigenvectors and report their energy fraction."""
    if not 1 <= L <= model.dim:
        raise ValueError(f"L must be in [1, {model.dim}], got {L}")
    v_l = model.V[:, :L]
    total = float(model.eigenvalues.sum())
    energy = float(model.eigenvalues[:L].sum() / total) if total > 0 else 1.0
    return Subspace(L=L, V_L=v_l, V_ML=v_l[: model.m, :], energy_fraction=energy)


def dump_covariance_csv(model: CovarianceModel, path: str) -> None:
    """Write ``sigma_xx`` as plain CSV, full-precision scientific notation."""
    np.savetxt(path, model.sigma_xx, delimiter=",", fmt="%.17e")
