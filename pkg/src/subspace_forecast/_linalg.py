"""Internal linear-algebra helpers.

Every inverse in the toolkit is realized as a solve against a symmetric
matrix; this module centralizes that so the ill-conditioning policy lives in
one place.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg as sla

from .errors import IllConditionedError

# s_min at or below s_max times this counts as numerically singular.
SINGULARITY_RTOL = 1e-15


def spectral_condition(a: np.ndarray) -> float:
    """Ratio of extreme singular values, ``inf`` at numerical singularity."""
    a = np.asarray(a, dtype=float)
    s = np.linalg.svd(a, compute_uv=False)
    smax = float(s[0])
    smin = float(s[-1])
    if smin <= smax * SINGULARITY_RTOL:
        return float("inf")
    return smax / smin


def solve_sym(a: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric ``a``.

    Ill-conditioned systems are solved anyway (callers report the condition
    number as a diagnostic); only exact numerical singularity raises
    :class:`IllConditionedError`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            x = sla.solve(a, b, assume_a="sym")
    except (sla.LinAlgError, np.linalg.LinAlgError) as exc:
        raise IllConditionedError(
            f"{what} is numerically singular", condition_number=spectral_condition(a)
        ) from exc
    if not np.all(np.isfinite(x)):
        raise IllConditionedError(
            f"solve against {what} produced non-finite values",
            condition_number=spectral_condition(a),
        )
    return x


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose; the result is exactly symmetric."""
    return (a + a.T) / 2.0
