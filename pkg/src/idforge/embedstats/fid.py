"""Fréchet distance between Gaussian fits of two embedding distributions.

The cross term (Sigma_A . Sigma_B)^{1/2} is evaluated through the congruent
symmetric product A^{1/2} B A^{1/2}, whose square root has the same trace,
so every eigendecomposition runs on a symmetric PSD matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, InvariantError, NotPsdError
from .features import FeatureSet

logger = logging.getLogger(__name__)

SYM_TOL = 1e-9
EIG_CLAMP_REL = 1e-10
NEGATIVE_FID_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FeatureStats:
    """Mean vector and covariance matrix of one feature distribution."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if sigma.shape != (mu.size, mu.size):
            raise InvariantError(f"sigma shape {sigma.shape} does not match mu size {mu.size}")
        _check_symmetric(sigma)
        if np.any(np.diag(sigma) < -SYM_TOL):
            raise InvariantError("covariance has negative diagonal entries")
        mu = mu.copy()
        sigma = sigma.copy()
        mu.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self) -> int:
        return self.mu.size


def _check_symmetric(m: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    if float(np.abs(m - m.T).max()) > SYM_TOL * scale:
        raise NotPsdError("matrix is not symmetric within tolerance")


def stats(fs: FeatureSet) -> FeatureStats:
    """Column means and unbiased (n-1 divisor) sample covariance,
    symmetrized exactly as (S + S^T) / 2."""
    values = fs.values.astype(np.float64)
    mu = values.mean(axis=0)
    centered = values - mu
    sigma = centered.T @ centered / (fs.n - 1)
    sigma = (sigma + sigma.T) / 2.0
    return FeatureStats(mu, sigma)


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric square root of a symmetric PSD matrix via eigendecomposition.

    Eigenvalues in [-1e-10 * ||m||, 0) are treated as rounding noise and
    clamped to zero; anything lower raises NotPsdError.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    _check_symmetric(m)
    m = (m + m.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(m)
    norm = float(np.abs(eigvals).max()) if eigvals.size else 0.0
    clamp = -EIG_CLAMP_REL * max(norm, 1e-300)
    if np.any(eigvals < clamp):
        raise NotPsdError(
            f"matrix has eigenvalue {eigvals.min():.3e} below clamp {clamp:.3e}")
    root = eigvecs @ np.diag(np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    return (root + root.T) / 2.0


def fid(a: FeatureStats, b: FeatureStats) -> float:
    """||mu_A - mu_B||^2 + Tr(Sigma_A + Sigma_B - 2 (Sigma_A Sigma_B)^{1/2}).

    Small negative totals from rounding are clamped to zero (magnitude
    logged).
    """
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    diff = a.mu - b.mu
    root_a = matrix_sqrt_psd(a.sigma)
    inner = root_a @ b.sigma @ root_a
    cross = matrix_sqrt_psd((inner + inner.T) / 2.0)
    value = float(diff @ diff + np.trace(a.sigma) + np.trace(b.sigma) - 2.0 * np.trace(cross))
    if value < 0.0:
        level = logging.INFO if value >= -NEGATIVE_FID_TOL else logging.WARNING
        logger.log(level, "clamping negative FID %.3e to 0", value)
        value = 0.0
    return value


def fid_from_features(fa: FeatureSet, fb: FeatureSet) -> float:
    return fid(stats(fa), stats(fb))
