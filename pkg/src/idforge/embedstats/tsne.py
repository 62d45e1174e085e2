"""Exact t-SNE (no tree approximation) for desk-scale embedding sets.

Gradient descent on KL(P||Q) with momentum and early exaggeration; the
reported loss is always measured against the unexaggerated P, so it is a
true KL divergence (non-negative) at every iterate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, InvariantError
from .features import FeatureSet

_EPS = 1e-12
PERPLEXITY_TOL = 1e-3
MAX_BISECT_ITERS = 64


@dataclass(frozen=True)
class TsneConfig:
    """Defaults are convention, not published values.

    Early exaggeration multiplies P for the first min(250, iterations // 4)
    iterations.
    """

    perplexity: float = 30.0
    learning_rate: float = 200.0
    momentum: float = 0.5
    iterations: int = 1000
    seed: int = 0
    early_exaggeration: float = 4.0

    def __post_init__(self):
        if self.perplexity <= 0 or self.learning_rate <= 0 or self.early_exaggeration <= 0:
            raise InvariantError("perplexity, learning_rate, early_exaggeration must be > 0")
        if not (0.0 <= self.momentum < 1.0):
            raise InvariantError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.iterations < 1:
            raise InvariantError("iterations must be >= 1")


def pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    """Symmetric matrix of squared euclidean distances with a zero diagonal."""
    x = np.asarray(x, dtype=np.float64)
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def _row_perplexity(sq_row: np.ndarray, i: int, sigma: float) -> tuple[float, np.ndarray]:
    """2^H of the conditional distribution for row i at bandwidth sigma."""
    logits = -sq_row / (2.0 * sigma * sigma)
    logits[i] = -np.inf
    logits -= logits[logits > -np.inf].max()
    p = np.exp(logits)
    p[i] = 0.0
    total = p.sum()
    p /= total
    nz = p > 0
    entropy_bits = -np.sum(p[nz] * np.log2(p[nz]))
    return float(2.0 ** entropy_bits), p


def calibrate_perplexity(distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-point bandwidths sigma_i with conditional 2^H = perplexity.

    Bisection on sigma_i, at most 64 refinement steps after bracketing;
    raises ConvergenceError (with the row index) when the target is not met
    within 1e-3, including the infeasible case perplexity >= n - 1.
    """
    distances = np.asarray(distances, dtype=np.float64)
    n = distances.shape[0]
    if distances.shape != (n, n):
        raise InvariantError(f"distances must be square, got {distances.shape}")
    if float(np.abs(distances - distances.T).max()) > 1e-9:
        raise InvariantError("distances must be symmetric")
    if float(np.abs(np.diag(distances)).max()) > 0.0:
        raise InvariantError("distances must have a zero diagonal")
    if perplexity >= n - 1:
        raise ConvergenceError(
            f"perplexity {perplexity} infeasible for {n} points (max < {n - 1})")

    sigmas = np.empty(n, dtype=np.float64)
    for i in range(n):
        row = distances[i]
        scale = np.sqrt(max(row.max(), _EPS))
        lo, hi = scale * 1e-9, scale
        # grow the upper bracket until the perplexity reaches the target
        for _ in range(MAX_BISECT_ITERS):
            if _row_perplexity(row.copy(), i, hi)[0] >= perplexity:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise ConvergenceError(f"cannot bracket perplexity for row {i}")
        achieved = None
        for _ in range(MAX_BISECT_ITERS):
            mid = (lo + hi) / 2.0
            achieved, _ = _row_perplexity(row.copy(), i, mid)
            if abs(achieved - perplexity) <= PERPLEXITY_TOL:
                break
            if achieved > perplexity:
                hi = mid
            else:
                lo = mid
        else:
            raise ConvergenceError(
                f"row {i}: achieved perplexity {achieved:.6f}, wanted {perplexity}")
        sigmas[i] = (lo + hi) / 2.0
    return sigmas


def joint_probabilities(distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized affinities P = (P_cond + P_cond^T) / 2n, summing to 1."""
    n = distances.shape[0]
    sigmas = calibrate_perplexity(distances, perplexity)
    cond = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        _, cond[i] = _row_perplexity(distances[i].copy(), i, float(sigmas[i]))
    p = (cond + cond.T) / (2.0 * n)
    return np.maximum(p, _EPS)


def _q_matrix(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Student-t affinities Q and the unnormalized kernel (1+d^2)^-1."""
    num = 1.0 / (1.0 + pairwise_sq_distances(y))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return np.maximum(q, _EPS), num


def kl_divergence_and_grad(p: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P||Q) at embedding y and its analytic gradient dKL/dy.

    grad_i = 4 sum_j (p_ij - q_ij) (1 + ||y_i - y_j||^2)^-1 (y_i - y_j).
    """
    q, num = _q_matrix(y)
    kl = float(np.sum(p * np.log(p / q)))
    weights = (p - q) * num
    grad = 4.0 * ((np.diag(weights.sum(axis=1)) - weights) @ y)
    return kl, grad


def tsne(fs: FeatureSet | np.ndarray, cfg: TsneConfig = TsneConfig()) -> np.ndarray:
    """Embed features into 2-D; deterministic for a fixed config seed."""
    x = np.asarray(fs.values if isinstance(fs, FeatureSet) else fs, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise InvariantError(f"need at least 4 points, got {n}")
    if cfg.perplexity >= (n - 1) / 3.0:
        raise InvariantError(
            f"perplexity {cfg.perplexity} too large for {n} points (must be < (n-1)/3)")

    p = joint_probabilities(pairwise_sq_distances(x), cfg.perplexity)

    rng = np.random.default_rng(cfg.seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    velocity = np.zeros_like(y)
    exaggeration_iters = min(250, max(1, cfg.iterations // 4))

    for iteration in range(cfg.iterations):
        p_eff = p * cfg.early_exaggeration if iteration < exaggeration_iters else p
        q, num = _q_matrix(y)
        kl = float(np.sum(p * np.log(p / q)))
        if not np.isfinite(kl):
            raise ConvergenceError(f"non-finite loss at iteration {iteration}")
        weights = (p_eff - q) * num
        grad = 4.0 * ((np.diag(weights.sum(axis=1)) - weights) @ y)
        velocity = cfg.momentum * velocity - cfg.learning_rate * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    return y
