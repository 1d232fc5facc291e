"""Dense linear-algebra primitives shared by all solvers.

Everything here operates on plain 2-D float64 numpy arrays and is a pure
function of its inputs, so results are reproducible call-to-call.
"""

from dataclasses import dataclass

import numpy as np


class NumericalError(Exception):
    """An iterative numerical routine (e.g. the SVD) failed to converge."""


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD of a matrix: ``u @ diag(sigma) @ v.T`` reconstructs it.

    ``sigma`` is non-increasing and non-negative; ``u`` (m x r) and
    ``v`` (n x r) have orthonormal columns, r = min(m, n).
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def _check_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def svd(m) -> SvdFactors:
    """Deterministic thin SVD with singular values in decreasing order.

    Raises NumericalError if the underlying iteration does not converge;
    this is never swallowed silently.
    """
    m = _check_matrix(m)
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(u=u, sigma=s, v=vt.T)


def soft_threshold(m, tau: float) -> np.ndarray:
    """Element-wise shrinkage sign(x) * max(|x| - tau, 0), the l1 prox."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    m = np.asarray(m, dtype=float)
    return np.sign(m) * np.maximum(np.abs(m) - tau, 0.0)


def svt(m, tau: float):
    """Singular value thresholding, the proximal operator of the nuclear norm.

    Returns ``(shrunk_matrix, rank)`` where rank counts singular values
    strictly above tau.
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    f = svd(m)
    shrunk = np.maximum(f.sigma - tau, 0.0)
    rank = int(np.count_nonzero(f.sigma > tau))
    return (f.u * shrunk) @ f.v.T, rank


def gst_scalar(sigma: float, w: float, p: float) -> float:
    """Generalized soft thresholding for one singular value.

    Returns the global minimizer over delta >= 0 of

        f(delta) = 0.5 * (delta - sigma)**2 + w * delta**p

    For p = 1 this is plain soft thresholding max(sigma - w, 0); for
    p in (0, 1) the minimizer is 0 below a closed-form threshold and is
    otherwise found by the fixed-point iteration
    delta <- sigma - w*p*delta**(p-1), started at delta = sigma.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if sigma < 0 or w < 0:
        raise ValueError("sigma and w must be non-negative")
    if w == 0.0:
        return float(sigma)
    if p == 1.0:
        return max(sigma - w, 0.0)
    # threshold below which 0 beats the interior stationary point
    root = (2.0 * w * (1.0 - p)) ** (1.0 / (2.0 - p))
    tau = root + w * p * root ** (p - 1.0)
    if sigma <= tau:
        return 0.0
    delta = float(sigma)
    for _ in range(100):
        step = sigma - w * p * delta ** (p - 1.0)
        if abs(step - delta) < 1e-12:
            return step
        delta = step
    return delta


def shrink_singular_values(factors: SvdFactors, weights, p: float) -> np.ndarray:
    """Apply gst_scalar per singular value of precomputed factors.

    ``weights`` must be non-descending so the per-value problems decouple
    optimally against the non-increasing sigma.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != factors.sigma.shape:
        raise ValueError(
            f"need {factors.sigma.size} weights, got {weights.size}")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if np.any(np.diff(weights) < 0):
        raise ValueError("weights must be non-descending")
    shrunk = np.array([gst_scalar(s, w, p)
                       for s, w in zip(factors.sigma, weights)])
    return (factors.u * shrunk) @ factors.v.T


def weighted_schatten_prox(m, weights, p: float) -> np.ndarray:
    """Weighted Schatten-p shrinkage of the singular values of ``m``.

    With constant weights w and p = 1 this reduces to svt(m, w).
    """
    return shrink_singular_values(svd(m), weights, p)


def frobenius(m) -> float:
    return float(np.linalg.norm(m, "fro"))


def spectral_norm(m) -> float:
    """Largest singular value (2-norm)."""
    m = _check_matrix(m)
    return float(np.linalg.svd(m, compute_uv=False)[0])
