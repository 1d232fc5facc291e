"""Low-rank + sparse decomposition via inexact augmented Lagrange multipliers.

Three solvers behind one loop:

  rpca  -- nuclear norm + lambda * l1, the classic convex program
  wnnm  -- weighted nuclear norm (weights from the singular values)
  wsnm  -- weighted Schatten p-norm, p in (0, 1]; wnnm is wsnm at p = 1

Each iteration shrinks the low-rank estimate, soft-thresholds the sparse
estimate, updates the multiplier Z <- Z + mu*(M - L - S) and grows mu by
rho up to mu_max.  Iteration stops when the relative constraint residual
||M - L - S||_F / ||M||_F drops below tol.  Non-convergence within
max_iter is reported in the result, not raised.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import (
    NumericalError,
    SvdFactors,
    _check_matrix,
    shrink_singular_values,
    soft_threshold,
    spectral_norm,
    svd,
)

SOLVERS = ("rpca", "wnnm", "wsnm")


class SolverError(NumericalError):
    """Numerical failure inside a solve; carries the iteration index."""

    def __init__(self, message, iteration=None, subject=None):
        super().__init__(message)
        self.iteration = iteration
        self.subject = subject


@dataclass(frozen=True)
class SolverConfig:
    """All solver hyperparameters.

    ``lam``, ``mu0`` and ``mu_max`` accept the string "auto":
    lam -> 1/sqrt(max(m, n)), mu0 -> 1.25/sigma1(M), mu_max -> 1e7*mu0,
    resolved at solve time.  ``uniform_weight`` replaces the computed
    singular-value weights with a constant (used to reduce wsnm to plain
    rpca); ``weights_from_input`` freezes the weights to those of the
    input matrix instead of recomputing them each iteration.
    """

    solver: str = "rpca"
    lam: float | str = "auto"
    p: float = 0.8
    c_weight: float = 1.0
    epsilon: float = 1e-16
    mu0: float | str = "auto"
    rho: float = 1.2
    mu_max: float | str = "auto"
    tol: float = 1e-7
    max_iter: int = 500
    weights_from_input: bool = False
    uniform_weight: float | None = None

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.rho <= 1.0:
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.c_weight <= 0:
            raise ValueError(f"c_weight must be positive, got {self.c_weight}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        for name in ("lam", "mu0", "mu_max"):
            v = getattr(self, name)
            if isinstance(v, str):
                if v != "auto":
                    raise ValueError(f"{name} must be a positive number or 'auto'")
            elif v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class Decomposition:
    """Result bundle of one solve: M ~ low_rank + sparse plus diagnostics."""

    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: int
    converged: bool
    final_residual: float
    rank_estimate: int
    sparsity: float
    residual_history: list = field(default_factory=list, repr=False)


def compute_weights(sigma, rows: int, cols: int, c: float, eps: float) -> np.ndarray:
    """Per-singular-value weights c * sqrt(rows*cols) / (sigma_i + eps).

    Non-increasing sigma yields non-descending weights, as required by
    the weighted shrinkage step.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    sigma = np.asarray(sigma, dtype=float)
    return c * math.sqrt(rows * cols) / (sigma + eps)


def rank_of(m, rel_tol: float = 1e-6) -> int:
    """Count singular values above rel_tol * sigma1 (0 for the zero matrix)."""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    s = np.linalg.svd(_check_matrix(m), compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def _resolve(cfg: SolverConfig, m: np.ndarray):
    rows, cols = m.shape
    lam = 1.0 / math.sqrt(max(rows, cols)) if cfg.lam == "auto" else float(cfg.lam)
    sigma1 = spectral_norm(m)
    if cfg.mu0 == "auto":
        mu0 = 1.25 / sigma1 if sigma1 > 0 else 1.25
    else:
        mu0 = float(cfg.mu0)
    mu_max = 1e7 * mu0 if cfg.mu_max == "auto" else float(cfg.mu_max)
    return lam, mu0, mu_max, sigma1


def _ialm(m: np.ndarray, cfg: SolverConfig, weighted: bool) -> Decomposition:
    m = _check_matrix(m)
    lam, mu, mu_max, _ = _resolve(cfg, m)
    norm_m = np.linalg.norm(m, "fro") or 1.0

    if weighted and cfg.weights_from_input:
        frozen_weights = _weights_for(svd(m), m.shape, cfg)
    else:
        frozen_weights = None

    low = np.zeros_like(m)
    sparse = np.zeros_like(m)
    dual = np.zeros_like(m)
    history = []
    converged = False
    residual = math.inf

    for it in range(1, cfg.max_iter + 1):
        target = m - sparse + dual / mu
        try:
            factors = svd(target)
        except NumericalError as exc:
            raise SolverError(str(exc), iteration=it) from exc
        if weighted:
            weights = frozen_weights if frozen_weights is not None \
                else _weights_for(factors, m.shape, cfg)
            low = shrink_singular_values(factors, weights / mu, cfg.p)
        else:
            shrunk = np.maximum(factors.sigma - 1.0 / mu, 0.0)
            low = (factors.u * shrunk) @ factors.v.T
        sparse = soft_threshold(m - low + dual / mu, lam / mu)
        gap = m - low - sparse
        dual = dual + mu * gap
        mu = min(cfg.rho * mu, mu_max)
        residual = np.linalg.norm(gap, "fro") / norm_m
        history.append(residual)
        if residual < cfg.tol:
            converged = True
            break

    return Decomposition(
        low_rank=low,
        sparse=sparse,
        iterations=it,
        converged=converged,
        final_residual=residual,
        rank_estimate=rank_of(low),
        sparsity=float(np.count_nonzero(np.abs(sparse) > 1e-8)) / sparse.size,
        residual_history=history,
    )


def _weights_for(factors: SvdFactors, shape, cfg: SolverConfig) -> np.ndarray:
    if cfg.uniform_weight is not None:
        return np.full_like(factors.sigma, cfg.uniform_weight)
    return compute_weights(factors.sigma, shape[0], shape[1],
                           cfg.c_weight, cfg.epsilon)


def rpca_ialm(m, cfg: SolverConfig | None = None) -> Decomposition:
    """Robust PCA: min ||L||_* + lam*||S||_1  s.t.  M = L + S."""
    cfg = cfg or SolverConfig(solver="rpca")
    return _ialm(m, cfg, weighted=False)


def wsnm_rpca(m, cfg: SolverConfig | None = None) -> Decomposition:
    """Weighted Schatten-p RPCA: min lam*||E||_1 + sum_i w_i*sigma_i(X)**p."""
    cfg = cfg or SolverConfig(solver="wsnm")
    return _ialm(m, cfg, weighted=True)


def wnnm_rpca(m, cfg: SolverConfig | None = None) -> Decomposition:
    """Weighted nuclear norm RPCA; identical to wsnm_rpca with p forced to 1."""
    cfg = cfg or SolverConfig(solver="wnnm")
    return wsnm_rpca(m, replace(cfg, solver="wsnm", p=1.0))


def decompose(m, cfg: SolverConfig) -> Decomposition:
    """Dispatch on cfg.solver."""
    if cfg.solver == "rpca":
        return rpca_ialm(m, cfg)
    if cfg.solver == "wnnm":
        return wnnm_rpca(m, cfg)
    return wsnm_rpca(m, cfg)
