"""lrlab: low-rank + sparse matrix decomposition on stacked image sets.

RPCA, WNNM and WSNM solvers behind one interface, PSNR/SSIM scoring,
rank-bucketed hyperparameter sweeps and sparse-histogram face
identification, plus a synthetic benchmark generator.
"""

from .linalg import (NumericalError, SvdFactors, gst_scalar, soft_threshold,
                     svd, svt, weighted_schatten_prox)
from .metrics import QualityScore, psnr, quality, ssim
from .recognition import (HistogramProfile, RecognitionResult, peak_score,
                          recognize, shannon_entropy, sparse_histogram)
from .solvers import (Decomposition, SolverConfig, SolverError,
                      compute_weights, decompose, rank_of, rpca_ialm,
                      wnnm_rpca, wsnm_rpca)

__version__ = "0.1.0"

__all__ = [
    "Decomposition", "HistogramProfile", "NumericalError", "QualityScore",
    "RecognitionResult", "SolverConfig", "SolverError", "SvdFactors",
    "compute_weights", "decompose", "gst_scalar", "peak_score", "psnr",
    "quality", "rank_of", "recognize", "rpca_ialm", "shannon_entropy",
    "soft_threshold", "sparse_histogram", "ssim", "svd", "svt",
    "weighted_schatten_prox", "wnnm_rpca", "wsnm_rpca",
]
