"""Image quality scoring: PSNR and SSIM on [0, 1] grayscale images.

PSNR uses MAX = 1.0 and an exactly rounded mean squared error, so e.g.
a constant 0.1 offset scores exactly 20 dB.  Identical images score an
infinite PSNR (serialized as "inf" downstream) and an SSIM of exactly 1.
SSIM follows the standard 11x11 Gaussian-window (sigma 1.5) definition
with K1 = 0.01, K2 = 0.03 over all fully interior window positions.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = 0.01 ** 2
_C2 = 0.03 ** 2


@dataclass(frozen=True)
class QualityScore:
    """Bundle of quality figures; fields not computed are None."""

    psnr_db: float | None = None
    ssim: float | None = None
    mse: float | None = None


def _pair(reference, test):
    a = np.asarray(reference, dtype=float)
    b = np.asarray(test, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mean_squared_error(reference, test) -> float:
    """MSE with exactly rounded summation (math.fsum)."""
    a, b = _pair(reference, test)
    d = (a - b).ravel()
    return math.fsum(d * d) / d.size


def psnr_from_mse(mse: float) -> float:
    """10*log10(1/mse), evaluated as 20*log10(1/sqrt(mse)); inf at mse 0."""
    if mse < 0:
        raise ValueError(f"mse must be non-negative, got {mse}")
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(1.0 / math.sqrt(mse))


def psnr(reference, test) -> QualityScore:
    """Peak signal-to-noise ratio in dB against peak value 1.0."""
    mse = mean_squared_error(reference, test)
    return QualityScore(psnr_db=psnr_from_mse(mse), mse=mse)


def _gaussian_kernel():
    half = (SSIM_WINDOW - 1) / 2.0
    x = np.arange(SSIM_WINDOW) - half
    g = np.exp(-(x ** 2) / (2.0 * SSIM_SIGMA ** 2))
    k = np.outer(g, g)
    return k / k.sum()


_KERNEL = _gaussian_kernel()


def _windowed(img):
    return convolve2d(img, _KERNEL, mode="valid")


def ssim(reference, test) -> QualityScore:
    """Mean local SSIM over all 11x11 Gaussian-weighted window positions."""
    a, b = _pair(reference, test)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, "
            f"got {a.shape}")
    mu_a = _windowed(a)
    mu_b = _windowed(b)
    var_a = _windowed(a * a) - mu_a * mu_a
    var_b = _windowed(b * b) - mu_b * mu_b
    cov = _windowed(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)
    den = (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
    return QualityScore(ssim=float(np.mean(num / den)))


def quality(reference, test) -> QualityScore:
    """PSNR, MSE and SSIM of a pair in one bundle."""
    mse = mean_squared_error(reference, test)
    return QualityScore(psnr_db=psnr_from_mse(mse),
                        ssim=ssim(reference, test).ssim,
                        mse=mse)


def stack_quality(references, tests) -> QualityScore:
    """Aggregate score of an image set.

    PSNR comes from the pooled MSE over every pixel of every pair (so a
    few perfect images cannot push the score to infinity); SSIM is the
    mean over pairs.
    """
    refs = list(references)
    outs = list(tests)
    if len(refs) != len(outs) or not refs:
        raise ValueError("need equally many (and at least one) reference/test images")
    sq_sums = []
    n = 0
    ssims = []
    for r, t in zip(refs, outs):
        a, b = _pair(r, t)
        d = (a - b).ravel()
        sq_sums.append(math.fsum(d * d))
        n += d.size
        ssims.append(ssim(a, b).ssim)
    mse = math.fsum(sq_sums) / n
    return QualityScore(psnr_db=psnr_from_mse(mse),
                        ssim=float(np.mean(ssims)),
                        mse=mse)
