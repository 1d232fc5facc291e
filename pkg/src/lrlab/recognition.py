"""Face identification from sparse-image histograms.

A test image is stacked (as the last column) with each candidate
subject's gallery and decomposed.  For the right subject the sparse
column holds only the intra-class difference (the occlusion), so its
histogram has a single steep peak at the display-neutral value 0.5;
for wrong subjects inter-class differences spread the histogram out.
The subject whose histogram is most peaked wins.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imaging import stack
from .solvers import SolverConfig, SolverError, decompose

DEFAULT_BINS = 32


@dataclass(frozen=True)
class HistogramProfile:
    """Counts over equally spaced bins covering [0, 1]."""

    bin_count: int
    counts: np.ndarray
    total: int


@dataclass(frozen=True)
class SubjectScore:
    subject: str
    peak: float
    entropy: float


@dataclass(frozen=True)
class RecognitionResult:
    predicted_subject: str
    scores: list
    histograms: dict


def sparse_display_transform(values) -> np.ndarray:
    """Map sparse values to the [0, 1] display axis: v/2 + 0.5, clamped.

    Zero (no sparse content) lands exactly at 0.5.
    """
    v = np.asarray(values, dtype=float)
    return np.clip(v / 2.0 + 0.5, 0.0, 1.0)


def sparse_histogram(sparse_column, bin_count: int = DEFAULT_BINS) -> HistogramProfile:
    """Histogram of display-transformed sparse values.

    Value v falls in bin floor(v * bin_count); v = 1 goes to the last bin.
    """
    if bin_count < 2:
        raise ValueError(f"bin_count must be >= 2, got {bin_count}")
    v = sparse_display_transform(sparse_column)
    idx = np.minimum((v * bin_count).astype(int), bin_count - 1)
    counts = np.bincount(idx, minlength=bin_count)
    return HistogramProfile(bin_count=bin_count, counts=counts,
                            total=int(counts.sum()))


def peak_score(h: HistogramProfile) -> float:
    """Fraction of mass in the tallest bin; 1.0 means a single spike."""
    if h.total <= 0:
        raise ValueError("empty histogram")
    return float(h.counts.max()) / h.total


def shannon_entropy(h: HistogramProfile) -> float:
    """Entropy in bits of the bin distribution (tie-breaker for peaks)."""
    if h.total <= 0:
        raise ValueError("empty histogram")
    q = h.counts[h.counts > 0] / h.total
    return float(-np.sum(q * np.log2(q)))


def recognize(test, galleries, cfg: SolverConfig | None = None,
              bin_count: int = DEFAULT_BINS, threads: int = 1) -> RecognitionResult:
    """Identify the subject of ``test`` among candidate galleries.

    ``galleries`` is a list of (subject id, list of images).  Per subject
    the gallery plus the test image (last column) is decomposed with the
    configured solver (wsnm by default) and the test image's sparse
    column is histogrammed.  Highest peak wins; ties break on lower
    entropy, then on gallery order.
    """
    galleries = list(galleries)
    if not galleries:
        raise ValueError("need at least one candidate gallery")
    cfg = cfg or SolverConfig(solver="wsnm")
    test = np.asarray(test, dtype=float)

    def solve_one(item):
        subject, images = item
        images = list(images)
        if not images:
            raise ValueError(f"subject {subject!r} has an empty gallery")
        try:
            s = stack(images + [test])
            dec = decompose(s.matrix, cfg)
        except (ValueError, SolverError) as exc:
            if isinstance(exc, SolverError):
                exc.subject = subject
                raise
            raise ValueError(f"subject {subject!r}: {exc}") from exc
        return sparse_histogram(dec.sparse[:, -1], bin_count)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hists = list(pool.map(solve_one, galleries))
    else:
        hists = [solve_one(g) for g in galleries]

    scores = [SubjectScore(subject=str(sub), peak=peak_score(h),
                           entropy=shannon_entropy(h))
              for (sub, _), h in zip(galleries, hists)]
    order = sorted(range(len(scores)),
                   key=lambda i: (-scores[i].peak, scores[i].entropy, i))
    return RecognitionResult(
        predicted_subject=scores[order[0]].subject,
        scores=scores,
        histograms={str(sub): h for (sub, _), h in zip(galleries, hists)},
    )


def write_histogram_csv(h: HistogramProfile, path) -> None:
    """Export a histogram as bin_index,bin_low,bin_high,count rows."""
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_index", "bin_low", "bin_high", "count"])
        for i, c in enumerate(h.counts):
            writer.writerow([i, format(i / h.bin_count, ".6g"),
                             format((i + 1) / h.bin_count, ".6g"), int(c)])
