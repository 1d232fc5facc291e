"""Shared builders for the recognition benchmark instances."""

import numpy as np

from lrlab.synth import smooth_pattern


def subject_base(seed, h=48, w=48):
    """Distinct rank-1-style smooth face stand-in in [0.25, 0.75]."""
    rng = np.random.default_rng(seed)
    p = smooth_pattern(rng, h, w)
    return 0.25 + 0.5 * (p - p.min()) / (p.max() - p.min())


def occlusion(rng, h=48, w=48):
    """A small random dark/bright patch; sparse by construction."""
    m = np.zeros((h, w))
    r0 = int(rng.integers(4, h - 12))
    c0 = int(rng.integers(4, w - 14))
    m[r0:r0 + int(rng.integers(5, 10)), c0:c0 + int(rng.integers(7, 13))] = \
        float(rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 0.6))
    return m


def make_recognition_instance(seed, subjects=3, gallery_size=6):
    """Galleries of occluded shots (plus one clean base) and a fresh test."""
    rng = np.random.default_rng(seed)
    bases = [subject_base(int(rng.integers(1 << 31))) for _ in range(subjects)]
    galleries = []
    for s, base in enumerate(bases):
        images = [base.copy()] + [np.clip(base + occlusion(rng), 0, 1)
                                  for _ in range(gallery_size - 1)]
        galleries.append((f"subject{s}", images))
    true = int(rng.integers(subjects))
    test = np.clip(bases[true] + occlusion(rng), 0, 1)
    return test, galleries, f"subject{true}"
