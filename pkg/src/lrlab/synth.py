"""Synthetic face-like benchmark data.

Real face databases cannot ship with this package, so benchmarks run on
generated stand-ins: per subject a smooth low-rank "clean" image family
(a fixed base pattern plus weaker variation patterns with per-image
coefficients; rank <= 3 by default) and per-image sparse occlusion
masks of a chosen kind.  Occluded images are clip(clean + mask, 0, 1);
masks touch at most 20% of the pixels and are kept as ground truth for
scoring.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imaging import load_image, save_image

OCCLUSION_KINDS = ("shadow_left", "shadow_right", "shadow_top",
                   "shadow_front", "glasses", "expression")

CLEAN_RANK_TARGET = 3


@dataclass(frozen=True)
class SyntheticCase:
    """One benchmark cell: a subject's image set under one occlusion kind."""

    dataset: str
    case: str            # occlusion kind
    subject: str
    clean_images: list
    occluded_images: list
    occlusion_masks: list
    seed: int


def smooth_pattern(rng, height: int, width: int) -> np.ndarray:
    """Separable low-frequency pattern: outer product of cosine mixtures."""

    def profile(n):
        t = (np.arange(n) + 0.5) / n
        v = np.zeros(n)
        for _ in range(3):
            freq = rng.uniform(0.5, 2.5)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = rng.uniform(0.3, 1.0)
            v += amp * np.cos(2.0 * np.pi * freq * t + phase)
        return v

    return np.outer(profile(height), profile(width))


def make_clean_images(rng, height: int, width: int, count: int,
                      rank: int = CLEAN_RANK_TARGET) -> list:
    """Rank-<=``rank`` image family with pixel values inside [0.1, 0.9].

    All images share one base pattern (mapped into [0.4, 0.6]) and add
    rank-1 normalized variation patterns with per-image coefficients
    whose total amplitude stays below 0.3, so the stacked set spans at
    most ``rank`` directions and never needs clamping.
    """
    if rank < 1:
        raise ValueError(f"rank target must be >= 1, got {rank}")
    base = smooth_pattern(rng, height, width)
    base = 0.4 + 0.2 * (base - base.min()) / (base.max() - base.min())
    variations = []
    for _ in range(rank - 1):
        v = smooth_pattern(rng, height, width)
        variations.append(v / np.abs(v).max())
    amp = 0.3 / max(1, rank - 1)
    images = []
    for _ in range(count):
        img = base.copy()
        for v in variations:
            img = img + rng.uniform(-amp, amp) * v
        images.append(img)
    return images


def make_mask(rng, height: int, width: int, kind: str,
              scale: float = 1.0) -> np.ndarray:
    """One sparse occlusion mask (<= 20% nonzero pixels).

    Geometry and strength are jittered per image; roughly a quarter of
    the draws are unoccluded, mimicking the mix of clean and degraded
    shots in a real gallery.  ``scale`` multiplies the mask (0 disables
    occlusion entirely while consuming the same random draws).
    """
    if kind not in OCCLUSION_KINDS:
        raise ValueError(f"unknown occlusion kind {kind!r}")
    mask = np.zeros((height, width))
    # roughly a quarter of the gallery stays clean; occluded shadow shots
    # are kept strong so degradation is unambiguous per image
    clean_draw = rng.random() < 0.25
    strength = rng.uniform(0.8, 1.0) if kind.startswith("shadow") \
        else rng.uniform(0.4, 1.0)
    if clean_draw:
        strength = 0.0
    if kind in ("shadow_left", "shadow_right", "shadow_top"):
        depth = strength * rng.uniform(0.65, 0.9)
        frac = rng.uniform(0.1, 0.18)
        gamma = rng.uniform(0.5, 1.2)
        extent = rng.uniform(0.65, 1.0)
        # the strip starts a jittered distance from its edge, so supports
        # only partially overlap across a gallery
        off_frac = rng.uniform(0.0, 0.08)
        if kind == "shadow_top":
            n = max(1, int(frac * height))
            off = int(off_frac * height)
            ramp = (1.0 - (np.arange(n) + 0.5) / n) ** gamma
            c0 = int(rng.integers(0, int((1.0 - extent) * width) + 1))
            mask[off:off + n, c0:c0 + int(extent * width)] = \
                -depth * ramp[:, None]
        else:
            n = max(1, int(frac * width))
            off = int(off_frac * width)
            ramp = (1.0 - (np.arange(n) + 0.5) / n) ** gamma
            r0 = int(rng.integers(0, int((1.0 - extent) * height) + 1))
            r1 = r0 + int(extent * height)
            if kind == "shadow_left":
                mask[r0:r1, off:off + n] = -depth * ramp[None, :]
            else:
                mask[r0:r1, width - n - off:width - off] = \
                    -depth * ramp[None, ::-1]
    elif kind == "shadow_front":
        depth = strength * rng.uniform(0.6, 0.85)
        frac = rng.uniform(0.05, 0.09)
        gamma = rng.uniform(0.5, 1.2)
        off = int(rng.uniform(0.0, 0.06) * width)
        n = max(1, int(frac * width))
        ramp = (1.0 - (np.arange(n) + 0.5) / n) ** gamma
        r0 = int(rng.integers(0, int(0.3 * height)))
        r1 = r0 + int(rng.uniform(0.6, 0.7) * height)
        mask[r0:r1, off:off + n] = -depth * ramp[None, :]
        mask[r0:r1, width - n - off:width - off] = -depth * ramp[None, ::-1]
    elif kind == "glasses":
        depth = strength * rng.uniform(0.5, 0.8)
        r0 = int(rng.uniform(0.15, 0.45) * height)
        r1 = r0 + max(1, int(rng.uniform(0.1, 0.16) * height))
        shift = rng.uniform(-0.06, 0.06)
        for cx in (0.3, 0.7):
            c = int((cx + shift) * width)
            half = max(1, int(rng.uniform(0.07, 0.11) * width))
            mask[r0:r1, max(0, c - half):c + half] = -depth
    else:  # expression
        sign = 1.0 if rng.random() < 0.5 else -1.0
        value = sign * strength * rng.uniform(0.35, 0.5)
        r0 = int(rng.uniform(0.55, 0.75) * height)
        r1 = r0 + max(1, int(rng.uniform(0.08, 0.16) * height))
        c0 = int(rng.uniform(0.25, 0.45) * width)
        c1 = c0 + max(1, int(rng.uniform(0.2, 0.3) * width))
        mask[r0:r1, c0:c1] = value
    return mask * scale


def make_case(dataset: str, subject_index: int, kind: str, seed: int,
              images: int, width: int, height: int,
              mask_scale: float = 1.0,
              clean_rank: int = CLEAN_RANK_TARGET) -> SyntheticCase:
    """Deterministically build one (subject, kind) case.

    Image 0 is always an unoccluded enrollment shot, as in real gallery
    collections; the rest carry kind-specific masks.
    """
    kind_index = OCCLUSION_KINDS.index(kind)
    subject_rng = np.random.default_rng([seed, subject_index])
    cleans = make_clean_images(subject_rng, height, width, images, clean_rank)
    mask_rng = np.random.default_rng([seed, subject_index, kind_index])
    masks = [np.zeros((height, width))] + \
        [make_mask(mask_rng, height, width, kind, mask_scale)
         for _ in range(images - 1)]
    occluded = [np.clip(c + m, 0.0, 1.0) for c, m in zip(cleans, masks)]
    return SyntheticCase(
        dataset=dataset,
        case=kind,
        subject=f"s{subject_index:02d}",
        clean_images=cleans,
        occluded_images=occluded,
        occlusion_masks=masks,
        seed=seed,
    )


def synth_dataset(out_dir, subjects: int, images_per_subject: int,
                  width: int, height: int, occlusion_kinds, seed: int,
                  mask_scale: float = 1.0,
                  clean_rank: int = CLEAN_RANK_TARGET) -> list:
    """Generate cases for every (subject, kind) pair and write them to disk.

    Layout: <out>/<kind>/<subject>/{clean,occluded,mask}_<i>.npy plus a
    top-level manifest.json.  The .npy files are the authoritative float
    data (8-bit quantization would break the exact rank-<=3 structure of
    the clean stacks); .png copies are written alongside for viewing.
    Identical arguments reproduce bit-identical files.
    """
    if subjects < 1 or images_per_subject < 2:
        raise ValueError("need subjects >= 1 and images_per_subject >= 2")
    if width * height < 121:
        raise ValueError("images must have at least 121 pixels (SSIM window)")
    if isinstance(occlusion_kinds, str):
        occlusion_kinds = [occlusion_kinds]
    for kind in occlusion_kinds:
        if kind not in OCCLUSION_KINDS:
            raise ValueError(f"unknown occlusion kind {kind!r}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = out_dir.name
    cases = []
    for kind in occlusion_kinds:
        for s in range(subjects):
            case = make_case(dataset, s, kind, seed, images_per_subject,
                             width, height, mask_scale, clean_rank)
            case_dir = out_dir / kind / case.subject
            case_dir.mkdir(parents=True, exist_ok=True)
            for i in range(images_per_subject):
                np.save(case_dir / f"clean_{i:02d}.npy", case.clean_images[i])
                np.save(case_dir / f"occluded_{i:02d}.npy",
                        case.occluded_images[i])
                np.save(case_dir / f"mask_{i:02d}.npy", case.occlusion_masks[i])
                save_image(case.clean_images[i], case_dir / f"clean_{i:02d}.png")
                save_image(case.occluded_images[i],
                           case_dir / f"occluded_{i:02d}.png")
            cases.append(case)

    manifest = {
        "dataset": dataset,
        "seed": seed,
        "subjects": subjects,
        "images_per_subject": images_per_subject,
        "width": width,
        "height": height,
        "occlusion_kinds": list(occlusion_kinds),
        "mask_scale": mask_scale,
        "clean_rank": clean_rank,
    }
    with (out_dir / "manifest.json").open("w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return cases


def load_dataset(root):
    """Read back a generated dataset as (manifest, cases-with-images).

    The float .npy files are preferred; PNGs are only a fallback for
    hand-assembled datasets that carry a manifest.
    """
    root = Path(root)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text())

    def load_one(case_dir, stem, i):
        npy = case_dir / f"{stem}_{i:02d}.npy"
        if npy.is_file():
            return np.load(npy)
        return load_image(case_dir / f"{stem}_{i:02d}.png")

    cases = []
    for kind in manifest["occlusion_kinds"]:
        for s in range(manifest["subjects"]):
            case_dir = root / kind / f"s{s:02d}"
            n = manifest["images_per_subject"]
            cleans = [load_one(case_dir, "clean", i) for i in range(n)]
            occluded = [load_one(case_dir, "occluded", i) for i in range(n)]
            masks = [np.load(case_dir / f"mask_{i:02d}.npy") for i in range(n)]
            cases.append(SyntheticCase(
                dataset=manifest["dataset"],
                case=kind,
                subject=f"s{s:02d}",
                clean_images=cleans,
                occluded_images=occluded,
                occlusion_masks=masks,
                seed=manifest["seed"],
            ))
    return manifest, cases
