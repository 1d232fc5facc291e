"""Matplotlib rendering of sweep, comparison and recognition reports.

Figures are written next to the delimited output; matplotlib loads
lazily (Agg) so non-plotting paths never pay the import.
"""

import math
from pathlib import Path


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _grid_axes(plt, n, title):
    cols = min(3, max(1, n))
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows),
                             squeeze=False)
    fig.suptitle(title)
    return fig, [ax for row in axes for ax in row]


def sweep_figure(results, out_png, title=None) -> Path:
    """Per-case best PSNR (and SSIM) versus achieved rank, one panel each."""
    plt = _plt()
    groups = {}
    for r in results:
        if math.isnan(r.psnr_db):
            continue
        key = (r.case, r.subject, r.solver, r.p)
        prof = groups.setdefault(key, {})
        if r.rank not in prof or r.psnr_db > prof[r.rank][0]:
            prof[r.rank] = (r.psnr_db, r.ssim)
    keys = sorted(groups)
    fig, axes = _grid_axes(plt, len(keys), title or "PSNR / SSIM vs rank")
    cap = 60.0
    for ax, key in zip(axes, keys):
        prof = groups[key]
        ranks = sorted(prof)
        psnrs = [min(prof[r][0], cap) for r in ranks]
        ssims = [prof[r][1] for r in ranks]
        ax.plot(ranks, psnrs, "o-", color="tab:blue", label="PSNR")
        ax.set_xlabel("rank")
        ax.set_ylabel("PSNR (dB)", color="tab:blue")
        twin = ax.twinx()
        twin.plot(ranks, ssims, "s--", color="tab:orange", label="SSIM")
        twin.set_ylabel("SSIM", color="tab:orange")
        twin.set_ylim(0.0, 1.05)
        case, subject, solver, p = key
        ax.set_title(f"{case}/{subject} [{solver}, p={p:g}]", fontsize=9)
    for ax in axes[len(keys):]:
        ax.axis("off")
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=110)
    plt.close(fig)
    return out_png


def compare_figure(rows, out_png, title="Best PSNR per solver") -> Path:
    """Grouped bars of per-case best PSNR for each solver label."""
    plt = _plt()
    cases = []
    labels = []
    values = {}
    for row in rows:
        dataset, case, subject, label, best_psnr = row[:5]
        if case == "__median__":
            continue
        ck = f"{case}/{subject}"
        if ck not in cases:
            cases.append(ck)
        if label not in labels:
            labels.append(label)
        values[(ck, label)] = min(float(best_psnr), 60.0)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(cases) + 2), 4.5))
    width = 0.8 / max(1, len(labels))
    for i, label in enumerate(labels):
        xs = [j + i * width for j in range(len(cases))]
        ys = [values.get((c, label), 0.0) for c in cases]
        ax.bar(xs, ys, width=width, label=label)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(cases))])
    ax.set_xticklabels(cases, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("best PSNR (dB)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=110)
    plt.close(fig)
    return out_png


def recognition_figure(result, out_png) -> Path:
    """Per-subject sparse-image histograms; the predicted subject is marked."""
    plt = _plt()
    subjects = list(result.histograms)
    fig, axes = _grid_axes(plt, len(subjects),
                           f"sparse histograms (predicted: {result.predicted_subject})")
    for ax, subject in zip(axes, subjects):
        h = result.histograms[subject]
        edges = [i / h.bin_count for i in range(h.bin_count)]
        color = "tab:green" if subject == result.predicted_subject else "tab:gray"
        ax.bar(edges, h.counts, width=1.0 / h.bin_count, align="edge",
               color=color)
        ax.set_xlim(0.0, 1.0)
        ax.set_title(subject, fontsize=9)
        ax.set_xlabel("data value")
        ax.set_ylabel("pixels")
    for ax in axes[len(subjects):]:
        ax.axis("off")
    fig.tight_layout(rect=(0, 0, 1, 0.95))
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=110)
    plt.close(fig)
    return out_png
