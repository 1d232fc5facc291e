"""Benchmark orchestration: sweeps, comparison reports, end-to-end runs.

A sweep runs every (case, solver, p, param) cell of a dataset, scoring
each recovered low-rank stack against the clean ground truth (or, for
datasets without ground truth, against the inputs themselves, flagged
``reference=input`` in the sweep metadata).  Results go to a detail CSV
with the fixed header

    dataset,case,subject,solver,p,param_value,rank,psnr_db,ssim,iterations,converged

plus a ``*_summary.csv`` holding, per (case, solver, p), the row with
the best PSNR.  All floats use 6 significant digits and infinite PSNR
serializes as "inf", so identical runs produce byte-identical files.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imaging import (ImageStack, load_image, resize_bilinear, save_image,
                      stack, unstack)
from .metrics import stack_quality
from .recognition import (DEFAULT_BINS, RecognitionResult, recognize,
                          write_histogram_csv)
from .solvers import SOLVERS, SolverConfig, SolverError, decompose
from .synth import SyntheticCase, load_dataset

CSV_HEADER = ["dataset", "case", "subject", "solver", "p", "param_value",
              "rank", "psnr_db", "ssim", "iterations", "converged"]

IMAGE_SUFFIXES = (".png", ".pgm")


@dataclass(frozen=True)
class CaseResult:
    """One sweep cell; shape of one detail-CSV row."""

    dataset: str
    case: str
    subject: str
    solver: str
    p: float
    param_value: float
    rank: int
    psnr_db: float
    ssim: float
    iterations: int
    converged: bool


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def result_row(r: CaseResult) -> list:
    return [_fmt(getattr(r, name)) for name in CSV_HEADER]


def write_results_csv(results, path) -> None:
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for r in results:
            writer.writerow(result_row(r))


def read_results_csv(path):
    """Parse a detail or summary CSV back into CaseResult records."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such sweep CSV: {path}")
    results = []
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        for row in reader:
            d = dict(zip(CSV_HEADER, row))
            results.append(CaseResult(
                dataset=d["dataset"], case=d["case"], subject=d["subject"],
                solver=d["solver"], p=float(d["p"]),
                param_value=float(d["param_value"]), rank=int(d["rank"]),
                psnr_db=float(d["psnr_db"]), ssim=float(d["ssim"]),
                iterations=int(d["iterations"]),
                converged=d["converged"] == "true"))
    return results


def load_cases(root):
    """Load benchmark cases from a dataset directory.

    A directory with a manifest.json is a synthetic dataset with clean
    ground truth.  Otherwise every subdirectory holding images becomes
    one case whose reference is the input itself ("reference=input"),
    and a bare directory of images becomes a single such case.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"no such dataset directory: {root}")
    if (root / "manifest.json").is_file():
        _, cases = load_dataset(root)
        return cases, "clean"

    def images_in(d):
        return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)

    subdirs = sorted(d for d in root.iterdir() if d.is_dir() and images_in(d))
    groups = [(d.name, images_in(d)) for d in subdirs]
    if not groups:
        files = images_in(root)
        if not files:
            raise FileNotFoundError(f"no images found under {root}")
        groups = [(root.name, files)]
    cases = []
    for name, files in groups:
        images = [load_image(p) for p in files]
        cases.append(SyntheticCase(
            dataset=root.name, case=name, subject=name,
            clean_images=images, occluded_images=images,
            occlusion_masks=[np.zeros_like(images[0]) for _ in images],
            seed=0))
    return cases, "input"


def default_grid(matrix, solver: str, points: int = 16) -> np.ndarray:
    """16 log-spaced points around the solver's natural parameter scale.

    rpca sweeps lambda around 1/sqrt(max(m, n)); the weighted solvers
    sweep the weight scale C around sigma1(M)/sqrt(m*n), which puts the
    strongest singular value's weight near 1.
    """
    m, n = matrix.shape
    if solver == "rpca":
        anchor = 1.0 / math.sqrt(max(m, n))
    else:
        sigma1 = float(np.linalg.svd(matrix, compute_uv=False)[0])
        anchor = sigma1 / math.sqrt(m * n) if sigma1 > 0 else 1.0
    return np.geomspace(0.1 * anchor, 10.0 * anchor, points)


def _cell_config(solver: str, p: float, param: float,
                 tol: float, max_iter: int) -> SolverConfig:
    if solver == "rpca":
        return SolverConfig(solver=solver, lam=param, tol=tol, max_iter=max_iter)
    return SolverConfig(solver=solver, p=p, c_weight=param, lam="auto",
                        tol=tol, max_iter=max_iter)


def run_cell(case: SyntheticCase, matrix, solver: str, p: float,
             param: float, tol: float = 1e-7, max_iter: int = 500) -> CaseResult:
    """Solve one sweep cell and score it; failures become converged=false rows."""
    h, w = case.clean_images[0].shape
    cfg = _cell_config(solver, p, param, tol, max_iter)
    try:
        dec = decompose(matrix, cfg)
        recovered = unstack(ImageStack(width=w, height=h,
                                       count=matrix.shape[1],
                                       matrix=dec.low_rank))
        score = stack_quality(case.clean_images, recovered)
        return CaseResult(
            dataset=case.dataset, case=case.case, subject=case.subject,
            solver=solver, p=p, param_value=float(param),
            rank=dec.rank_estimate, psnr_db=score.psnr_db, ssim=score.ssim,
            iterations=dec.iterations, converged=dec.converged)
    except SolverError as exc:
        return CaseResult(
            dataset=case.dataset, case=case.case, subject=case.subject,
            solver=solver, p=p, param_value=float(param),
            rank=0, psnr_db=math.nan, ssim=math.nan,
            iterations=exc.iteration or 0, converged=False)


def summarize(results):
    """Best-PSNR row per (dataset, case, subject, solver, p), detail order."""
    best = {}
    order = []
    for r in results:
        key = (r.dataset, r.case, r.subject, r.solver, r.p)
        if key not in best:
            order.append(key)
            best[key] = r
        elif _better_psnr(r, best[key]):
            best[key] = r
    return [best[k] for k in order]


def _better_psnr(a: CaseResult, b: CaseResult) -> bool:
    if math.isnan(a.psnr_db):
        return False
    if math.isnan(b.psnr_db):
        return True
    return a.psnr_db > b.psnr_db


def sweep(dataset, solver: str, p_values=None, param_grid=None,
          out_path=None, threads: int = 1, grid_points: int = 16,
          tol: float = 1e-7, max_iter: int = 500):
    """Run the full sweep of a dataset and write detail + summary CSVs.

    Returns (results, summary_rows).  ``param_grid`` overrides the
    per-case default grid with explicit absolute values.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    cases, reference = load_cases(dataset)
    if solver == "rpca":
        p_values = [1.0]
    elif not p_values:
        p_values = [0.8]

    cells = []
    for case in cases:
        matrix = stack(case.occluded_images).matrix
        grid = np.asarray(param_grid, dtype=float) if param_grid is not None \
            else default_grid(matrix, solver, grid_points)
        if grid.size == 0:
            raise ValueError("parameter grid is empty")
        for p in p_values:
            for param in grid:
                cells.append((case, matrix, solver, p, float(param)))

    def run(args):
        return run_cell(args[0], args[1], args[2], args[3], args[4],
                        tol=tol, max_iter=max_iter)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]

    summary = summarize(results)
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_results_csv(results, out_path)
        write_results_csv(summary, summary_path(out_path))
        meta = {
            "dataset": str(dataset), "solver": solver,
            "p_values": [float(p) for p in p_values],
            "grid_points": int(grid_points),
            "explicit_grid": None if param_grid is None
                             else [float(g) for g in param_grid],
            "tol": tol, "max_iter": max_iter, "reference": reference,
        }
        with out_path.with_suffix(out_path.suffix + ".meta.json").open("w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")
    return results, summary


def summary_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + "_summary" + out_path.suffix)


def solver_label(solver: str, p: float) -> str:
    if solver == "rpca":
        return "rpca"
    return f"{solver}(p={format(p, '.6g')})"


COMPARE_HEADER = ["dataset", "case", "subject", "label", "best_psnr_db",
                  "rank", "best_ssim", "delta_psnr_vs_rpca", "flag"]


def compare_report(sweep_csvs, out_path=None):
    """Merge sweep CSVs into a per-case best-result comparison.

    One row per (case, subject, solver-label) with the best PSNR, its
    rank, the best SSIM and the PSNR delta against rpca; a trailing
    ``__median__`` row per label carries the across-case medians.  Rows
    where wsnm at p=0.8 falls below rpca are flagged.  Case sets that do
    not match across inputs are intersected.
    """
    per_label = {}
    for path in sweep_csvs:
        for r in read_results_csv(path):
            if math.isnan(r.psnr_db):
                continue
            label = solver_label(r.solver, r.p)
            case_key = (r.dataset, r.case, r.subject)
            slot = per_label.setdefault(label, {}).setdefault(
                case_key, {"best": r, "best_ssim": r.ssim})
            if _better_psnr(r, slot["best"]):
                slot["best"] = r
            slot["best_ssim"] = max(slot["best_ssim"], r.ssim)

    if len(per_label) < 2:
        raise ValueError("compare needs sweep results for at least two solvers")

    labels = sorted(per_label)
    case_sets = [set(per_label[lab]) for lab in labels]
    common = sorted(set.intersection(*case_sets))
    dropped = sorted(set.union(*case_sets) - set(common))
    if not common:
        raise ValueError("compare inputs share no common cases")

    rows = []
    deltas = {lab: [] for lab in labels}
    for case_key in common:
        rpca_best = per_label.get("rpca", {}).get(case_key)
        for lab in labels:
            slot = per_label[lab][case_key]
            best = slot["best"]
            delta = math.nan
            if rpca_best is not None:
                delta = best.psnr_db - rpca_best["best"].psnr_db
            flag = ""
            if lab == "wsnm(p=0.8)" and rpca_best is not None and delta < 0:
                flag = "below_rpca"
            rows.append([best.dataset, best.case, best.subject, lab,
                         _fmt(best.psnr_db), _fmt(best.rank),
                         _fmt(slot["best_ssim"]), _fmt(delta), flag])
            if not math.isnan(delta):
                deltas[lab].append(delta)
    for lab in labels:
        med = float(np.median(deltas[lab])) if deltas[lab] else math.nan
        med_psnr = float(np.median(
            [per_label[lab][k]["best"].psnr_db for k in common]))
        rows.append(["", "__median__", "", lab, _fmt(med_psnr), "",
                     "", _fmt(med), ""])

    if out_path is not None:
        with Path(out_path).open("w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(COMPARE_HEADER)
            writer.writerows(rows)
    return rows, dropped


def find_images(inputs):
    """Expand a mix of image paths and directories into a sorted file list."""
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(q for q in p.iterdir()
                                if q.suffix.lower() in IMAGE_SUFFIXES))
        elif p.is_file():
            paths.append(p)
        else:
            raise FileNotFoundError(f"no such image or directory: {p}")
    if not paths:
        raise FileNotFoundError("no input images found")
    return paths


def _load_ingest(path, resize):
    img = load_image(path)
    if resize is not None:
        img = resize_bilinear(img, resize[0], resize[1])
    return img


def run_decompose(inputs, cfg: SolverConfig, out_dir, resize=None):
    """Decompose a set of images and write low-rank/sparse versions.

    Sparse images are saved through the display transform (0 maps to
    mid-gray 0.5).  ``resize`` is an optional (width, height) applied on
    load.  A run manifest records the config and diagnostics.
    """
    from .recognition import sparse_display_transform

    paths = find_images(inputs)
    images = [_load_ingest(p, resize) for p in paths]
    stacked = stack(images)
    dec = decompose(stacked.matrix, cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    h, w = stacked.height, stacked.width
    lows = unstack(ImageStack(width=w, height=h, count=stacked.count,
                              matrix=dec.low_rank))
    for j, p in enumerate(paths):
        save_image(lows[j], out_dir / f"low_{p.stem}.png")
        sparse_img = sparse_display_transform(
            dec.sparse[:, j]).reshape(h, w)
        save_image(sparse_img, out_dir / f"sparse_{p.stem}.png")
    manifest = {
        "inputs": [str(p) for p in paths],
        "solver": cfg.solver, "lam": cfg.lam, "p": cfg.p,
        "c_weight": cfg.c_weight, "tol": cfg.tol, "max_iter": cfg.max_iter,
        "rho": cfg.rho,
        "iterations": dec.iterations, "converged": dec.converged,
        "final_residual": dec.final_residual,
        "rank_estimate": dec.rank_estimate, "sparsity": dec.sparsity,
    }
    with (out_dir / "run_manifest.json").open("w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return dec


def run_recognize(test_path, gallery_root, cfg: SolverConfig | None = None,
                  bins: int = DEFAULT_BINS, out_dir=None,
                  threads: int = 1, resize=None) -> RecognitionResult:
    """Identify the subject of a test image against gallery directories.

    ``gallery_root`` holds one subdirectory of images per subject.
    Per-subject histogram CSVs land in ``out_dir`` when given;
    ``resize`` is an optional (width, height) applied to every image.
    """
    gallery_root = Path(gallery_root)
    if not gallery_root.is_dir():
        raise FileNotFoundError(f"no such gallery root: {gallery_root}")
    galleries = []
    for d in sorted(gallery_root.iterdir()):
        if not d.is_dir():
            continue
        files = sorted(p for p in d.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        if files:
            galleries.append((d.name, [_load_ingest(p, resize) for p in files]))
    if not galleries:
        raise FileNotFoundError(f"no subject galleries under {gallery_root}")
    test = _load_ingest(test_path, resize)
    result = recognize(test, galleries, cfg=cfg, bin_count=bins,
                       threads=threads)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for subject, hist in result.histograms.items():
            write_histogram_csv(hist, out_dir / f"histogram_{subject}.csv")
    return result
