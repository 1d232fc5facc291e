"""Command-line interface.

Subcommands: synth, decompose, sweep, recognize, compare, metrics.
Flags override an optional key=value config file (--config); unknown
config keys are usage errors.  LRLAB_THREADS is the fallback for
--threads.  Exit codes: 0 success, 1 usage error, 2 I/O error,
3 numerical failure.
"""

import argparse
import os
import sys
from pathlib import Path

from .bench import (compare_report, run_decompose, run_recognize, summary_path,
                    sweep)
from .imaging import ImageFormatError, UnsupportedImageError, load_image
from .linalg import NumericalError
from .metrics import quality
from .solvers import SOLVERS, SolverConfig
from .synth import OCCLUSION_KINDS, synth_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad usage; we reserve 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


CONFIG_KEYS = {
    "solver": str,
    "p": str,             # comma-separated list
    "lambda": str,
    "c": float,
    "tol": float,
    "max-iter": int,
    "seed": int,
    "bins": int,
    "threads": int,
    "grid-points": int,
}


def read_config_file(path) -> dict:
    """Parse key=value lines; '#' starts a comment, blank lines ignored."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such config file: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value.strip())
        except ValueError:
            raise UsageError(
                f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from None
    return values


def _parse_lambda(text):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"--lambda must be a number or 'auto', got {text!r}") from None
    return value


def _parse_p_list(text):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad p list: {text!r}") from None


def _parse_resize(text):
    if text is None:
        return None
    try:
        w, _, h = text.lower().partition("x")
        return int(w), int(h)
    except ValueError:
        raise UsageError(f"--resize expects WxH, got {text!r}") from None


def _add_solver_flags(sp):
    sp.add_argument("--solver", choices=SOLVERS, default=None)
    sp.add_argument("--p", action="append", type=float, default=None,
                    metavar="P", help="Schatten exponent; repeatable")
    sp.add_argument("--lambda", dest="lam", default=None, metavar="L",
                    help="l1 trade-off, number or 'auto'")
    sp.add_argument("--c", dest="c_weight", type=float, default=None,
                    metavar="C", help="weight scale for wnnm/wsnm")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=None)


def _add_common_flags(sp):
    sp.add_argument("--config", default=None, metavar="FILE",
                    help="key=value config file; flags override it")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--no-figures", action="store_true",
                    help="skip rendering figures next to CSV output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrlab",
                     description="Low-rank + sparse image decomposition lab")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--subjects", type=int, default=6)
    sp.add_argument("--images", type=int, default=11)
    sp.add_argument("--width", type=int, default=64)
    sp.add_argument("--height", type=int, default=64)
    sp.add_argument("--kind", action="append", default=None,
                    choices=list(OCCLUSION_KINDS) + ["all"],
                    help="occlusion kind; repeatable; default all")
    sp.add_argument("--mask-scale", type=float, default=1.0)
    sp.add_argument("--clean-rank", type=int, default=3,
                    help="rank target of each subject's clean stack")
    _add_common_flags(sp)

    sp = sub.add_parser("decompose", help="decompose images into low-rank + sparse")
    sp.add_argument("inputs", nargs="+", help="image files or a directory")
    sp.add_argument("--out", required=True)
    sp.add_argument("--resize", default=None, metavar="WxH",
                    help="bilinear-resize inputs on load, e.g. 64x64")
    _add_solver_flags(sp)
    _add_common_flags(sp)

    sp = sub.add_parser("sweep", help="hyperparameter sweep over a dataset")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--out", required=True, help="detail CSV path")
    sp.add_argument("--grid", default=None,
                    help="comma-separated absolute parameter values")
    sp.add_argument("--grid-points", type=int, default=None)
    _add_solver_flags(sp)
    _add_common_flags(sp)

    sp = sub.add_parser("recognize", help="identify a test image's subject")
    sp.add_argument("--test", required=True)
    sp.add_argument("--gallery", required=True,
                    help="directory with one subdirectory per subject")
    sp.add_argument("--bins", type=int, default=None)
    sp.add_argument("--out", default=None, help="directory for histogram CSVs")
    sp.add_argument("--resize", default=None, metavar="WxH",
                    help="bilinear-resize all images on load")
    _add_solver_flags(sp)
    _add_common_flags(sp)

    sp = sub.add_parser("compare", help="merge sweep CSVs into a comparison report")
    sp.add_argument("sweeps", nargs="+", help="sweep detail CSVs")
    sp.add_argument("--out", required=True)
    _add_common_flags(sp)

    sp = sub.add_parser("metrics", help="PSNR/SSIM of test images vs a reference")
    sp.add_argument("--reference", required=True)
    sp.add_argument("tests", nargs="+")
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
    _add_common_flags(sp)

    return parser


def _merged(args, key, file_cfg, default):
    """CLI flag > config file > built-in default."""
    cli = getattr(args, key.replace("-", "_"), None)
    if cli not in (None, []):
        return cli
    if file_cfg and key in file_cfg:
        return file_cfg[key]
    return default


def _solver_config(args, file_cfg) -> SolverConfig:
    solver = _merged(args, "solver", file_cfg, "wsnm" if args.command == "recognize"
                     else "rpca")
    p_raw = _merged(args, "p", file_cfg, None)
    if isinstance(p_raw, str):
        p_raw = _parse_p_list(p_raw)
    p = p_raw[0] if p_raw else (1.0 if solver in ("rpca", "wnnm") else 0.8)
    lam = getattr(args, "lam", None)
    if lam is None:
        lam = file_cfg.get("lambda", "auto")
    if isinstance(lam, str) and lam != "auto":
        lam = _parse_lambda(lam)
    c_weight = getattr(args, "c_weight", None)
    if c_weight is None:
        c_weight = file_cfg.get("c", 1.0)
    return SolverConfig(
        solver=solver,
        lam=lam,
        p=p,
        c_weight=c_weight,
        tol=_merged(args, "tol", file_cfg, 1e-7),
        max_iter=_merged(args, "max-iter", file_cfg, 500),
    )


def _threads(args, file_cfg) -> int:
    value = _merged(args, "threads", file_cfg, None)
    if value is None:
        env = os.environ.get("LRLAB_THREADS")
        value = int(env) if env else 1
    if value < 1:
        raise UsageError(f"--threads must be >= 1, got {value}")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        file_cfg = read_config_file(args.config) \
            if getattr(args, "config", None) else {}
        return _dispatch(args, file_cfg)
    except UsageError as exc:
        print(f"lrlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ImageFormatError, UnsupportedImageError, FileNotFoundError,
            OSError) as exc:
        print(f"lrlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"lrlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"lrlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args, file_cfg) -> int:
    if args.command == "synth":
        kinds = args.kind or ["all"]
        if "all" in kinds:
            kinds = list(OCCLUSION_KINDS)
        seed = _merged(args, "seed", file_cfg, 0)
        cases = synth_dataset(args.out, args.subjects, args.images,
                              args.width, args.height, kinds, seed,
                              mask_scale=args.mask_scale,
                              clean_rank=args.clean_rank)
        print(f"wrote {len(cases)} cases under {args.out}")
        return EXIT_OK

    if args.command == "decompose":
        cfg = _solver_config(args, file_cfg)
        dec = run_decompose(args.inputs, cfg, args.out,
                            resize=_parse_resize(args.resize))
        print(f"solver={cfg.solver} rank={dec.rank_estimate} "
              f"iterations={dec.iterations} converged={dec.converged} "
              f"residual={dec.final_residual:.3g} sparsity={dec.sparsity:.3f}")
        return EXIT_OK

    if args.command == "sweep":
        solver = _merged(args, "solver", file_cfg, "rpca")
        p_raw = _merged(args, "p", file_cfg, None)
        if isinstance(p_raw, str):
            p_raw = _parse_p_list(p_raw)
        grid = None
        if args.grid:
            try:
                grid = [float(tok) for tok in args.grid.split(",") if tok]
            except ValueError:
                raise UsageError(f"bad --grid value: {args.grid!r}") from None
        results, summary = sweep(
            args.dataset, solver, p_values=p_raw, param_grid=grid,
            out_path=args.out, threads=_threads(args, file_cfg),
            grid_points=_merged(args, "grid-points", file_cfg, 16),
            tol=_merged(args, "tol", file_cfg, 1e-7),
            max_iter=_merged(args, "max-iter", file_cfg, 500))
        print(f"swept {len(results)} cells -> {args.out} "
              f"(+ {summary_path(args.out).name})")
        if not args.no_figures:
            from .figures import sweep_figure
            fig = sweep_figure(results, Path(args.out).with_suffix(".png"),
                               title=f"{solver} sweep")
            print(f"figure -> {fig}")
        return EXIT_OK

    if args.command == "recognize":
        cfg = _solver_config(args, file_cfg)
        result = run_recognize(
            args.test, args.gallery, cfg=cfg,
            bins=_merged(args, "bins", file_cfg, 32),
            out_dir=args.out, threads=_threads(args, file_cfg),
            resize=_parse_resize(args.resize))
        print(f"predicted subject: {result.predicted_subject}")
        print(f"{'subject':<16} {'peak_score':>10} {'entropy':>9}")
        for s in sorted(result.scores, key=lambda s: (-s.peak, s.entropy)):
            print(f"{s.subject:<16} {s.peak:>10.4f} {s.entropy:>9.4f}")
        if args.out and not args.no_figures:
            from .figures import recognition_figure
            fig = recognition_figure(result, Path(args.out) / "histograms.png")
            print(f"figure -> {fig}")
        return EXIT_OK

    if args.command == "compare":
        rows, dropped = compare_report(args.sweeps, out_path=args.out)
        if dropped:
            print(f"warning: {len(dropped)} case(s) missing from some inputs "
                  f"were dropped: {', '.join('/'.join(d) for d in dropped)}",
                  file=sys.stderr)
        print(f"compared {len(rows)} rows -> {args.out}")
        if not args.no_figures:
            from .figures import compare_figure
            fig = compare_figure(rows, Path(args.out).with_suffix(".png"))
            print(f"figure -> {fig}")
        return EXIT_OK

    if args.command == "metrics":
        reference = load_image(args.reference)
        lines = [["image", "psnr_db", "ssim", "mse"]]
        for t in args.tests:
            score = quality(reference, load_image(t))
            lines.append([str(t), format(score.psnr_db, ".6g"),
                          format(score.ssim, ".6g"), format(score.mse, ".6g")])
        if args.out:
            import csv as _csv
            with Path(args.out).open("w", newline="") as f:
                _csv.writer(f).writerows(lines)
            print(f"wrote {args.out}")
        else:
            for line in lines:
                print(",".join(line))
        return EXIT_OK

    raise UsageError(f"unknown command {args.command!r}")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
