"""Command line entry point: ``reliseg {reliability,segment,synth,benchmark}``.

Every subcommand accepts ``--config file.json`` whose keys are flag names
(dashes or underscores); flags given on the command line take precedence.
Exit status is 0 on success and 2 on bad usage or bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .graphseg import (PixelGraph, external_map, shortest_path, write_contour_csv,
                       write_overlay)
from .imagegrid import ImageFormatError, ImageGrid, load_image, save_image
from .layered import LayeredGraph, extreme_fraction, bimodality_histogram, layered_shortest_path, levels_for
from .metrics import METHODS, benchmark, paired_sign_test, TooFewPairsError
from .reliability import SpectralWindow, reliability_bundle
from .synth import image_dir_name, read_corpus, write_corpus


class UsageError(Exception):
    pass


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _point(text: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in str(text).split(","))
    except ValueError:
        raise UsageError(f"bad anchor {text!r}, expected x,y") from None
    return x, y


def _window(args) -> SpectralWindow:
    try:
        return SpectralWindow(size=args.window, stride=args.stride, median_size=args.median)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_mode(mode: str):
    if mode in ("adaptive", "layered"):
        return mode, None
    if mode.startswith("fixed:"):
        try:
            w = float(mode.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad fixed weight in mode {mode!r}") from None
        if not 0.0 <= w <= 1.0:
            raise UsageError("weight out of [0,1]")
        return "fixed", w
    raise UsageError(f"unknown mode {mode!r}; use adaptive, fixed:<w> or layered")


def _load(path) -> ImageGrid:
    try:
        return load_image(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except ImageFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _prefix_path(prefix: str, suffix: str) -> Path:
    p = Path(prefix + suffix)
    if not p.parent.is_dir():
        raise UsageError(f"output directory {p.parent} does not exist")
    return p


# --------------------------------------------------------------------------
# subcommands

def cmd_reliability(args) -> int:
    cfg = _window(args)
    img = _load(args.input)
    if img.width < cfg.size or img.height < cfg.size:
        raise UsageError(f"image {img.width}x{img.height} smaller than window {cfg.size}")
    _prefix_path(args.out_prefix, "_meta.json")
    bundle = reliability_bundle(img, cfg)
    maps = {"N": bundle.noise, "G": bundle.edge, "R": bundle.reliability, "w": bundle.weight}
    for tag, grid in maps.items():
        save_image(grid, _prefix_path(args.out_prefix, f"_{tag}.pgm"))
        save_image(grid, _prefix_path(args.out_prefix, f"_{tag}.rmap"))
    _write_json(_prefix_path(args.out_prefix, "_meta.json"), {
        "command": "reliability", "version": __version__, "input": str(args.input),
        "window": cfg.size, "stride": cfg.stride, "epsilon": cfg.epsilon,
        "median": cfg.median_size, "width": img.width, "height": img.height,
    })
    return 0


def cmd_segment(args) -> int:
    mode, w = _parse_mode(args.mode)
    if args.start is None or args.end is None:
        raise UsageError("--start and --end are required")
    start, end = _point(args.start), _point(args.end)
    cfg = _window(args) if mode == "adaptive" else None
    if mode == "layered":
        try:
            levels = levels_for(args.levels)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    img = _load(args.input)
    for name, p in (("start", start), ("end", end)):
        if not (0 <= p[0] < img.width and 0 <= p[1] < img.height):
            raise UsageError(f"{name} anchor {p} out of bounds for {img.width}x{img.height}")
    if start == end:
        raise UsageError("start and end anchors coincide")
    if cfg is not None and (img.width < cfg.size or img.height < cfg.size):
        raise UsageError(f"image {img.width}x{img.height} smaller than window {cfg.size}")
    csv_path = _prefix_path(args.out_prefix, "_contour.csv")
    meta = {"command": "segment", "version": __version__, "input": str(args.input),
            "mode": args.mode, "start": list(start), "end": list(end)}

    ext = external_map(img)
    if mode == "layered":
        lg = LayeredGraph(PixelGraph(ext, 0.0), levels)
        c = layered_shortest_path(lg, start, end)
        weights = c.weights(lg.levels)
        write_contour_csv(csv_path, c.spatial, weights)
        write_overlay(_prefix_path(args.out_prefix, "_overlay.pgm"), img, c.spatial)
        write_overlay(_prefix_path(args.out_prefix, "_weights.pgm"), img, c.spatial, weights)
        meta.update(levels=list(lg.levels), total_cost=c.total_cost,
                    extreme_fraction=extreme_fraction(bimodality_histogram(c, lg)),
                    constraint_violations=[list(p) for p in c.violations])
        if c.violations:
            print(f"warning: layered path revisits {len(c.violations)} pixel(s)", file=sys.stderr)
    else:
        if mode == "adaptive":
            bundle = reliability_bundle(img, cfg)
            graph = PixelGraph(ext, bundle.weight)
            meta.update(window=cfg.size, stride=cfg.stride, median=cfg.median_size)
        else:
            graph = PixelGraph(ext, w)
            meta.update(weight=w)
        path = shortest_path(graph, start, end)
        write_contour_csv(csv_path, path.points)
        write_overlay(_prefix_path(args.out_prefix, "_overlay.pgm"), img, path.points)
        if mode == "adaptive":
            wvals = [graph.weight_at(p) for p in path.points]
            write_overlay(_prefix_path(args.out_prefix, "_weights.pgm"), img, path.points, wvals)
        meta.update(total_cost=path.total_cost, length=len(path))
    _write_json(_prefix_path(args.out_prefix, "_meta.json"), meta)
    return 0


def cmd_synth(args) -> int:
    if args.realizations < 0:
        raise UsageError("--realizations must be >= 0")
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_corpus(out, args.family_seed, args.realizations)
        _write_json(out / "corpus_meta.json", {
            "command": "synth", "version": __version__, "family_seed": args.family_seed,
            "realizations": args.realizations, "images": 16,
        })
    except OSError as exc:
        raise UsageError(f"cannot write corpus to {out}: {exc}") from None
    return 0


def _load_corpus(corpus_dir: Path):
    if not corpus_dir.is_dir():
        raise UsageError(f"corpus directory {corpus_dir} does not exist")
    try:
        entries = read_corpus(corpus_dir)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed corpus: {exc}") from None
    ids = [e[0] for e in entries]
    if ids != list(range(len(ids))):
        raise UsageError(f"malformed corpus: image ids {ids} are not 0..{len(ids) - 1}")
    seeds = {e[1] for e in entries}
    if len(seeds) != 1:
        raise UsageError("malformed corpus: mixed family seeds")
    for image_id, _, spec, clean, _, _ in entries:
        stored = _load(corpus_dir / image_dir_name(image_id) / "clean.pgm")
        if stored.shape != clean.shape or np.abs(stored.data - clean.data).max() > 0.5 / 255 + 1e-9:
            raise UsageError(f"malformed corpus: clean.pgm of image {image_id} does not match spec.json")
    return entries


def cmd_benchmark(args) -> int:
    cfg = _window(args)
    try:
        levels = levels_for(args.levels)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    entries = _load_corpus(Path(args.corpus_dir))
    realizations = args.realizations
    if realizations is None:
        realizations = min(e[5] for e in entries)
    if realizations < 1:
        raise UsageError("corpus has no noisy realizations; rerun synth with --realizations >= 1")
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {out}: {exc}") from None

    corpus = [(spec, clean, truth) for _, _, spec, clean, truth, _ in entries]

    def progress(image_id, r):
        if args.verbose:
            print(f"image {image_id} realization {r}", file=sys.stderr)

    result = benchmark(corpus, realizations, cfg, levels, family_seed=entries[0][1], progress=progress)
    summary = result.summary
    summary["pooled"] = _pooled_tests(result.records)
    (out / "results.csv").write_text(result.results_csv())
    _write_json(out / "summary.json", summary)
    _write_json(out / "benchmark_meta.json", {
        "command": "benchmark", "version": __version__, "corpus_dir": str(args.corpus_dir),
        "window": cfg.size, "stride": cfg.stride, "median": cfg.median_size,
        "levels": list(levels), "realizations": realizations,
    })
    print(format_table(summary))
    return 0


def _pooled_tests(records) -> dict:
    by = {}
    for r in records:
        by[(r.method, r.image_id, r.seed)] = r.hausdorff
    keys = sorted((i, s) for m, i, s in by if m == "adaptive")
    out = {}
    for other in ("fixed", "layered"):
        paired = [(i, s) for i, s in keys if (other, i, s) in by]
        a = [by[("adaptive", i, s)] for i, s in paired]
        b = [by[(other, i, s)] for i, s in paired]
        try:
            out[f"p_adaptive_vs_{other}"] = paired_sign_test(a, b)
        except TooFewPairsError:
            out[f"p_adaptive_vs_{other}"] = None
    return out


def format_table(summary: dict) -> str:
    lines = [f"{'method':<10}{'mean':>10}{'std':>10}{'p':>12}"]
    pooled = summary.get("pooled", {})
    for m in METHODS:
        s = summary["methods"][m]
        mean = "nan" if s["mean"] is None else f"{s['mean']:.3f}"
        std = "nan" if s["std"] is None else f"{s['std']:.3f}"
        p = pooled.get(f"p_adaptive_vs_{m}")
        ptxt = "-" if m == "adaptive" else ("n/a" if p is None else f"{p:.3g}")
        lines.append(f"{m:<10}{mean:>10}{std:>10}{ptxt:>12}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# parser

def _add_window_flags(p):
    p.add_argument("--window", type=int, default=16, help="spectral window size (power of two)")
    p.add_argument("--stride", type=int, default=None, help="window stride (default window/2)")
    p.add_argument("--median", type=int, default=0, help="median filter size for the noise map, 0 = off")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reliseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reliability", help="write N, G, R and w maps for an image")
    p.add_argument("--config")
    p.add_argument("--input", required=False)
    p.add_argument("--out-prefix", required=False)
    _add_window_flags(p)
    p.set_defaults(func=cmd_reliability, required=("input", "out_prefix"))

    p = sub.add_parser("segment", help="extract a minimal-cost contour between two anchors")
    p.add_argument("--config")
    p.add_argument("--input")
    p.add_argument("--start", help="x,y")
    p.add_argument("--end", help="x,y")
    p.add_argument("--mode", default="adaptive", help="adaptive | fixed:<w> | layered")
    p.add_argument("--levels", type=int, default=11, help="weight levels for layered mode")
    p.add_argument("--out-prefix")
    _add_window_flags(p)
    p.set_defaults(func=cmd_segment, required=("input", "out_prefix"))

    p = sub.add_parser("synth", help="generate the 16-image synthetic corpus")
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.add_argument("--family-seed", type=int, default=0)
    p.add_argument("--realizations", type=int, default=25)
    p.set_defaults(func=cmd_synth, required=("out_dir",))

    p = sub.add_parser("benchmark", help="adaptive vs best-fixed vs layered on a corpus")
    p.add_argument("--config")
    p.add_argument("--corpus-dir")
    p.add_argument("--out-dir")
    p.add_argument("--levels", type=int, default=11, help="K weight levels for the layered baseline")
    p.add_argument("--realizations", type=int, default=None,
                   help="realizations per image (default: noisy files present)")
    p.add_argument("-v", "--verbose", action="store_true")
    _add_window_flags(p)
    p.set_defaults(func=cmd_benchmark, required=("corpus_dir", "out_dir"))
    return parser


def _apply_config(parser, argv):
    """Parse twice so that config-file values become defaults under the flags."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            conf = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(conf, dict):
            raise UsageError("config file must hold a JSON object")
        conf = {k.replace("-", "_"): v for k, v in conf.items()}
        known = set(vars(args))
        unknown = set(conf) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**conf)
        args = parser.parse_args(argv)
    missing = [k for k in args.required if getattr(args, k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code not in (0, None) else 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
