"""Hausdorff scoring, the best-fixed-weight sweep and the three-way benchmark."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .graphseg import DEFAULT_TIE_EPSILON, PixelGraph, external_map, shortest_path
from .imagegrid import ImageGrid
from .layered import DEFAULT_LEVELS, LayeredGraph, bimodality_histogram, layered_shortest_path
from .reliability import SpectralWindow, reliability_bundle
from .synth import GroundTruth, add_ramped_noise, realization_seed, with_seed

METHODS = ("adaptive", "fixed", "layered")
DEFAULT_SWEEP = tuple(round(0.05 * i, 10) for i in range(21))


def _as_points(s) -> np.ndarray:
    arr = np.asarray(s, dtype=np.float64).reshape(-1, 2)
    if arr.shape[0] == 0:
        raise ValueError("Hausdorff distance is undefined for an empty point set")
    return arr


def directed_hausdorff(a, b) -> float:
    """``max_{p in a} min_{q in b} |p - q|``, exact."""
    a, b = _as_points(a), _as_points(b)
    worst = 0.0
    for lo in range(0, a.shape[0], 2048):
        chunk = a[lo:lo + 2048]
        d2 = ((chunk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(d2.min(axis=1).max()))
    return math.sqrt(worst)


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two non-empty pixel sets."""
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


@dataclass(frozen=True)
class TrialRecord:
    method: str
    image_id: int
    seed: int
    hausdorff: float
    # best-fixed weight used, for method == "fixed"
    weight: float | None = None
    failure: str | None = None


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    errors: tuple[float, ...]
    best_w: float
    best_error: float


def fixed_weight_sweep(img: ImageGrid, truth: GroundTruth, anchors=None, grid=DEFAULT_SWEEP,
                       tie_epsilon: float = DEFAULT_TIE_EPSILON) -> SweepResult:
    """Brute-force the spatially fixed weight with the smallest error against ``truth``.

    Every grid value is evaluated; ties go to the smaller weight.
    """
    grid = tuple(sorted(float(w) for w in grid))
    if not grid:
        raise ValueError("sweep grid is empty")
    start, end = anchors if anchors is not None else truth.anchors
    ext = external_map(img)
    errors = []
    for w in grid:
        path = shortest_path(PixelGraph(ext, w, tie_epsilon), start, end)
        errors.append(hausdorff(path.points, truth.contour_pixels))
    best = int(np.argmin(errors))  # first minimum = smallest weight
    return SweepResult(grid, tuple(errors), grid[best], errors[best])


class TooFewPairsError(ValueError):
    pass


def paired_sign_test(errors_a, errors_b, min_pairs: int = 6) -> float:
    """Exact two-sided sign test on paired differences; tied pairs are dropped."""
    a = np.asarray(errors_a, dtype=np.float64)
    b = np.asarray(errors_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1D and of equal length")
    if a.size < min_pairs:
        raise TooFewPairsError(f"need at least {min_pairs} pairs, got {a.size}")
    diff = a - b
    diff = diff[np.isfinite(diff) & (diff != 0)]
    if diff.size == 0:
        raise TooFewPairsError("no untied pairs")
    if diff.size < min_pairs:
        raise TooFewPairsError(f"only {diff.size} untied pairs (need {min_pairs})")
    wins = int((diff < 0).sum())
    return float(binomtest(wins, diff.size, 0.5, alternative="two-sided").pvalue)


def _sign_p(a, b):
    try:
        return paired_sign_test(a, b)
    except TooFewPairsError:
        return None


@dataclass
class BenchmarkResult:
    records: list[TrialRecord]
    summary: dict
    layered_histograms: list[dict] = field(default_factory=list)

    def results_csv(self) -> str:
        return records_to_csv(self.records)

    def summary_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True) + "\n"


def records_to_csv(records) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["method", "image_id", "seed", "hausdorff"])
    for r in records:
        out.writerow([r.method, r.image_id, r.seed, repr(float(r.hausdorff))])
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    rows = csv.DictReader(io.StringIO(text))
    return [TrialRecord(r["method"], int(r["image_id"]), int(r["seed"]), float(r["hausdorff"]))
            for r in rows]


def summarize(records, best_w=None) -> dict:
    """Per-method mean/std and per-image paired sign tests."""
    by = {}
    for r in records:
        by.setdefault(r.method, {}).setdefault(r.image_id, {})[r.seed] = r.hausdorff
    methods = {}
    for m in METHODS:
        vals = np.array([v for img in by.get(m, {}).values() for v in img.values()], dtype=np.float64)
        ok = vals[np.isfinite(vals)]
        methods[m] = {
            "n": int(ok.size),
            "failed": int(vals.size - ok.size),
            "mean": float(ok.mean()) if ok.size else None,
            "std": float(ok.std(ddof=1)) if ok.size > 1 else None,
        }
    per_image = {}
    image_ids = sorted({r.image_id for r in records})
    for i in image_ids:
        entry = {}
        for m in METHODS:
            vals = [v for v in by.get(m, {}).get(i, {}).values() if math.isfinite(v)]
            entry[f"mean_{m}"] = float(np.mean(vals)) if vals else None
        seeds = sorted(by.get("adaptive", {}).get(i, {}))
        for other in ("fixed", "layered"):
            o = by.get(other, {}).get(i, {})
            common = [s for s in seeds if s in o]
            a = [by["adaptive"][i][s] for s in common]
            b = [o[s] for s in common]
            entry[f"p_adaptive_vs_{other}"] = _sign_p(a, b)
        if best_w is not None and i in best_w:
            entry["best_w"] = best_w[i]
        per_image[str(i)] = entry
    return {"methods": methods, "per_image": per_image}


def benchmark(corpus, realizations: int = 25, cfg: SpectralWindow = SpectralWindow(),
              levels=DEFAULT_LEVELS, sweep_grid=DEFAULT_SWEEP, family_seed: int = 0,
              tie_epsilon: float = DEFAULT_TIE_EPSILON, progress=None) -> BenchmarkResult:
    """Run adaptive, best-fixed and layered segmentation on every noisy realization.

    ``corpus`` is a sequence of ``(spec, clean, truth)``; image ids are list
    positions. The fixed weight for each image is chosen by sweeping on
    realization 0 and then reused for all realizations of that image.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    records: list[TrialRecord] = []
    best_w = {}
    hists = []
    extreme = total = 0
    violations = 0
    collapse_dev = 0.0
    for image_id, (spec, clean, truth) in enumerate(corpus):
        start, end = truth.anchors
        noisy = [add_ramped_noise(clean, with_seed(spec, realization_seed(family_seed, image_id, r)))
                 for r in range(realizations)]
        try:
            sweep = fixed_weight_sweep(noisy[0], truth, (start, end), sweep_grid, tie_epsilon)
            best_w[image_id] = sweep.best_w
        except Exception as exc:  # recorded, not dropped
            sweep = None
            best_w[image_id] = None
            sweep_failure = f"{type(exc).__name__}: {exc}"
        for r, img in enumerate(noisy):
            ext = external_map(img)

            def run(method, fn, weight=None):
                try:
                    pts = fn()
                    records.append(TrialRecord(method, image_id, r,
                                               hausdorff(pts, truth.contour_pixels), weight))
                except Exception as exc:
                    records.append(TrialRecord(method, image_id, r, float("nan"), weight,
                                               f"{type(exc).__name__}: {exc}"))

            def adaptive():
                bundle = reliability_bundle(img, cfg)
                return shortest_path(PixelGraph(ext, bundle.weight, tie_epsilon), start, end).points

            def fixed():
                if sweep is None:
                    raise RuntimeError(sweep_failure)
                return shortest_path(PixelGraph(ext, sweep.best_w, tie_epsilon), start, end).points

            def layered():
                nonlocal extreme, total, violations, collapse_dev
                lg = LayeredGraph(PixelGraph(ext, 0.0, tie_epsilon), levels, tie_epsilon)
                c = layered_shortest_path(lg, start, end)
                h = bimodality_histogram(c, lg)
                hists.append(h)
                total += sum(h.values())
                extreme += h.get(0.0, 0) + h.get(1.0, 0)
                violations += len(c.violations)
                if 0.0 in lg.levels:
                    ref = shortest_path(PixelGraph(ext, 0.0, tie_epsilon), start, end).total_cost
                    collapse_dev = max(collapse_dev, abs(ref - c.total_cost))
                return c.spatial

            run("adaptive", adaptive)
            run("fixed", fixed, best_w[image_id])
            run("layered", layered)
            if progress is not None:
                progress(image_id, r)
    summary = summarize(records, best_w)
    summary["layered"] = {
        "levels": list(levels),
        "extreme_fraction": extreme / total if total else None,
        "constraint_violations": violations,
        "max_collapsed_cost_deviation": collapse_dev,
    }
    summary["failures"] = [
        {"method": r.method, "image_id": r.image_id, "seed": r.seed, "error": r.failure}
        for r in records if r.failure]
    summary["config"] = {
        "realizations": realizations, "window": cfg.size, "stride": cfg.stride,
        "epsilon": cfg.epsilon, "median_size": cfg.median_size,
        "sweep_grid": list(sweep_grid), "tie_epsilon": tie_epsilon, "family_seed": family_seed,
    }
    return BenchmarkResult(records, summary, hists)
