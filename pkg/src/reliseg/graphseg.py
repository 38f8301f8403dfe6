"""Minimal-path boundary extraction on the 8-connected pixel graph.

Edge ``v -> u`` costs ``w(v) * d(v, u) + (1 - w(v)) * E_ext(v) + tie_epsilon``
where ``d`` is 1 for axis neighbours and sqrt(2) for diagonals and
``E_ext = 1 - |grad I| / max |grad I|``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import _search
from .imagegrid import ImageGrid, gradient_magnitude, save_image
from .reliability import ReliabilityBundle, SpectralWindow, reliability_bundle

Point = tuple[int, int]
DEFAULT_TIE_EPSILON = 1e-9


def external_map(img: ImageGrid) -> ImageGrid:
    """``1 - |grad I| / max |grad I|``; all ones when the image is flat."""
    mag = gradient_magnitude(img)
    peak = mag.max()
    if peak <= 0:
        return ImageGrid(np.ones_like(mag))
    return ImageGrid(np.clip(1.0 - mag / peak, 0.0, 1.0))


@dataclass(frozen=True)
class PixelGraph:
    """Implicit grid graph. ``weight`` is a scalar in [0, 1] or a per-pixel map."""

    external: ImageGrid
    weight: Union[float, ImageGrid] = 0.5
    tie_epsilon: float = DEFAULT_TIE_EPSILON
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ext = self.external.data
        if ext.min() < 0.0 or ext.max() > 1.0:
            raise ValueError("external costs must lie in [0, 1]")
        if not self.tie_epsilon > 0:
            raise ValueError("tie_epsilon must be strictly positive")
        if isinstance(self.weight, ImageGrid):
            if self.weight.shape != self.external.shape:
                raise ValueError(
                    f"weight map {self.weight.shape} does not match image {self.external.shape}")
            wmap = self.weight.data
        else:
            wmap = np.full(ext.shape, float(self.weight))
        if wmap.min() < 0.0 or wmap.max() > 1.0:
            raise ValueError("weight out of [0,1]")
        object.__setattr__(self, "_weights", np.ascontiguousarray(wmap))

    @classmethod
    def from_image(cls, img: ImageGrid, weight=0.5, tie_epsilon=DEFAULT_TIE_EPSILON):
        return cls(external_map(img), weight, tie_epsilon)

    @property
    def width(self) -> int:
        return self.external.width

    @property
    def height(self) -> int:
        return self.external.height

    def weight_at(self, p: Point) -> float:
        return float(self._weights[p[1], p[0]])

    def contains(self, p: Point) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height


@dataclass(frozen=True)
class ContourPath:
    points: list[Point]
    total_cost: float

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(-1, 2)


def step_length(a: Point, b: Point) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    if max(dx, dy) != 1:
        raise ValueError(f"{a} and {b} are not 8-neighbours")
    return math.sqrt(2.0) if dx and dy else 1.0


def edge_cost(g: PixelGraph, src: Point, dst: Point) -> float:
    for p in (src, dst):
        if not g.contains(p):
            raise ValueError(f"pixel {p} out of bounds for {g.width}x{g.height}")
    d = step_length(src, dst)
    w = g.weight_at(src)
    e = float(g.external.data[src[1], src[0]])
    return e + w * (d - e) + g.tie_epsilon


def path_cost(g: PixelGraph, points: Sequence[Point]) -> float:
    return sum(edge_cost(g, a, b) for a, b in zip(points[:-1], points[1:]))


def _check_anchor(g: PixelGraph, p: Point, name: str) -> Point:
    p = (int(p[0]), int(p[1]))
    if not g.contains(p):
        raise ValueError(f"{name} anchor {p} out of bounds for {g.width}x{g.height}")
    return p


def _trace(pred: np.ndarray, end: int) -> list[int]:
    nodes = [end]
    while pred[nodes[-1]] >= 0:
        nodes.append(int(pred[nodes[-1]]))
    nodes.reverse()
    return nodes


def shortest_path(g: PixelGraph, start: Point, end: Point) -> ContourPath:
    """Minimal-cost 8-connected path from ``start`` to ``end`` (both ``(x, y)``)."""
    start = _check_anchor(g, start, "start")
    end = _check_anchor(g, end, "end")
    if start == end:
        raise ValueError("start and end anchors coincide")
    w = g.width
    s = start[1] * w + start[0]
    e = end[1] * w + end[0]
    dist, pred = _search.pixel_dijkstra(
        np.ascontiguousarray(g.external.data), g._weights, float(g.tie_epsilon), s, e)
    if not np.isfinite(dist[e]):
        raise RuntimeError(f"end anchor {end} unreachable from {start}")
    nodes = _trace(pred, e)
    points = [(n % w, n // w) for n in nodes]
    return ContourPath(points, float(dist[e]))


def segment_adaptive(img: ImageGrid, cfg: SpectralWindow, start: Point, end: Point,
                     tie_epsilon: float = DEFAULT_TIE_EPSILON):
    """Segment with the per-pixel weight ``w = 1 - (1 - N) G``.

    Returns ``(path, bundle)``.
    """
    bundle: ReliabilityBundle = reliability_bundle(img, cfg)
    g = PixelGraph(external_map(img), bundle.weight, tie_epsilon)
    return shortest_path(g, start, end), bundle


def segment_fixed(img: ImageGrid, weight: float, start: Point, end: Point,
                  tie_epsilon: float = DEFAULT_TIE_EPSILON) -> ContourPath:
    return shortest_path(PixelGraph(external_map(img), float(weight), tie_epsilon), start, end)


# --------------------------------------------------------------------------
# export

def write_contour_csv(path, points, weights=None) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        if weights is None:
            out.writerow(["x", "y"])
            out.writerows((x, y) for x, y in points)
        else:
            out.writerow(["x", "y", "w"])
            out.writerows((x, y, repr(float(wv))) for (x, y), wv in zip(points, weights))


def read_contour_csv(path) -> list[Point]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not {"x", "y"} <= set(rows[0]):
        raise ValueError(f"{path}: contour CSV needs x,y columns")
    return [(int(r["x"]), int(r["y"])) for r in rows]


def overlay(img: ImageGrid, points, values=None) -> ImageGrid:
    """Copy of ``img`` with path pixels set to 1.0, or to ``values`` per point."""
    out = np.array(img.data)
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    out[pts[:, 1], pts[:, 0]] = 1.0 if values is None else np.asarray(values, dtype=np.float64)
    return ImageGrid(out)


def write_overlay(path, img: ImageGrid, points, values=None) -> None:
    save_image(overlay(img, points, values), Path(path), "pgm")
