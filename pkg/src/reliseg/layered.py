"""Joint optimisation of contour and per-pixel weight on a layered graph.

Every pixel is replicated once per weight level. A path through the
layered graph picks a contour and, at each contour pixel, the level used on
the edge leaving it. This is the globally optimal weighting baseline; since
edge cost is linear in the weight, the chosen levels collapse onto 0 and 1.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import _search
from .graphseg import DEFAULT_TIE_EPSILON, PixelGraph, Point, _check_anchor

DEFAULT_LEVELS = tuple(round(0.1 * i, 10) for i in range(11))


@dataclass(frozen=True)
class LayeredGraph:
    base: PixelGraph
    levels: tuple[float, ...] = DEFAULT_LEVELS
    tie_epsilon: float = DEFAULT_TIE_EPSILON

    def __post_init__(self):
        lv = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "levels", lv)
        if not lv:
            raise ValueError("at least one weight level is required")
        if any(not 0.0 <= v <= 1.0 for v in lv):
            raise ValueError("weight levels must lie in [0, 1]")
        if any(b <= a for a, b in zip(lv[:-1], lv[1:])):
            raise ValueError("weight levels must be strictly increasing")
        if not self.tie_epsilon > 0:
            raise ValueError("tie_epsilon must be strictly positive")

    @property
    def K(self) -> int:
        return len(self.levels)


def levels_for(k: int) -> tuple[float, ...]:
    """``k`` evenly spaced levels over [0, 1] (``k >= 2``)."""
    if k < 2:
        raise ValueError("need at least 2 levels to span [0, 1]")
    return tuple(float(v) for v in np.linspace(0.0, 1.0, k))


@dataclass(frozen=True)
class WeightedContour:
    points: list[tuple[int, int, int]]
    total_cost: float
    # pixels visited more than once on different levels, empty when valid
    violations: tuple[Point, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def spatial(self) -> list[Point]:
        return [(x, y) for x, y, _ in self.points]

    def weights(self, levels) -> list[float]:
        return [levels[k] for _, _, k in self.points]


def layered_shortest_path(g: LayeredGraph, start: Point, end: Point) -> WeightedContour:
    """Globally optimal ``(x, y, w)`` path between two anchor pixels.

    Start and end levels are free. The one-weight-per-pixel constraint is
    checked on the result; any revisited pixel is reported in
    ``violations`` rather than silently accepted.
    """
    base = g.base
    start = _check_anchor(base, start, "start")
    end = _check_anchor(base, end, "end")
    if start == end:
        raise ValueError("start and end anchors coincide")
    w = base.width
    K = g.K
    s = start[1] * w + start[0]
    e = end[1] * w + end[0]
    end_node, dist, pred = _search.layered_dijkstra(
        np.ascontiguousarray(base.external.data), np.array(g.levels), float(g.tie_epsilon), s, e)
    if end_node < 0:
        raise RuntimeError(f"end anchor {end} unreachable from {start}")
    nodes = [int(end_node)]
    while pred[nodes[-1]] >= 0:
        nodes.append(int(pred[nodes[-1]]))
    nodes.reverse()
    points = []
    for node in nodes:
        p, k = divmod(node, K)
        points.append((p % w, p // w, k))
    seen = Counter((x, y) for x, y, _ in points)
    violations = tuple(sorted(p for p, c in seen.items() if c > 1))
    return WeightedContour(points, float(dist[end_node]), violations)


def weighted_path_cost(g: LayeredGraph, c: WeightedContour) -> float:
    """Recompute a contour's cost from its points and chosen levels."""
    ext = g.base.external.data
    total = 0.0
    for (x0, y0, k), (x1, y1, _) in zip(c.points[:-1], c.points[1:]):
        dx, dy = abs(x1 - x0), abs(y1 - y0)
        if max(dx, dy) != 1:
            raise ValueError(f"({x0},{y0}) and ({x1},{y1}) are not 8-neighbours")
        d = np.sqrt(2.0) if dx and dy else 1.0
        wk = g.levels[k]
        e = ext[y0, x0]
        total += e + wk * (d - e) + g.tie_epsilon
    return float(total)


def bimodality_histogram(c: WeightedContour, g: LayeredGraph) -> dict[float, int]:
    """Count of contour points per weight level (every level present, possibly 0)."""
    counts = Counter(k for _, _, k in c.points)
    return {lv: counts.get(i, 0) for i, lv in enumerate(g.levels)}


def extreme_fraction(hist: dict[float, int]) -> float:
    """Share of the histogram mass sitting on levels 0 and 1."""
    total = sum(hist.values())
    if total == 0:
        return 0.0
    return (hist.get(0.0, 0) + hist.get(1.0, 0)) / total
