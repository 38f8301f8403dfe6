"""Independent reference implementations used only by the tests."""
import math

import numpy as np

STEPS = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dx or dy]


def _neighbours(p, w, h):
    for dx, dy in STEPS:
        x, y = p[0] + dx, p[1] + dy
        if 0 <= x < w and 0 <= y < h:
            yield (x, y), (math.sqrt(2.0) if dx and dy else 1.0)


def brute_force_path_cost(ext, weight, start, end, eps=1e-9):
    """Minimum over all simple 8-connected paths, by exhaustive DFS.

    Branches whose partial cost already exceeds the best complete path are
    cut; with strictly positive edge costs this cannot discard an optimum.
    """
    h, w = ext.shape
    best = [math.inf]
    visited = {start}

    def dfs(p, cost):
        if cost >= best[0]:
            return
        if p == end:
            best[0] = cost
            return
        wv = weight[p[1], p[0]]
        base = (1.0 - wv) * ext[p[1], p[0]] + eps
        for q, d in _neighbours(p, w, h):
            if q in visited:
                continue
            visited.add(q)
            dfs(q, cost + wv * d + base)
            visited.discard(q)

    dfs(start, 0.0)
    return best[0]


def brute_force_layered_cost(ext, levels, start, end, eps=1e-9):
    """Minimum over simple spatial paths and every per-pixel level choice."""
    h, w = ext.shape
    best = [math.inf]
    visited = {start}

    def dfs(p, cost):
        if cost >= best[0]:
            return
        if p == end:
            best[0] = cost
            return
        e = ext[p[1], p[0]]
        for q, d in _neighbours(p, w, h):
            if q in visited:
                continue
            visited.add(q)
            for lv in levels:
                dfs(q, cost + lv * d + (1.0 - lv) * e + eps)
            visited.discard(q)

    dfs(start, 0.0)
    return best[0]


def euclidean_grid_cost(width, height, start, end):
    """Shortest 8-connected length via scipy's csgraph Dijkstra."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    rows, cols, vals = [], [], []
    for y in range(height):
        for x in range(width):
            for (qx, qy), d in _neighbours((x, y), width, height):
                rows.append(y * width + x)
                cols.append(qy * width + qx)
                vals.append(d)
    n = width * height
    m = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    dist = dijkstra(m, indices=start[1] * width + start[0])
    return float(dist[end[1] * width + end[0]])


def csgraph_cost(ext, weight, start, end, eps=1e-9):
    """Same edge costs as the pixel graph, solved with scipy's Dijkstra."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    h, w = ext.shape
    rows, cols, vals = [], [], []
    for y in range(h):
        for x in range(w):
            wv = weight[y, x]
            for (qx, qy), d in _neighbours((x, y), w, h):
                rows.append(y * w + x)
                cols.append(qy * w + qx)
                vals.append(wv * d + (1.0 - wv) * ext[y, x] + eps)
    m = coo_matrix((vals, (rows, cols)), shape=(h * w, h * w)).tocsr()
    dist = dijkstra(m, indices=start[1] * w + start[0])
    return float(dist[end[1] * w + end[0]])


def dense_gaussian_blur(img, sigma):
    """Direct 2D convolution with the outer-product kernel, edge-replicated."""
    r = int(math.ceil(3 * sigma))
    x = np.arange(-r, r + 1)
    k1 = np.exp(-0.5 * (x / sigma) ** 2)
    k2 = np.outer(k1, k1)
    k2 /= k2.sum()
    padded = np.pad(img, r, mode="edge")
    h, w = img.shape
    out = np.zeros_like(img, dtype=np.float64)
    for dy in range(2 * r + 1):
        for dx in range(2 * r + 1):
            out += k2[dy, dx] * padded[dy:dy + h, dx:dx + w]
    return out


def brute_hausdorff(a, b):
    def directed(p, q):
        return max(min(math.dist(u, v) for v in q) for u in p)
    return max(directed(a, b), directed(b, a))


def binomial_two_sided(k, n):
    """Two-sided sign-test p-value by summing binomial terms directly."""
    lo = min(k, n - k)
    tail = sum(math.comb(n, i) for i in range(lo + 1)) / 2 ** n
    return min(1.0, 2 * tail)
