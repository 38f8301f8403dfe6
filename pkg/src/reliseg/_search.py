"""Compiled Dijkstra kernels on the implicit 8-connected grid.

Both kernels use a binary min-heap keyed on ``(cost, node)`` where the node
index is ``y * W + x`` (times K plus layer for the layered graph), so ties
in cost resolve in lexicographic ``(y, x[, layer])`` order.

Edge costs are evaluated as ``E + w * (d - E) + eps``, algebraically equal
to ``w * d + (1 - w) * E + eps`` but exact when ``d == E`` so that genuine
ties between weight levels stay ties.
"""
import numpy as np
from numba import njit

SQRT2 = np.sqrt(2.0)
DX = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)
DY = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)
DIST = np.array([SQRT2, 1.0, SQRT2, 1.0, 1.0, SQRT2, 1.0, SQRT2])


@njit(cache=True, inline="always")
def _less(c1, i1, c2, i2):
    return c1 < c2 or (c1 == c2 and i1 < i2)


@njit(cache=True)
def _push(keys, ids, n, c, i):
    if n == keys.shape[0]:
        nk = np.empty(2 * n, dtype=keys.dtype)
        ni = np.empty(2 * n, dtype=ids.dtype)
        nk[:n] = keys
        ni[:n] = ids
        keys, ids = nk, ni
    pos = n
    while pos > 0:
        parent = (pos - 1) >> 1
        if _less(c, i, keys[parent], ids[parent]):
            keys[pos] = keys[parent]
            ids[pos] = ids[parent]
            pos = parent
        else:
            break
    keys[pos] = c
    ids[pos] = i
    return keys, ids, n + 1


@njit(cache=True)
def _pop(keys, ids, n):
    c0 = keys[0]
    i0 = ids[0]
    n -= 1
    c = keys[n]
    i = ids[n]
    pos = 0
    while True:
        child = 2 * pos + 1
        if child >= n:
            break
        if child + 1 < n and _less(keys[child + 1], ids[child + 1], keys[child], ids[child]):
            child += 1
        if _less(keys[child], ids[child], c, i):
            keys[pos] = keys[child]
            ids[pos] = ids[child]
            pos = child
        else:
            break
    if n > 0:
        keys[pos] = c
        ids[pos] = i
    return c0, i0, n


@njit(cache=True)
def pixel_dijkstra(ext, weight, eps, start, end):
    """Single-source search, stops when ``end`` is settled.

    Edge cost from v to an 8-neighbour u is
    ``weight[v] * d(v, u) + (1 - weight[v]) * ext[v] + eps``.
    Returns ``(dist, pred)`` over flattened pixel indices.
    """
    h, w = ext.shape
    n_nodes = h * w
    dist = np.full(n_nodes, np.inf)
    pred = np.full(n_nodes, -1, dtype=np.int64)
    done = np.zeros(n_nodes, dtype=np.bool_)
    keys = np.empty(1024, dtype=np.float64)
    ids = np.empty(1024, dtype=np.int64)
    n = 0
    dist[start] = 0.0
    keys, ids, n = _push(keys, ids, n, 0.0, start)
    while n > 0:
        c, v, n = _pop(keys, ids, n)
        if done[v] or c > dist[v]:
            continue
        done[v] = True
        if v == end:
            break
        vy = v // w
        vx = v - vy * w
        wv = weight[vy, vx]
        ev = ext[vy, vx]
        for k in range(8):
            uy = vy + DY[k]
            ux = vx + DX[k]
            if uy < 0 or uy >= h or ux < 0 or ux >= w:
                continue
            u = uy * w + ux
            if done[u]:
                continue
            nc = c + (ev + wv * (DIST[k] - ev) + eps)
            if nc < dist[u]:
                dist[u] = nc
                pred[u] = v
                keys, ids, n = _push(keys, ids, n, nc, u)
    return dist, pred


@njit(cache=True)
def layered_dijkstra(ext, levels, eps, start, end):
    """Search on the (x, y, weight-level) graph.

    Node ``p * K + k`` is pixel ``p`` at level ``k``. Every level of the
    start pixel is a source at cost 0 and the first settled level of the
    end pixel terminates the search. Edges go from ``(v, k)`` to every level
    of each spatial 8-neighbour with cost
    ``levels[k] * d + (1 - levels[k]) * ext[v] + eps``.
    Returns ``(end_node, dist, pred)``.
    """
    h, w = ext.shape
    nk = levels.shape[0]
    n_nodes = h * w * nk
    dist = np.full(n_nodes, np.inf)
    pred = np.full(n_nodes, -1, dtype=np.int64)
    done = np.zeros(n_nodes, dtype=np.bool_)
    keys = np.empty(4096, dtype=np.float64)
    ids = np.empty(4096, dtype=np.int64)
    n = 0
    for k in range(nk):
        node = start * nk + k
        dist[node] = 0.0
        keys, ids, n = _push(keys, ids, n, 0.0, node)
    end_node = -1
    while n > 0:
        c, node, n = _pop(keys, ids, n)
        if done[node] or c > dist[node]:
            continue
        done[node] = True
        v = node // nk
        lk = node - v * nk
        if v == end:
            end_node = node
            break
        vy = v // w
        vx = v - vy * w
        wk = levels[lk]
        ev = ext[vy, vx]
        for j in range(8):
            uy = vy + DY[j]
            ux = vx + DX[j]
            if uy < 0 or uy >= h or ux < 0 or ux >= w:
                continue
            nc = c + (ev + wk * (DIST[j] - ev) + eps)
            u0 = (uy * w + ux) * nk
            for l in range(nk):
                u = u0 + l
                if done[u]:
                    continue
                if nc < dist[u]:
                    dist[u] = nc
                    pred[u] = node
                    keys, ids, n = _push(keys, ids, n, nc, u)
    return end_node, dist, pred
