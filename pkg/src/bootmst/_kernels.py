"""Compiled inner loops for the bootstrap hot path.

All integer arithmetic on generator state is done in uint64; numba promotes
mixed int64/uint64 expressions to float64, so every constant is cast.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def pair_key(seed, i, j, attempt):
    """Stream key for pair (i, j) of one replica; distinct per argument tuple."""
    k = _mix64(np.uint64(seed) + _GOLDEN)
    k = _mix64(k ^ (np.uint64(i) + _GOLDEN))
    k = _mix64(k ^ (np.uint64(j) + _GOLDEN))
    return _mix64(k ^ (np.uint64(attempt) + _GOLDEN))


@njit(cache=True)
def draw_indices(key, T, out):
    """Fill ``out[:T]`` with uniform draws from range(T) (splitmix64 stream)."""
    state = key
    t_u = np.uint64(T)
    for k in range(T):
        state = state + _GOLDEN
        r = _mix64(state) >> _S32
        out[k] = np.int64((r * t_u) >> _S32)


@njit(cache=True, nogil=True)
def pair_replica_matrix(X, seed, max_attempts):
    """Pair-bootstrap correlation matrix.

    Every unordered pair gets its own resample of T synchronous time indices.
    Returns ``(C, bad_i, bad_j)``; ``bad_i >= 0`` flags a pair that stayed
    degenerate for ``max_attempts`` draws.
    """
    n, T = X.shape
    C = np.eye(n)
    idx = np.empty(T, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            ok = False
            for attempt in range(max_attempts):
                draw_indices(pair_key(seed, i, j, attempt), T, idx)
                xmin = X[i, idx[0]]
                xmax = xmin
                ymin = X[j, idx[0]]
                ymax = ymin
                sx = 0.0
                sy = 0.0
                for k in range(T):
                    a = X[i, idx[k]]
                    b = X[j, idx[k]]
                    sx += a
                    sy += b
                    if a < xmin:
                        xmin = a
                    elif a > xmax:
                        xmax = a
                    if b < ymin:
                        ymin = b
                    elif b > ymax:
                        ymax = b
                if xmin == xmax or ymin == ymax:
                    continue
                mx = sx / T
                my = sy / T
                sxx = 0.0
                syy = 0.0
                sxy = 0.0
                for k in range(T):
                    a = X[i, idx[k]] - mx
                    b = X[j, idx[k]] - my
                    sxx += a * a
                    syy += b * b
                    sxy += a * b
                r = sxy / (np.sqrt(sxx) * np.sqrt(syy))
                if r > 1.0:
                    r = 1.0
                elif r < -1.0:
                    r = -1.0
                C[i, j] = r
                C[j, i] = r
                ok = True
                break
            if not ok:
                return C, i, j
    return C, -1, -1


@njit(cache=True, nogil=True)
def _key_less(d1, i1, j1, d2, i2, j2):
    if d1 != d2:
        return d1 < d2
    if i1 != i2:
        return i1 < i2
    return j1 < j2


@njit(cache=True, nogil=True)
def prim_mst(D):
    """Minimum spanning tree under the strict edge order (d, i, j), i < j.

    Node-growing from node 0; returns an ``(n-1, 2)`` array of sorted pairs.
    """
    n = D.shape[0]
    in_tree = np.zeros(n, dtype=np.bool_)
    best_d = np.full(n, np.inf)
    best_i = np.full(n, n, dtype=np.int64)
    best_j = np.full(n, n, dtype=np.int64)
    edges = np.empty((n - 1, 2), dtype=np.int64)
    u = 0
    in_tree[0] = True
    for step in range(n - 1):
        for v in range(n):
            if in_tree[v]:
                continue
            a = u if u < v else v
            b = v if u < v else u
            d = D[u, v]
            if _key_less(d, a, b, best_d[v], best_i[v], best_j[v]):
                best_d[v] = d
                best_i[v] = a
                best_j[v] = b
        nxt = -1
        for v in range(n):
            if in_tree[v]:
                continue
            if nxt < 0 or _key_less(best_d[v], best_i[v], best_j[v],
                                    best_d[nxt], best_i[nxt], best_j[nxt]):
                nxt = v
        edges[step, 0] = best_i[nxt]
        edges[step, 1] = best_j[nxt]
        in_tree[nxt] = True
        u = nxt
    return edges
