"""numba kernels. Keep the floating-point operation order in lockstep with _numpy.py."""
import math

import numpy as np
from numba import njit, prange

PI = math.pi
TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _slant_term(a, b):
    d = a - b
    if d > PI:
        d = d - TWO_PI
    elif d <= -PI:
        d = d + TWO_PI
    c = abs(d) / PI
    return c * c


@njit(cache=True)
def _distance(rec, p0, p1, p2, p3, p4, p5, p6, include_center, n):
    acc = 0.0
    if include_center:
        c = p0 - rec[0]
        acc += c * c
    c = p1 - rec[1]
    acc += c * c
    c = p2 - rec[2]
    acc += c * c
    c = p3 - rec[3]
    acc += c * c
    acc += _slant_term(p4, rec[4])
    acc += _slant_term(p5, rec[5])
    acc += _slant_term(p6, rec[6])
    return math.sqrt(acc / n)


@njit(cache=True)
def _scan(records, p0, p1, p2, p3, p4, p5, p6, include_center):
    n = 7.0 if include_center else 6.0
    best = 0
    best_d = np.inf
    for r in range(records.shape[0]):
        d = _distance(records[r], p0, p1, p2, p3, p4, p5, p6, include_center, n)
        if d < best_d:
            best_d = d
            best = r
    return best, best_d


@njit(cache=True)
def distances(records, probe, include_center):
    n = 7.0 if include_center else 6.0
    out = np.empty(records.shape[0])
    for r in range(records.shape[0]):
        out[r] = _distance(records[r], probe[0], probe[1], probe[2], probe[3],
                           probe[4], probe[5], probe[6], include_center, n)
    return out


@njit(cache=True, parallel=True)
def nearest_batch(records, probes, include_center):
    m = probes.shape[0]
    idx = np.empty(m, dtype=np.int64)
    dist = np.empty(m)
    for k in prange(m):
        pr = probes[k]
        b, d = _scan(records, pr[0], pr[1], pr[2], pr[3], pr[4], pr[5], pr[6], include_center)
        idx[k] = b
        dist[k] = d
    return idx, dist


@njit(cache=True)
def propagate(gray, slant, known, todo, records, outputs, include_center):
    h, w = gray.shape
    s = slant.copy()
    k = known.copy()
    dist = np.full((h, w), np.nan)
    solved = np.zeros((h, w), dtype=np.bool_)
    # anti-raster: i descending, then j descending
    for i in range(h - 2, -1, -1):
        for j in range(w - 2, -1, -1):
            if not todo[i, j] or k[i, j]:
                continue
            if not (k[i, j + 1] and k[i + 1, j] and k[i + 1, j + 1]):
                continue
            b, d = _scan(records, gray[i, j], gray[i, j + 1], gray[i + 1, j], gray[i + 1, j + 1],
                         s[i, j + 1], s[i + 1, j], s[i + 1, j + 1], include_center)
            s[i, j] = outputs[b]
            dist[i, j] = d
            k[i, j] = True
            solved[i, j] = True
    return s, dist, solved


RATIO_WINDOW = 8


@njit(cache=True)
def converged(res, history, it, tol):
    if res == 0.0:
        return True
    if not res < tol or it <= RATIO_WINDOW:
        return False
    old = history[it - 1 - RATIO_WINDOW]
    if not old > 0.0:
        return False
    rho = math.sqrt(math.sqrt(math.sqrt(res / old)))
    return rho < 1.0 and res * rho / (1.0 - rho) < tol


@njit(cache=True)
def jacobi(z0, p, q, delta, g, dirichlet, tol, max_iter):
    h, w = z0.shape
    c = delta / (8.0 * g)
    sc = delta / g
    rhs = np.empty((h, w))
    for i in range(1, h - 1):
        for j in range(1, w - 1):
            rhs[i, j] = c * (((p[i, j + 1] - p[i, j - 1]) + q[i + 1, j]) - q[i - 1, j])
    left = np.empty(h)
    right = np.empty(h)
    for i in range(1, h - 1):
        left[i] = sc * (p[i, 0] + p[i, 1]) * 0.5
        right[i] = sc * (p[i, w - 1] + p[i, w - 2]) * 0.5
    bottom = np.empty(w)
    top = np.empty(w)
    for j in range(w):
        bottom[j] = sc * (q[0, j] + q[1, j]) * 0.5
        top[j] = sc * (q[h - 1, j] + q[h - 2, j]) * 0.5

    z = z0.copy()
    new = z0.copy()
    history = np.empty(max_iter)
    res = np.inf
    it = 0
    while it < max_iter:
        for i in range(1, h - 1):
            for j in range(1, w - 1):
                new[i, j] = (((z[i, j + 1] + z[i + 1, j]) + z[i, j - 1]) + z[i - 1, j]) * 0.25 - rhs[i, j]
        if not dirichlet:
            for i in range(1, h - 1):
                new[i, 0] = new[i, 1] - left[i]
                new[i, w - 1] = new[i, w - 2] + right[i]
            for j in range(w):
                new[0, j] = new[1, j] - bottom[j]
                new[h - 1, j] = new[h - 2, j] + top[j]
        res = 0.0
        for i in range(h):
            for j in range(w):
                r = abs(new[i, j] - z[i, j])
                if r > res:
                    res = r
        history[it] = res
        it += 1
        z, new = new, z
        if converged(res, history, it, tol):
            break
    return z, it, res, history[:it].copy()
