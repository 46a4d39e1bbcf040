"""Pure-numpy kernels. Arithmetic is ordered exactly as in the numba versions so
both backends return bit-identical results."""
import math

import numpy as np

PI = math.pi
TWO_PI = 2.0 * math.pi



def _slant_term(a, b):
    d = a - b
    d = np.where(d > PI, d - TWO_PI, np.where(d <= -PI, d + TWO_PI, d))
    c = np.abs(d) / PI
    return c * c


def distances(records, probe, include_center):
    """Distance of one probe (7,) to every record (N, 7)."""
    acc = np.zeros(records.shape[0])
    if include_center:
        c = probe[0] - records[:, 0]
        acc += c * c
    for k in (1, 2, 3):
        c = probe[k] - records[:, k]
        acc += c * c
    for k in (4, 5, 6):
        acc += _slant_term(probe[k], records[:, k])
    n = 7.0 if include_center else 6.0
    return np.sqrt(acc / n)


def _distance_matrix(columns, probes, include_center):
    """(m, N) distances; ``columns`` is the (7, N) transposed record table."""
    m, n_rec = probes.shape[0], columns.shape[1]
    acc = np.zeros((m, n_rec))
    c = np.empty((m, n_rec))
    first = 0 if include_center else 1
    for k in range(first, 4):
        np.subtract(probes[:, k:k + 1], columns[k], out=c)
        np.multiply(c, c, out=c)
        acc += c
    for k in (4, 5, 6):
        np.subtract(probes[:, k:k + 1], columns[k], out=c)
        # wrap the difference into (-pi, pi]; these updates are exact
        c[c > PI] -= TWO_PI
        c[c <= -PI] += TWO_PI
        np.abs(c, out=c)
        c /= PI
        np.multiply(c, c, out=c)
        acc += c
    acc /= 7.0 if include_center else 6.0
    return np.sqrt(acc, out=acc)


def nearest_batch(records, probes, include_center, chunk=64):
    columns = np.ascontiguousarray(records.T)
    m = probes.shape[0]
    idx = np.empty(m, dtype=np.int64)
    dist = np.empty(m)
    for start in range(0, m, chunk):
        stop = min(m, start + chunk)
        dm = _distance_matrix(columns, probes[start:stop], include_center)
        best = np.argmin(dm, axis=1)
        idx[start:stop] = best
        dist[start:stop] = dm[np.arange(stop - start), best]
    return idx, dist


def propagate(gray, slant, known, todo, records, outputs, include_center):
    """Fill slant on ``todo`` pixels whose (i,j+1), (i+1,j), (i+1,j+1) are known.

    Processed by anti-diagonal wavefronts (i + j descending). Each pixel only
    depends on pixels with a larger i + j, so this assigns the same values as a
    single anti-raster sweep.
    """
    h, w = gray.shape
    s = slant.copy()
    k = known.copy()
    dist = np.full((h, w), np.nan)
    solved = np.zeros((h, w), dtype=bool)
    for t in range((h - 2) + (w - 2), -1, -1):
        i = np.arange(max(0, t - (w - 2)), min(h - 2, t) + 1)
        j = t - i
        sel = todo[i, j] & ~k[i, j] & k[i, j + 1] & k[i + 1, j] & k[i + 1, j + 1]
        if not np.any(sel):
            continue
        i, j = i[sel], j[sel]
        probes = np.column_stack((
            gray[i, j], gray[i, j + 1], gray[i + 1, j], gray[i + 1, j + 1],
            s[i, j + 1], s[i + 1, j], s[i + 1, j + 1],
        ))
        best, d = nearest_batch(records, probes, include_center)
        s[i, j] = outputs[best]
        dist[i, j] = d
        k[i, j] = True
        solved[i, j] = True
    return s, dist, solved


def _border_offsets(p, q, scale):
    left = scale * (p[1:-1, 0] + p[1:-1, 1]) * 0.5
    right = scale * (p[1:-1, -1] + p[1:-1, -2]) * 0.5
    bottom = scale * (q[0, :] + q[1, :]) * 0.5
    top = scale * (q[-1, :] + q[-2, :]) * 0.5
    return left, right, bottom, top


def _neumann_border(z, left, right, bottom, top):
    z[1:-1, 0] = z[1:-1, 1] - left
    z[1:-1, -1] = z[1:-1, -2] + right
    z[0, :] = z[1, :] - bottom
    z[-1, :] = z[-2, :] + top


# Sweeps spanned by the contraction-ratio estimate; a power of two so the
# m-th root is a chain of correctly rounded square roots.
RATIO_WINDOW = 8


def converged(res, history, it, tol):
    """Stop when the per-sweep change and the estimated distance to the fixed
    point, change * rho / (1 - rho), are both below ``tol``; rho is the mean
    contraction ratio over the last RATIO_WINDOW sweeps. ``it`` counts sweeps
    done including the current one."""
    if res == 0.0:
        return True
    if not res < tol or it <= RATIO_WINDOW:
        return False
    old = history[it - 1 - RATIO_WINDOW]
    if not old > 0.0:
        return False
    rho = math.sqrt(math.sqrt(math.sqrt(res / old)))
    return rho < 1.0 and res * rho / (1.0 - rho) < tol


def jacobi(z0, p, q, delta, g, dirichlet, tol, max_iter):
    """Horn-Brooks Jacobi sweeps; returns (z, iterations, residual, history)."""
    c = delta / (8.0 * g)
    rhs = c * (((p[1:-1, 2:] - p[1:-1, :-2]) + q[2:, 1:-1]) - q[:-2, 1:-1])
    left, right, bottom, top = _border_offsets(p, q, delta / g)
    z = z0.copy()
    new = z0.copy()
    history = np.empty(max_iter)
    res = np.inf
    it = 0
    while it < max_iter:
        new[1:-1, 1:-1] = (((z[1:-1, 2:] + z[2:, 1:-1]) + z[1:-1, :-2]) + z[:-2, 1:-1]) * 0.25 - rhs
        if not dirichlet:
            _neumann_border(new, left, right, bottom, top)
        res = float(np.max(np.abs(new - z)))
        history[it] = res
        it += 1
        z, new = new, z
        if converged(res, history, it, tol):
            break
    return z, it, res, history[:it].copy()
