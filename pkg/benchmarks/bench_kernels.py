"""Time the numba and numpy kernels on the same inputs and check they agree.

    python benchmarks/bench_kernels.py [--size 64] [--repeat 3]
"""
import argparse
import time

import numpy as np

from needlecast.exemplars import ExemplarDb, merge
from needlecast.kernels import numba_backend, numpy_backend
from needlecast.render import render
from needlecast.solver import boundary_from_truth
from needlecast.surfaces import depth_gradient, depth_to_angles, make_surface


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def workloads(n):
    sources = [make_surface(s, (n, n)) for s in ("f1", "f2", "f3")]
    db = merge([ExemplarDb.from_image(str(k), render(d), depth_to_angles(d)) for k, d in enumerate(sources)])
    test = make_surface("silt", (n, n))
    img, ang = render(test), depth_to_angles(test)
    bc = boundary_from_truth(ang)
    known = bc.known
    slant0 = np.where(known, bc.slant, 0.0)
    probes = ExemplarDb.from_image("t", img, ang).inputs
    zx, zy = depth_gradient(make_surface("f3", (n, n)))
    z0 = np.zeros((n, n))
    return {
        "nearest_batch": lambda k: k.nearest_batch(db.inputs, probes, True),
        "propagate": lambda k: k.propagate(np.ascontiguousarray(img.intensities), slant0, known,
                                           bc.mask & ~known, db.inputs, db.outputs, True),
        "jacobi": lambda k: k.jacobi(z0, zx, zy, 12 / (n - 1), 1.0, False, 1e-6, 50 * n * n),
    }, len(db)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b, equal_nan=a.dtype.kind == "f")
    return a == b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if numba_backend is None:
        raise SystemExit("numba is not installed; nothing to compare")
    jobs, n_db = workloads(args.size)
    print(f"grid {args.size}x{args.size}, {n_db} exemplars, best of {args.repeat}")
    print(f"{'kernel':<14}{'numba s':>10}{'numpy s':>10}{'speedup':>10}  identical")
    for name, job in jobs.items():
        job(numba_backend)  # compile outside the timing
        t_nb, a = best_of(lambda: job(numba_backend), args.repeat)
        t_np, b = best_of(lambda: job(numpy_backend), args.repeat)
        print(f"{name:<14}{t_nb:>10.3f}{t_np:>10.3f}{t_np / t_nb:>10.1f}  {same(a, b)}")


if __name__ == "__main__":
    main()
