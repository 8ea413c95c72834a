"""Time the numba kernels against their pure-numpy twins.

    python3 benchmarks/bench_backends.py [--repeat 5] [--quick]

Each kernel runs once per backend to warm up (numba compiles on first call),
then ``--repeat`` more times; the best wall time is reported.  Outputs are
compared so that a speedup is never bought with a wrong answer.
"""

import argparse
import time

import numpy as np

from aakit.kernels import backend
from aakit.simplex import KKT_TOL, lipschitz_constant


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(quick):
    gen = np.random.default_rng(0)
    scale = 1 if quick else 4

    z = np.ascontiguousarray(gen.standard_normal((20, 8)))
    y = np.ascontiguousarray(gen.standard_normal((20, 500 * scale)))
    b0 = np.full((8, y.shape[1]), 1.0 / 8)
    lip = lipschitz_constant(z)
    tol = KKT_TOL * np.maximum(1.0, np.linalg.norm(y, axis=0))
    yield ("apg_batch B-update 8x%d" % y.shape[1],
           lambda k: k.apg_batch(z, y, b0.copy(), lip, tol, 50_000),
           lambda a, b: np.allclose(a[1], b[1], rtol=1e-8, atol=1e-12))

    zd = np.ascontiguousarray(gen.standard_normal((10, 200 * scale)))
    yd = np.ascontiguousarray(gen.standard_normal((10, 1)) * 3)
    bd = np.full((zd.shape[1], 1), 1.0 / zd.shape[1])
    lipd = lipschitz_constant(zd)
    told = KKT_TOL * np.maximum(1.0, np.linalg.norm(yd, axis=0))
    yield ("apg_batch A-update dict %d" % zd.shape[1],
           lambda k: k.apg_batch(zd, yd, bd.copy(), lipd, told, 50_000),
           lambda a, b: np.allclose(a[1], b[1], rtol=1e-8, atol=1e-12))

    dirs = np.ascontiguousarray(gen.standard_normal((10_000, 10)))
    xt = np.ascontiguousarray(gen.standard_normal((1000 * scale, 10)))
    yield ("argmax_projections 1e4 x %d" % xt.shape[0],
           lambda k: k.argmax_projections(dirs, xt),
           lambda a, b: np.array_equal(a, b))

    v = np.ascontiguousarray(gen.standard_normal((50, 2000 * scale)))
    yield ("project_simplex_columns 50x%d" % v.shape[1],
           lambda k: k.project_simplex_columns(v),
           lambda a, b: np.allclose(a, b, atol=1e-14))

    a = np.ascontiguousarray(gen.standard_normal((100 * scale, 60)))
    yield ("householder_qr %dx60" % a.shape[0],
           lambda k: k.householder_qr(a.copy(), 1e-12),
           lambda p, q: np.allclose(p[0] @ p[1], q[0] @ q[1], atol=1e-10))

    s = np.ascontiguousarray(gen.standard_normal((100 * scale, 50 * scale)))
    yield ("svd_golub_kahan %dx%d" % s.shape,
           lambda k: k.svd_golub_kahan(s.copy(), 100 * s.shape[1]),
           lambda p, q: np.allclose(np.sort(p[1]), np.sort(q[1]), rtol=1e-10))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)

    nb, npk = backend("numba"), backend("numpy")
    print(f"{'kernel':40s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, run, same in cases(args.quick):
        t_nb, out_nb = _best(lambda: run(nb), args.repeat)
        t_np, out_np = _best(lambda: run(npk), args.repeat)
        print(f"{name:40s} {1e3 * t_nb:10.2f} {1e3 * t_np:10.2f} {t_np / t_nb:8.1f}x  {same(out_nb, out_np)}")


if __name__ == "__main__":
    main()
