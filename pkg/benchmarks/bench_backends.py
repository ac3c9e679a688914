"""Timing comparison of the numba kernels against their numpy twins.

Runs the three hot paths (batched geodesic stepping, finite-difference
Christoffel symbols, quotient Hausdorff classification) under both
backends and prints a small table.  The first numba call per process
pays the JIT compile; a warm-up pass absorbs it so the timings compare
steady-state throughput.

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --repeats 5 --batch 1024
"""

import argparse
import sys
from timeit import default_timer as timer

import numpy as np

from transnormal_lab.backend import use_backend
from transnormal_lab.geometry.operators import integrate_geodesic_batch
from transnormal_lab.kernels import numpy_impl
from transnormal_lab.presets import get_preset
from transnormal_lab.transnormal import classify
from transnormal_lab.verify import sample_points


def _fan(manifold, n):
    rng = np.random.default_rng(7)
    P0 = sample_points(manifold, n)
    ang = rng.uniform(0.0, 2.0 * np.pi, n)
    V0 = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return P0, V0


def bench_geodesics(batch):
    m = get_preset("torus")()
    P0, V0 = _fan(m, batch)

    def run():
        _, traj, _, energy, _, _ = integrate_geodesic_batch(m, P0, V0, 3.0)
        return float(traj[-1].sum() + energy.sum())

    return run


def bench_christoffels(batch):
    m = get_preset("sphere")()
    P = sample_points(m, 40 * batch, margin=0.1)

    def run():
        from transnormal_lab.backend import get_kernels

        gam = get_kernels().christoffel_batch(m.code.ints, m.code.floats, P, 1e-3, 4)
        return float(np.abs(gam).sum())

    return run


def bench_classify(batch):
    m = get_preset("klein")()
    n = max(96, batch // 4)

    def run():
        return classify(m, n_samples=n).injectivity_radius

    return run


WORKLOADS = [
    ("geodesic sweep", bench_geodesics),
    ("christoffel batch", bench_christoffels),
    ("classify klein", bench_classify),
]


def time_best(fn, repeats):
    best = np.inf
    value = None
    for _ in range(repeats):
        t0 = timer()
        value = fn()
        best = min(best, timer() - t0)
    return best, value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3, help="best-of timing repeats")
    ap.add_argument("--batch", type=int, default=512, help="geodesic batch size")
    args = ap.parse_args(argv)

    try:
        import numba  # noqa: F401

        have_numba = True
    except ImportError:
        have_numba = False
        print("numba not importable; timing the numpy backend only", file=sys.stderr)

    rows = []
    for name, make in WORKLOADS:
        fn = make(args.batch)
        with use_backend("numpy"):
            t_np, v_np = time_best(fn, args.repeats)
        t_nb = v_nb = None
        if have_numba:
            with use_backend("numba"):
                fn()  # absorb JIT compile
                t_nb, v_nb = time_best(fn, args.repeats)
            if isinstance(v_np, float) and not np.isclose(v_np, v_nb, rtol=1e-8):
                print(f"warning: {name} backends disagree: {v_np!r} vs {v_nb!r}",
                      file=sys.stderr)
        rows.append((name, t_np, t_nb))

    print(f"{'workload':<20} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:<20} {t_np:>10.4f} {'-':>10} {'-':>8}")
        else:
            print(f"{name:<20} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")
    # numpy_impl is imported above so a stale editable install fails here,
    # not half way through a timing run
    assert numpy_impl.metric_batch is not None
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
