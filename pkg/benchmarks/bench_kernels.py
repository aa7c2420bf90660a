"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py            # default sizes
    python3 benchmarks/bench_kernels.py --quick    # small sizes only

Jacobi sizes default to the band counts of the two reference scenes
(145, 204) plus a small case; the Pegasos case mimics 14 classes with
10 training samples each, 50 projected features and 200 epochs.
"""

import argparse
import time

import numpy as np

from ssrlsc import _backend
from ssrlsc.classify import visiting_order


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def bench_jacobi(sizes, repeat, backends):
    rng = np.random.default_rng(0)
    print(f"{'jacobi n':>10} " + " ".join(f"{b + ' s':>12}" for b in backends) + f" {'speedup':>8} {'max |dw|':>10}")
    for n in sizes:
        a = rng.normal(size=(n, n))
        a = a + a.T
        results = {b: best_of(lambda b=b: _backend.get(b).jacobi_eigh(a), repeat) for b in backends}
        row = f"{n:>10} " + " ".join(f"{results[b][0]:12.4f}" for b in backends)
        if len(backends) == 2:
            speed = results["python"][0] / results["cython"][0]
            gap = np.max(np.abs(np.sort(results["cython"][1][0]) - np.sort(results["python"][1][0])))
            row += f" {speed:8.1f} {gap:10.2e}"
        print(row)


def bench_pegasos(classes, per_class, dim, epochs, repeat, backends):
    rng = np.random.default_rng(1)
    n = classes * per_class
    labels = np.repeat(np.arange(classes), per_class)
    x = np.hstack([rng.normal(size=(n, dim)) + labels[:, None] * 0.1, np.ones((n, 1))])
    y = np.where(labels[None, :] == np.arange(classes)[:, None], 1.0, -1.0)
    order = visiting_order(n, epochs, 0)
    results = {b: best_of(lambda b=b: _backend.get(b).pegasos_ovr(x, y, order, 0.01), repeat) for b in backends}
    print(f"\npegasos: {classes} classes x {per_class} samples, {dim} features, {epochs} epochs")
    for b in backends:
        print(f"  {b:>7}: {results[b][0]:.4f} s")
    if len(backends) == 2:
        gap = np.max(np.abs(results["cython"][1] - results["python"][1]))
        print(f"  speedup {results['python'][0] / results['cython'][0]:.1f}x, max |dw| {gap:.2e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--quick", action="store_true", help="small problem sizes")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = _backend.available()
    print(f"backends: {', '.join(backends)} (default {_backend.BACKEND})\n")
    if args.quick:
        bench_jacobi([16, 48], args.repeat, backends)
        bench_pegasos(5, 10, 10, 50, args.repeat, backends)
    else:
        bench_jacobi([32, 145, 204], args.repeat, backends)
        bench_pegasos(14, 10, 50, 200, args.repeat, backends)


if __name__ == "__main__":
    main()
