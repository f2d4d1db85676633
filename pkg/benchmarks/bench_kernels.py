"""Time the compiled propagation kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--steps 20000] [--repeat 5]
"""
import argparse
import statistics
import time

import numpy as np

from peres_lab import _kernels
from peres_lab._kernels import _fallback
from peres_lab.scatter3d import RadialPotential, forward_amplitude

try:
    from peres_lab._kernels import _propagate as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def end_to_end(impl):
    _kernels.propagate, _kernels.back_substitute = impl.propagate, impl.back_substitute
    pot = RadialPotential.square_well(1.0, -1.0, 0.3)
    return lambda: forward_amplitude(pot, 1.0, L_max=8)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    T = (np.eye(4) + 0.01 * (rng.standard_normal((args.steps, 4, 4))
                             + 1j * rng.standard_normal((args.steps, 4, 4)))).astype(complex)
    Y0 = np.ascontiguousarray(np.linalg.qr(rng.standard_normal((4, 2)) + 0j)[0])
    c = np.ones(2, complex)

    backends = [("python", _fallback)] + ([("cython", compiled)] if compiled else [])
    print(f"{'backend':8s} {'kernel':>18s} {'best [ms]':>10s} {'median [ms]':>12s}")
    results = {}
    for name, impl in backends:
        Q, R = impl.propagate(T, Y0)
        cases = {
            "propagate": lambda: impl.propagate(T, Y0),
            "back_substitute": lambda: impl.back_substitute(R, c),
            "forward_amplitude": end_to_end(impl),
        }
        for kernel, fn in cases.items():
            best, med = best_of(fn, args.repeat)
            results[(name, kernel)] = best
            print(f"{name:8s} {kernel:>18s} {1e3 * best:10.2f} {1e3 * med:12.2f}")
    _kernels.propagate, _kernels.back_substitute = (compiled or _fallback).propagate, \
        (compiled or _fallback).back_substitute
    if compiled:
        for kernel in ("propagate", "back_substitute", "forward_amplitude"):
            ratio = results[("python", kernel)] / results[("cython", kernel)]
            print(f"speed-up {kernel}: {ratio:.1f}x")
    else:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
