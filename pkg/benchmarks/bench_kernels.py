"""Compare the compiled recurrence kernel with the numpy fallback.

    python benchmarks/bench_kernels.py [--points 801] [--steps 20000] [--repeat 3]

Both backends advance the same batch of real-axis points (the density
workload) and one off-axis point (the per-point asymptotics workload);
the script prints best-of-repeat times and the max relative disagreement.
"""
import argparse
import time

import numpy as np

from jacobi_spectra import kernels, preset
from jacobi_spectra.engine import advance_batch, start_batch


def _time(seq, xs, steps, backend, boundary, repeat):
    best, state = float("inf"), None
    for _ in range(repeat):
        state, table = start_batch(seq, xs, boundary=boundary)
        table.ensure(steps + 2)
        t0 = time.perf_counter()
        advance_batch(state, table, steps, track=True, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=801)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if kernels.BACKEND != "cython":
        print("compiled kernel not available; only the numpy fallback can be timed")
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    seq = preset("hermite")
    workloads = [
        ("batch, real axis", np.linspace(-8, 8, args.points), True),
        ("single point, x = i", np.array([1j]), False),
    ]
    print(f"{'workload':<22}{'backend':<9}{'seconds':>10}{'ns/step/pt':>12}")
    for name, xs, boundary in workloads:
        states = {}
        for be in backends:
            t, states[be] = _time(seq, xs, args.steps, be, boundary, args.repeat)
            print(f"{name:<22}{be:<9}{t:>10.4f}{1e9 * t / (args.steps * xs.size):>12.1f}")
        if len(states) == 2:
            a, b = states["python"].p1, states["cython"].p1
            dev = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
            print(f"{'':<22}max relative difference {dev:.2e}")


if __name__ == "__main__":
    main()
