#!/usr/bin/env python3
"""Benchmark the batch photon kernels: numba @njit loop vs pure-numpy path.

Both backends are timed in one process on identical inputs (the numba kernel
is warmed up first so JIT compilation is not counted).  Run:

    python benchmarks/bench_kernels.py --sizes 100000,1000000

With QOTP_NO_NUMBA=1 only the numpy path is available and the script says so.
"""

import argparse
import time

import numpy as np

from qotp import kernels
from qotp.rng import make_rng

CASES = [
    ("clean channel", dict(kind=kernels.ATTACK_NONE, strategy=0, theta=0.0, basis=0)),
    ("intercept-resend", dict(kind=kernels.ATTACK_IR, strategy=kernels.IR_RANDOM, theta=0.0, basis=0)),
    ("probe tap pi/8", dict(kind=kernels.ATTACK_UTB, strategy=0, theta=np.pi / 8, basis=0)),
]


def make_inputs(n, seed=0):
    rng = make_rng(seed)
    state = rng.integers(0, 4, n)
    enc = rng.integers(0, 2, n)
    mb = kernels.PREP_BASIS_OF_STATE[state]
    u = rng.random((n, 3))
    return state, enc, mb, u


def time_impl(impl, inputs, params, repeats=5):
    state, enc, mb, u = inputs
    ct, st = float(np.cos(params["theta"])), float(np.sin(params["theta"]))
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl(state, enc, mb, params["kind"], params["strategy"], ct, st, params["basis"], u)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100000,1000000",
                        help="comma-separated photon counts")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    impls = [("numpy", kernels.simulate_photons_numpy)]
    if kernels.simulate_photons_numba is not None:
        # warm up the JIT on a tiny batch per attack kind
        warm = make_inputs(64)
        for _, params in CASES:
            time_impl(kernels.simulate_photons_numba, warm, params, repeats=1)
        impls.append(("numba", kernels.simulate_photons_numba))
    else:
        print("numba backend unavailable (QOTP_NO_NUMBA set or numba missing); "
              "timing numpy only")

    print(f"{'case':<20} {'n':>10} " + "".join(f"{name + ' [ms]':>14}" for name, _ in impls)
          + ("  speedup" if len(impls) == 2 else ""))
    for case_name, params in CASES:
        for n in sizes:
            inputs = make_inputs(n)
            times = [time_impl(impl, inputs, params, args.repeats) for _, impl in impls]
            row = f"{case_name:<20} {n:>10} " + "".join(f"{t * 1e3:>14.2f}" for t in times)
            if len(times) == 2:
                row += f"  {times[0] / times[1]:>6.1f}x"
            print(row)


if __name__ == "__main__":
    main()
