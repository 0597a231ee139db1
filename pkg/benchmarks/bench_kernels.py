"""Time the box-spreading kernels: compiled extension against numpy fallback.

    python benchmarks/bench_kernels.py [--n 10000] [--repeat 5]

Both backends must produce identical entries; the script checks this
before timing.
"""
import argparse
import math
import time

import numpy as np

from qmd import _kernels_py
from qmd.copulas import sample_scenario
from qmd.empirical import _tie_blocks, ranks, resolution_for

try:
    from qmd import _kernels
except ImportError:
    _kernels = None


def _boxes(n, scenario, seed):
    pseudo = ranks(sample_scenario(scenario, n, seed))
    first, last = _tie_blocks(pseudo)
    N = resolution_for(n, pseudo.rho)
    L = math.lcm(n, N)
    step = L // n
    lo, hi = (first - 1) * step, last * step
    return lo, hi, L // N, N, step


def _time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 10000, 100000])
    ap.add_argument("--scenario", default="double_mod")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled extension not built; timing the fallback only")
    print(f"{'n':>8} {'kernel':>6} " + " ".join(f"{name:>10}" for name, _ in backends))
    for n in args.n:
        lo, hi, unit, N, step = _boxes(n, args.scenario, 0)
        w_int = np.ones(n, dtype=np.int64)
        w_flt = np.full(n, 1.0 / n)
        widths = ((hi - lo)).astype(np.float64)
        calls = {
            "int": lambda k: k.spread_int(lo, hi, unit, N, w_int),
            "float": lambda k: k.spread_float(lo, hi, unit, N, w_flt, widths),
        }
        for kind, call in calls.items():
            ref = call(backends[0][1])
            for _, k in backends[1:]:
                out = call(k)
                assert all(np.array_equal(a, b) for a, b in zip(ref, out)), "backends disagree"
            times = [_time(lambda: call(k), args.repeat) for _, k in backends]
            print(f"{n:>8} {kind:>6} " + " ".join(f"{t * 1e3:>8.2f}ms" for t in times))


if __name__ == "__main__":
    main()
