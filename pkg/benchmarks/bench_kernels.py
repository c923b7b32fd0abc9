#!/usr/bin/env python3
"""Benchmark: compiled kernel backend against the numpy fallback.

Times the two hot kernels (weighted modular sum, Luxemburg bisection) over
piece-array sizes spanning small atomic spaces up to refined segments, plus an
end-to-end norm workload through the public API on both backends.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from orlicz_kit._kernels import pure

try:
    from orlicz_kit._kernels import _core as compiled
except ImportError:
    compiled = None

SIZES = [8, 32, 256, 4096, 65536]
FAMILIES = [("power", pure.POWER, 2.0, 1.0), ("exp_minus", pure.EXP_MINUS, 0.0, 1.0)]


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_modular(impl, kind, p, c, values, weights, loops):
    def run():
        for _ in range(loops):
            impl.weighted_modular(kind, p, c, None, None, values, weights, 0.37)
    return run


def bench_root(impl, kind, p, c, values, weights, loops):
    def run():
        for _ in range(loops):
            impl.luxemburg_root(kind, p, c, None, None, values, weights, 1e-10, 200)
    return run


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if compiled is None:
        print("compiled backend unavailable; showing the pure backend only")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<28}{'n':>8}{'pure':>12}{'compiled':>12}{'speedup':>9}")
    for name, kind, p, c in FAMILIES:
        for n in SIZES:
            values = rng.uniform(0.1, 3.0, size=n)
            weights = rng.uniform(0.01, 1.0, size=n)
            loops = max(1, 20000 // n)
            t_pure = timeit(bench_modular(pure, kind, p, c, values, weights, loops),
                            args.repeat) / loops
            row = f"{'modular/' + name:<28}{n:>8}{t_pure * 1e6:>10.1f}us"
            if compiled is not None:
                t_comp = timeit(bench_modular(compiled, kind, p, c, values, weights,
                                              loops), args.repeat) / loops
                row += f"{t_comp * 1e6:>10.1f}us{t_pure / t_comp:>8.1f}x"
            print(row)
    for name, kind, p, c in FAMILIES:
        for n in SIZES[:4]:
            values = rng.uniform(0.1, 3.0, size=n)
            weights = rng.uniform(0.01, 1.0, size=n)
            loops = max(1, 2000 // n)
            t_pure = timeit(bench_root(pure, kind, p, c, values, weights, loops),
                            args.repeat) / loops
            row = f"{'luxemburg_root/' + name:<28}{n:>8}{t_pure * 1e6:>10.1f}us"
            if compiled is not None:
                t_comp = timeit(bench_root(compiled, kind, p, c, values, weights,
                                           loops), args.repeat) / loops
                row += f"{t_comp * 1e6:>10.1f}us{t_pure / t_comp:>8.1f}x"
            print(row)

    print("\nend-to-end: 1500 Luxemburg norms on a 32-atom space", flush=True)
    script = (
        "import time, numpy as np\n"
        "from fractions import Fraction\n"
        "from orlicz_kit import OrliczFunction, luxemburg_norm\n"
        "from orlicz_kit.spaces import Atom, MeasureSpace\n"
        "from orlicz_kit.operators import random_simple_function\n"
        "import orlicz_kit\n"
        "rng = np.random.default_rng(1)\n"
        "space = MeasureSpace(tuple(Atom(f'a{i}', Fraction(i + 1, 32)) for i in range(32)))\n"
        "fs = [random_simple_function(space, rng) for _ in range(1500)]\n"
        "phi = OrliczFunction.power(2.0)\n"
        "t0 = time.perf_counter()\n"
        "for f in fs: luxemburg_norm(f, phi)\n"
        "print(f'  {orlicz_kit.BACKEND:>9}: {time.perf_counter() - t0:.3f}s')\n"
    )
    for env_flag in ({}, {"ORLICZ_KIT_PURE": "1"}):
        env = dict(os.environ)
        env.update(env_flag)
        subprocess.run([sys.executable, "-c", script], env=env, check=True)


if __name__ == "__main__":
    main()
