"""Compare the compiled and numpy per-mu kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from ramanqkd import _kernels_py
from ramanqkd.scenario import load_preset

try:
    from ramanqkd import _kernels
except ImportError:
    _kernels = None


def params_at(name: str, length_km: float) -> np.ndarray:
    return np.asarray(load_preset(name).link_state(length_km).params_vector(), dtype=float)


def best_of(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _kernels is None:
        print("compiled kernel not built; only the numpy path is available")
    cases = [("table4", 45.0), ("fig19a", 60.0), ("table6", 105.0)]
    print(f"{'scenario':<10}{'n_mu':>10}{'numpy [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for name, L in cases:
        p = params_at(name, L)
        for n in (200, 10_000, 1_000_000):
            mu = np.geomspace(1e-4, 1.0, n)
            a = _kernels_py.evaluate_mu(mu, p)
            t_py = best_of(lambda: _kernels_py.evaluate_mu(mu, p), args.repeat)
            if _kernels is None:
                print(f"{name:<10}{n:>10}{t_py * 1e6:>14.1f}{'-':>14}{'-':>10}")
                continue
            b = _kernels.evaluate_mu(mu, p)
            for x, y in zip(a, b):
                np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-300)
            t_cy = best_of(lambda: _kernels.evaluate_mu(mu, p), args.repeat)
            print(f"{name:<10}{n:>10}{t_py * 1e6:>14.1f}{t_cy * 1e6:>14.1f}{t_py / t_cy:>10.2f}")


if __name__ == "__main__":
    main()
