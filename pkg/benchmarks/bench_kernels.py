"""Compiled core against the numpy fallback on the three hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 20000] [--grid 64]

Both implementations are imported directly, so the AV2_PURE_PYTHON switch
does not matter here. Reports best-of-``repeat`` wall time and checks that
the two agree before timing.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from av2 import _kernels_py
from av2.family import Av2Params

try:
    from av2 import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n, grid):
    rng = np.random.default_rng(0)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    poles = np.array([0, 1, 0.4 + 1.1j, -0.8 - 0.3j, 2j], dtype=complex)
    numer = np.array([1, -0.5j, 0.25], dtype=complex)
    g = Av2Params(0.8 + 0.3j, 1.2 - 2.0j)
    m = g.mobius
    lam = complex(g.lam)
    x, y = np.meshgrid(np.linspace(-4, 4, grid), np.linspace(-8, 8, grid))
    betas = (x + 1j * y + 1e-3).ravel()
    return {
        "qd_eval": ("qd_eval", (z, poles, numer)),
        "pushforward K=64": ("pushforward", (z[: n // 10], m.a, m.b, m.c, m.d, g.beta, False, poles, numer, 64)),
        f"escape_classify {grid}x{grid}": (
            "escape_classify", (betas, m.a, m.c, m.d, lam, False, 200, 1e10, 1e-9, 16)
        ),
    }


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(u, v) for u, v in zip(a, b))
    if np.issubdtype(np.asarray(a).dtype, np.integer):
        return np.array_equal(a, b)
    return np.allclose(a, b, rtol=1e-12, atol=1e-14)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=20000, help="points for qd_eval (a tenth for pushforward)")
    ap.add_argument("--grid", type=int, default=64, help="side of the beta grid for escape_classify")
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled core not available; build it with pip install -e . --no-build-isolation")
        return 1
    print(f"{'kernel':28s} {'compiled':>11s} {'numpy':>11s} {'speedup':>8s}")
    for label, (name, a) in cases(args.n, args.grid).items():
        fc, fp = getattr(_kernels, name), getattr(_kernels_py, name)
        if not agree(fc(*a), fp(*a)):
            print(f"{label}: implementations disagree")
            return 1
        tc = best_time(lambda: fc(*a), args.repeat)
        tp = best_time(lambda: fp(*a), args.repeat)
        print(f"{label:28s} {tc * 1e3:9.2f}ms {tp * 1e3:9.2f}ms {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
