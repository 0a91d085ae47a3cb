"""Time the numba kernels against the pure-numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Both kernel modules are imported directly, so the TLBOUNDS_DISABLE_NUMBA flag
does not matter here. The first numba call (JIT compile or cache load) is
excluded from timings. Outputs are compared before anything is timed.
"""

import argparse
import timeit

import numpy as np

from tlbounds import _kernels_numba as nb
from tlbounds import _kernels_numpy as npk


def cases(quick):
    rng = np.random.default_rng(0)
    k, n = (64, 32) if quick else (256, 128)
    M = rng.integers(0, 2, size=(k, n)).astype(np.float64)
    v = rng.dirichlet(np.ones(n)) - rng.dirichlet(np.ones(n))
    idx = rng.integers(0, n, size=2000)
    targets = rng.integers(0, 2, size=idx.size).astype(np.float64)
    weights = np.full(idx.size, 1.0 / idx.size)
    m = 12 if quick else 18
    V = np.ascontiguousarray(M[:32, :m])
    signs = rng.choice([-1.0, 1.0], size=(10_000, m))
    return [
        (f"pair_gap_max       k={k} n={n}", "pair_gap_max", (M, v, False)),
        (f"pair_gap_max sq    k={k} n={n}", "pair_gap_max", (M, v, True)),
        (f"member_abs_risks   k={k} m={idx.size}", "member_abs_risks", (M, idx, targets, weights)),
        (f"rademacher_exact   k=32 m={m}", "rademacher_exact_total", (V,)),
        (f"rademacher_sup     k=32 draws=10000", "rademacher_sup_values", (V, signs)),
    ]


def agree(a, b):
    if isinstance(a, tuple):
        return np.isclose(a[0], b[0], rtol=1e-12, atol=1e-14) and a[1:] == b[1:]
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()

    print(f"{'kernel':40s} {'numpy (ms)':>12s} {'numba (ms)':>12s} {'speedup':>9s}")
    for label, name, inputs in cases(args.quick):
        f_np, f_nb = getattr(npk, name), getattr(nb, name)
        if not agree(f_np(*inputs), f_nb(*inputs)):
            raise SystemExit(f"backends disagree on {name}")
        times = []
        for f in (f_np, f_nb):
            t = timeit.Timer(lambda: f(*inputs))
            n, _ = t.autorange()
            times.append(min(t.repeat(args.repeat, n)) / n * 1e3)
        print(f"{label:40s} {times[0]:12.3f} {times[1]:12.3f} {times[0] / times[1]:8.1f}x")


if __name__ == "__main__":
    main()
