"""Time the compiled and pure-Python lattice-sum kernels on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each case is
the full ``lattice_weight_sums`` call for one dilate ``k``, so the numbers
include the shared setup as well as the kernel loop.
"""

import argparse
import time

from kstab import kernels
from kstab.toric import MaxAffine, facet_description, lattice_weight_sums

CASES = {
    "square k=200": ([[0, 0], [1, 0], [0, 1], [1, 1]], MaxAffine((((1, 0), 0), ((0, 1), 0))), 200),
    "trapezoid k=150": ([[0, 0], [2, 0], [1, 1], [0, 1]], MaxAffine((((1, 0), 0), ((0, 1), 0))), 150),
    "cube k=30": ([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)],
                  MaxAffine((((1, 0, 0), 0), ((0, 1, 0), 0), ((0, 0, 1), 0))), 30),
}


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends available: {', '.join(backends)}")
    print(f"{'case':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, (verts, f, k) in CASES.items():
        P = facet_description(verts)
        R = max(f(v) for v in P.vertices)
        times, outs = [], []
        for b in backends:
            with kernels.use_backend(b):
                t, out = best_of(lambda: lattice_weight_sums(P, f, R, k), args.repeat)
            times.append(t)
            outs.append(out)
        assert all(o == outs[0] for o in outs), f"backends disagree on {name}"
        speed = f"{times[-1] / times[0]:.1f}x" if len(times) == 2 else "-"
        print(f"{name:<18}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times) + f"{speed:>10}")


if __name__ == "__main__":
    main()
