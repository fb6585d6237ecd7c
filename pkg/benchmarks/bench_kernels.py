"""Time the Cython kernels against the numpy fallback.

Run ``python3 benchmarks/bench_kernels.py [--rows N] [--repeat R]``. Each
kernel is timed on the same inputs under every importable backend, and the
script checks the outputs agree before reporting a speedup.
"""

import argparse
import timeit

import numpy as np

from centricae._backend import available_backends
from centricae.geometry import generate_artificial


def make_inputs(n_rows: int, seed: int):
    data = generate_artificial(n_rows, 0.01, seed)
    dev2 = data.features ** 2
    y = data.labels.astype(bool)
    neg, pos = np.ascontiguousarray(dev2[~y]), np.ascontiguousarray(dev2[y])
    w = np.random.default_rng(seed).uniform(0.1, 2.0, data.n_features)
    w_rest = w.copy()
    w_rest[3] = 0.0
    scores = np.sqrt(dev2 @ w)
    return {
        "auroc": lambda k: k.auroc(scores, data.labels),
        "weighted_sq_sum": lambda k: k.weighted_sq_sum(neg, w),
        "deformed_auroc": lambda k: k.deformed_auroc(neg, pos, w),
        "axis_auroc": lambda k: k.axis_auroc(neg @ w_rest, np.ascontiguousarray(neg[:, 3]),
                                             pos @ w_rest, np.ascontiguousarray(pos[:, 3]), 0.7),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy fallback is available")
    cases = make_inputs(args.rows, args.seed)
    print(f"rows={args.rows} repeat={args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{name + ' ms':>14}" for name in backends) + f"{'speedup':>10}")
    for kernel, fn in cases.items():
        times, outs = {}, {}
        for name, mod in backends.items():
            outs[name] = fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3
        if len(outs) > 1:
            a, b = (np.asarray(v, dtype=float) for v in outs.values())
            if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
                raise SystemExit(f"{kernel}: backends disagree")
        speed = f"{times['python'] / times['cython']:>9.2f}x" if "cython" in times else f"{'-':>10}"
        print(f"{kernel:<18}" + "".join(f"{t:>14.3f}" for t in times.values()) + speed)


if __name__ == "__main__":
    main()
