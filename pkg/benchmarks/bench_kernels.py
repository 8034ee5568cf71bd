"""Compare the pure-Python and compiled kernel backends.

Times the two hot loops (CART tree growth, SMO dual solve) on inputs
shaped like the bundled experiment, checks that both backends agree
bit-for-bit on every timed instance, and prints a side-by-side table.

Run from a checkout with the package installed:

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from stackgen._kernels import available_backends, use_backend
from stackgen import _kernels


def _time_best(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _tree_workload(rng):
    # train-fold scale of the bundled table: ~390 rows, 41 columns
    X = np.ascontiguousarray(rng.normal(size=(390, 41)))
    y = (rng.uniform(size=390) < 0.33).astype(np.int64)
    return X, y


def _smo_workload(rng):
    X = rng.normal(size=(390, 41))
    y = (rng.uniform(size=390) < 0.33)
    ypm = np.where(y, 1.0, -1.0)
    sq = np.sum(X * X, axis=1)
    gamma = 1.0 / (41 * X.var())
    K = np.exp(-gamma * (sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)))
    return np.ascontiguousarray(K), ypm


def bench(repeats):
    rng = np.random.default_rng(0)
    Xt, yt = _tree_workload(rng)
    K, ypm = _smo_workload(rng)

    jobs = {
        "grow_tree (390x41, depth 10, 20 trees)": lambda: [
            _kernels.grow_tree(Xt, yt, seed, 10, 2, 6, True) for seed in range(20)
        ],
        "smo_solve (390x390 Gram, C=1)": lambda: _kernels.smo_solve(
            K, ypm, 1.0, 1e-3, 1e-6, 1000
        ),
    }

    names = available_backends()
    results = {}
    outputs = {}
    for name in names:
        with use_backend(name):
            for job, fn in jobs.items():
                outputs.setdefault(job, {})[name] = fn()
                results[(job, name)] = _time_best(fn, repeats)

    # agreement check: identical outputs regardless of backend
    for job, per_backend in outputs.items():
        vals = list(per_backend.values())
        for other in vals[1:]:
            flat_a = np.concatenate([np.ravel(np.asarray(p, dtype=np.float64)) for p in _flatten(vals[0])])
            flat_b = np.concatenate([np.ravel(np.asarray(p, dtype=np.float64)) for p in _flatten(other)])
            assert flat_a.shape == flat_b.shape and (flat_a == flat_b).all(), (
                f"backend outputs differ on {job}"
            )

    width = max(len(j) for j in jobs)
    header = f"{'workload':<{width}}  " + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for job in jobs:
        row = f"{job:<{width}}  "
        times = [results[(job, n)] for n in names]
        row += "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(names) == 2:
            slow, fast = max(times), min(times)
            row += f"{slow / fast:>9.1f}x"
        print(row)
    print(f"\nbest of {repeats} runs per cell; outputs verified identical across backends")


def _flatten(obj):
    """Yield the array-like leaves of a kernel result (tuples of arrays/scalars)."""
    if isinstance(obj, (tuple, list)):
        for item in obj:
            yield from _flatten(item)
    else:
        yield obj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats per cell")
    args = ap.parse_args()
    have = available_backends()
    if "native" not in have:
        print("note: compiled backend not installed; timing pure backend only")
    bench(max(1, args.repeats))


if __name__ == "__main__":
    main()
