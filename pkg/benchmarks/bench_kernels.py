"""Time the pure-Python kernels against the compiled extension.

Every timed call is first checked for bit-identical output across the two
backends, so the numbers compare the same computation. Run from the repo
root after an editable install:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --rows 400 --repeats 7
"""

from __future__ import annotations

import argparse
import sys
import time

from tempoframe.kernels import pure
from tempoframe.rng import Lcg

try:
    from tempoframe.kernels import _compiled as compiled
except ImportError:
    compiled = None


def _time(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _cases(rows: int, cols: int, iters: int):
    rng = Lcg(4242)
    x_flat = [rng.uniform_in(-2.0, 2.0) for _ in range(rows * cols)]
    y = [rng.uniform_in(-3.0, 3.0) for _ in range(rows)]
    labels = [float(rng.coin()) for _ in range(rows)]
    times = [float(1 + rng.below(rows // 2 + 1)) for _ in range(rows)]
    occurred = [rng.coin() for _ in range(rows)]
    occurred[0] = 1
    risks = [rng.uniform_in(-1.0, 1.0) for _ in range(rows)]
    penalty = [0.0] + [1.0] * (cols - 1)

    lu_n = min(rows, 60)
    a_flat = [rng.uniform_in(-2.0, 2.0) for _ in range(lu_n * lu_n)]
    for i in range(lu_n):
        a_flat[i * lu_n + i] += lu_n
    b = [rng.uniform_in(-2.0, 2.0) for _ in range(lu_n)]

    return [
        ("lu_solve", f"{lu_n}x{lu_n}", "lu_solve", (lu_n, a_flat, b)),
        ("ridge_normal_solve", f"{rows}x{cols}", "ridge_normal_solve",
         (rows, cols, x_flat, y, 0.1, penalty)),
        ("logistic_gd", f"{rows}x{cols}, {iters} iters", "logistic_gd",
         (rows, cols, x_flat, labels, 0.2, iters)),
        ("cox_gd", f"{rows}x{cols}, {iters} iters", "cox_gd",
         (rows, cols, x_flat, times, occurred, 0.05, iters, 1e-6)),
        ("concordance_counts", f"n={rows}", "concordance_counts",
         (rows, times, occurred, risks)),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=300)
    parser.add_argument("--cols", type=int, default=8)
    parser.add_argument("--iters", type=int, default=150)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    if compiled is None:
        print("compiled backend is not available; build it with "
              "`pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    header = f"{'kernel':<22}{'case':<24}{'pure':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, case, attr, call_args in _cases(args.rows, args.cols,
                                               args.iters):
        pure_fn = getattr(pure, attr)
        comp_fn = getattr(compiled, attr)
        if pure_fn(*call_args) != comp_fn(*call_args):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 1
        t_pure = _time(pure_fn, call_args, args.repeats)
        t_comp = _time(comp_fn, call_args, args.repeats)
        print(f"{label:<22}{case:<24}{t_pure:>10.4f} s{t_comp:>10.4f} s"
              f"{t_pure / t_comp:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
