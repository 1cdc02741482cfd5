"""Compare the numba and pure-numpy backends on the integer contraction kernel.

    python3 benchmarks/bench_kernels.py --cells 16 --repeat 5

Each case is run once to warm the JIT cache, then timed. Results from both
backends are compared exactly before any timing is reported.
"""

import argparse
import random
import time

import numpy as np

from entangled_t1 import get_backend, set_backend
from entangled_t1._backend import HAVE_NUMBA
from entangled_t1._kernels import product_sum
from entangled_t1.form import evaluate_form
from entangled_t1.generators import random_inputs, random_perfect_kernel
from entangled_t1.graph import box_graph, cup_graph


def cup_operands(rng, cells):
    """Dense kernel on four axes plus the three edge factors of the cup graph."""
    K = rng.integers(-9, 10, size=(cells,) * 4)
    F = [rng.integers(-9, 10, size=(cells, cells)) for _ in range(3)]
    return [
        (K, ("x1", "x2", "y1", "y2")),
        (F[0], ("x1", "y1")),
        (F[1], ("x1", "y2")),
        (F[2], ("x2", "y1")),
    ]


def timed(fn, repeat):
    fn()  # warm up (JIT compile, caches)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_case(name, fn, repeat):
    rows = {}
    for backend in ("numpy", "numba"):
        if backend == "numba" and not HAVE_NUMBA:
            continue
        set_backend(backend)
        rows[backend] = timed(fn, repeat)
    results = [out for _, out in rows.values()]
    same = all(np.array_equal(np.asarray(results[0]), np.asarray(r)) for r in results[1:])
    line = f"{name:<34}"
    for backend, (t, _) in rows.items():
        line += f" {backend}={t * 1e3:9.3f} ms"
    if len(rows) == 2:
        line += f"  speedup={rows['numpy'][0] / rows['numba'][0]:6.2f}x"
    print(line + ("" if same else "  MISMATCH"))
    return same


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=16, help="cells per axis for the raw kernel cases")
    ap.add_argument("--resolution", type=int, default=3, help="grid scale for the form cases")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    start = get_backend()
    rng = np.random.default_rng(args.seed)
    ok = True
    ops = cup_operands(rng, args.cells)
    ok &= run_case(f"full sum, cup, {args.cells}/axis", lambda: product_sum(ops, []), args.repeat)
    ok &= run_case(f"adjoint grid, cup, {args.cells}/axis",
                   lambda: product_sum(ops[:1] + ops[2:], ["x1", "y1"]), args.repeat)

    prng = random.Random(args.seed)
    for g, label in ((cup_graph(), "cup"), (box_graph(), "box")):
        K = random_perfect_kernel(prng, 2, 2, args.resolution)
        fs = random_inputs(prng, g, args.resolution)
        for plan in ("naive", "auto"):
            ok &= run_case(f"evaluate_form {label} plan={plan}",
                           lambda: evaluate_form(K, g, fs, plan=plan), args.repeat)
    set_backend(start)
    if not ok:
        raise SystemExit("backends disagree")


if __name__ == "__main__":
    main()
