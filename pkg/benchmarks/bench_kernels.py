#!/usr/bin/env python3
"""Benchmark the compiled decision kernels against their pure-Python twins.

Times the colony search on expansions of several sizes and the token edit
distance on signature-sized sequences, then cross-checks that both give
bit-identical outputs.  Run from the repo root:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from spcsim import _kernels_py

try:
    from spcsim import _speedups
except ImportError:
    _speedups = None


def colony_case(n_layers: int, width: int, seed: int):
    sizes = np.full(n_layers, width, dtype=np.int64)
    sizes[0] = sizes[-1] = 1
    prev = np.concatenate([[1], sizes[:-1]])
    n_edges = int((prev * sizes).sum())
    rng = np.random.default_rng(seed)
    scalar = rng.random(n_edges)
    return sizes, scalar


def time_colony(impl, sizes, scalar, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl.run_colony(sizes, scalar, 16, 50, 1.0, 2.0, 0.1, 1.0, 1.0, 1e-3, 1e-6, 42)
        best = min(best, time.perf_counter() - t0)
    return best


def time_edit(impl, a, b, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(200):
            impl.token_edit_distance(a, b)
        best = min(best, time.perf_counter() - t0)
    return best / 200


def main():
    if _speedups is None:
        print("compiled kernels not available; run `pip install -e .` with a C toolchain")
        return

    print(f"{'case':<28}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for n_layers, width in [(5, 5), (18, 5), (24, 8)]:
        sizes, scalar = colony_case(n_layers, width, seed=n_layers)
        py = time_colony(_kernels_py, sizes, scalar, 3)
        cy = time_colony(_speedups, sizes, scalar, 3)
        r_py = _kernels_py.run_colony(sizes, scalar, 16, 50, 1.0, 2.0, 0.1, 1.0, 1.0, 1e-3, 1e-6, 42)
        r_cy = _speedups.run_colony(sizes, scalar, 16, 50, 1.0, 2.0, 0.1, 1.0, 1.0, 1e-3, 1e-6, 42)
        identical = (
            np.array_equal(r_py[0], r_cy[0]) and r_py[1] == r_cy[1] and np.array_equal(r_py[2], r_cy[2])
        )
        label = f"colony {n_layers}x{width}"
        print(f"{label:<28}{py * 1e3:>10.2f}ms{cy * 1e3:>10.2f}ms{py / cy:>9.1f}x"
              + ("" if identical else "  OUTPUT MISMATCH"))

    rng = np.random.default_rng(0)
    a = rng.integers(0, 5, size=21).tolist()
    b = rng.integers(0, 5, size=26).tolist()
    py = time_edit(_kernels_py, a, b, 3)
    cy = time_edit(_speedups, a, b, 3)
    same = _kernels_py.token_edit_distance(a, b) == _speedups.token_edit_distance(a, b)
    print(f"{'edit distance 21x26':<28}{py * 1e6:>10.2f}us{cy * 1e6:>10.2f}us{py / cy:>9.1f}x"
          + ("" if same else "  OUTPUT MISMATCH"))


if __name__ == "__main__":
    main()
