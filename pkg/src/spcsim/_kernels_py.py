"""Pure-Python decision kernels.

Reference implementation of the two hot loops:

* `run_colony` - ant-colony shortest path over a layered decision graph;
* `token_edit_distance` - Levenshtein distance over integer token sequences.

`spcsim._speedups` contains compiled twins of both.  The two implementations
must stay bit-identical: the colony draws randomness from SplitMix64 streams
(one independent stream per (iteration, ant)), accumulates costs in walk
order, and special-cases the exponents 0/1/2 the same way, so every float
operation happens in the same order with the same operands in both versions.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import GOLDEN, MASK64, MIX1, mix64

IMPLEMENTATION = "python"


def token_edit_distance(a, b) -> int:
    """Levenshtein distance between two integer token sequences."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            cur[j] = sub if sub <= ins and sub <= dele else (ins if ins <= dele else dele)
        prev, cur = cur, prev
    return prev[lb]


def _pow_rows(x: np.ndarray, e: float) -> np.ndarray:
    # Exponents 0/1/2 map to exact elementwise ops; the compiled kernel
    # branches on the same cases so both produce identical bits.
    if e == 0.0:
        return np.ones_like(x)
    if e == 1.0:
        return x.copy()
    if e == 2.0:
        return x * x
    out = np.empty_like(x)
    flat_in = x.ravel()
    flat_out = out.ravel()
    for i in range(flat_in.shape[0]):
        flat_out[i] = math.pow(flat_in[i], e)
    return out


def run_colony(
    sizes: np.ndarray,
    scalar: np.ndarray,
    n_ants: int,
    n_iterations: int,
    alpha: float,
    beta: float,
    rho: float,
    q: float,
    tau0: float,
    tau_min: float,
    eta0: float,
    seed: int,
):
    """Ant System search for the cheapest start-to-end path.

    `sizes[i]` is the node count of layer i; the edge block feeding layer i
    holds sizes[i-1] * sizes[i] weights (layer -1 is the virtual start of
    width 1), flattened row-major in `scalar`.  Per iteration every ant walks
    start-to-end choosing successors with probability proportional to
    tau^alpha * eta^beta (eta = 1 / (edge + eta0)); afterwards all pheromone
    evaporates by (1 - rho), the iteration-best path receives q / its cost,
    and the floor tau_min is re-applied.

    Returns (best_path_indices, best_cost, pheromone) with the global best
    over all iterations; deterministic for a fixed seed.
    """
    n_layers = int(sizes.shape[0])
    prev_sizes = np.empty(n_layers, dtype=np.int64)
    prev_sizes[0] = 1
    prev_sizes[1:] = sizes[:-1]
    offsets = np.zeros(n_layers, dtype=np.int64)
    blocks = prev_sizes * sizes
    offsets[1:] = np.cumsum(blocks)[:-1]
    n_edges = int(blocks.sum())
    if scalar.shape[0] != n_edges:
        raise ValueError("edge weight array does not match layer sizes")

    eta = 1.0 / (scalar + eta0)
    tau = np.full(n_edges, float(tau0))

    best_idx = np.zeros(n_layers, dtype=np.int64)
    best_cost = math.inf
    path = np.zeros(n_layers, dtype=np.int64)
    it_best = np.zeros(n_layers, dtype=np.int64)

    for it in range(n_iterations):
        w = _pow_rows(tau, alpha) * _pow_rows(eta, beta)
        # Per-row cumulative weights (row = predecessor node of a layer).
        cums = []
        for i in range(n_layers):
            block = w[offsets[i] : offsets[i] + blocks[i]].reshape(prev_sizes[i], sizes[i])
            cums.append(np.cumsum(block, axis=1))

        it_cost = math.inf
        for ant in range(n_ants):
            state = mix64((seed + GOLDEN * (it + 1) + MIX1 * (ant + 1)) & MASK64)
            prev = 0
            cost = 0.0
            for i in range(n_layers):
                size = int(sizes[i])
                row = cums[i][prev]
                total = row[size - 1]
                if total <= 0.0:
                    k = size - 1
                else:
                    state = (state + GOLDEN) & MASK64
                    u = (mix64(state) >> 11) * 2.0**-53
                    r = u * total
                    k = int(np.searchsorted(row, r, side="left"))
                    if k >= size:
                        k = size - 1
                cost += float(scalar[offsets[i] + prev * size + k])
                path[i] = k
                prev = k
            if cost < it_cost:
                it_cost = cost
                it_best[:] = path

        tau *= 1.0 - rho
        delta = q / max(it_cost, eta0)
        prev = 0
        for i in range(n_layers):
            k = int(it_best[i])
            tau[offsets[i] + prev * int(sizes[i]) + k] += delta
            prev = k
        np.maximum(tau, tau_min, out=tau)

        if it_cost < best_cost:
            best_cost = it_cost
            best_idx[:] = it_best

    return best_idx, best_cost, tau
