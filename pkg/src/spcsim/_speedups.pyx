# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled decision kernels; bit-identical twins of `spcsim._kernels_py`.

Keep every float operation in the same order with the same operands as the
pure-Python version: same SplitMix64 streams, same pow special cases for
exponents 0/1/2, same sequential cumulative sums, and the same tie handling
in the roulette pick.  The parity tests compare both implementations exactly.
"""

import numpy as np

from libc.math cimport INFINITY, pow

IMPLEMENTATION = "compiled"

cdef double INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53
cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long MIX1 = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long MIX2 = 0x94D049BB133111EBULL


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


def token_edit_distance(a, b):
    """Levenshtein distance between two integer token sequences."""
    cdef long long[::1] av = np.asarray(a, dtype=np.int64)
    cdef long long[::1] bv = np.asarray(b, dtype=np.int64)
    cdef Py_ssize_t la = av.shape[0], lb = bv.shape[0]
    if la == 0:
        return int(lb)
    if lb == 0:
        return int(la)
    cdef long long[::1] prev = np.arange(lb + 1, dtype=np.int64)
    cdef long long[::1] cur = np.zeros(lb + 1, dtype=np.int64)
    cdef long long[::1] tmp
    cdef Py_ssize_t i, j
    cdef long long ai, sub, ins, dele, best
    for i in range(1, la + 1):
        cur[0] = i
        ai = av[i - 1]
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (0 if ai == bv[j - 1] else 1)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[lb])


cdef inline double _powx(double x, double e) nogil:
    # exponents 0/1/2 use exact elementwise ops, mirroring the Python twin
    if e == 0.0:
        return 1.0
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    return pow(x, e)


def run_colony(
    sizes_in,
    scalar_in,
    int n_ants,
    int n_iterations,
    double alpha,
    double beta,
    double rho,
    double q,
    double tau0,
    double tau_min,
    double eta0,
    seed,
):
    """Ant System search; see the pure-Python twin for the full contract."""
    cdef long long[::1] sizes = np.asarray(sizes_in, dtype=np.int64)
    cdef double[::1] scalar = np.ascontiguousarray(scalar_in, dtype=np.float64)
    cdef Py_ssize_t n_layers = sizes.shape[0]

    prev_sizes_np = np.empty(n_layers, dtype=np.int64)
    prev_sizes_np[0] = 1
    prev_sizes_np[1:] = np.asarray(sizes_in, dtype=np.int64)[:-1]
    blocks_np = prev_sizes_np * np.asarray(sizes_in, dtype=np.int64)
    offsets_np = np.zeros(n_layers, dtype=np.int64)
    offsets_np[1:] = np.cumsum(blocks_np)[:-1]
    cdef long long[::1] prev_sizes = prev_sizes_np
    cdef long long[::1] blocks = blocks_np
    cdef long long[::1] offsets = offsets_np
    cdef long long n_edges = int(blocks_np.sum())
    if scalar.shape[0] != n_edges:
        raise ValueError("edge weight array does not match layer sizes")

    eta_np = 1.0 / (np.asarray(scalar_in, dtype=np.float64) + eta0)
    tau_np = np.full(int(n_edges), float(tau0))
    w_np = np.empty(int(n_edges), dtype=np.float64)
    cum_np = np.empty(int(n_edges), dtype=np.float64)
    cdef double[::1] eta = eta_np
    cdef double[::1] tau = tau_np
    cdef double[::1] w = w_np
    cdef double[::1] cum = cum_np

    best_idx_np = np.zeros(n_layers, dtype=np.int64)
    path_np = np.zeros(n_layers, dtype=np.int64)
    it_best_np = np.zeros(n_layers, dtype=np.int64)
    cdef long long[::1] best_idx = best_idx_np
    cdef long long[::1] path = path_np
    cdef long long[::1] it_best = it_best_np

    cdef double best_cost = INFINITY
    cdef double it_cost, cost, total, u, r, acc, delta
    cdef unsigned long long state, seed_u = <unsigned long long> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t it, ant, i, k, j
    cdef long long prev, size, base

    for it in range(n_iterations):
        for j in range(n_edges):
            w[j] = _powx(tau[j], alpha) * _powx(eta[j], beta)
        # per-row cumulative weights (row = predecessor node of a layer)
        for i in range(n_layers):
            size = sizes[i]
            for prev in range(prev_sizes[i]):
                base = offsets[i] + prev * size
                acc = 0.0
                for k in range(size):
                    acc = acc + w[base + k]
                    cum[base + k] = acc

        it_cost = INFINITY
        for ant in range(n_ants):
            state = _mix64(seed_u + GOLDEN * (<unsigned long long> (it + 1))
                           + MIX1 * (<unsigned long long> (ant + 1)))
            prev = 0
            cost = 0.0
            for i in range(n_layers):
                size = sizes[i]
                base = offsets[i] + prev * size
                total = cum[base + size - 1]
                if total <= 0.0:
                    k = size - 1
                else:
                    state = state + GOLDEN
                    u = <double> (_mix64(state) >> 11) * INV_2_53
                    r = u * total
                    k = 0
                    while k < size and cum[base + k] < r:
                        k += 1
                    if k >= size:
                        k = size - 1
                cost = cost + scalar[base + k]
                path[i] = k
                prev = k
            if cost < it_cost:
                it_cost = cost
                for i in range(n_layers):
                    it_best[i] = path[i]

        for j in range(n_edges):
            tau[j] = tau[j] * (1.0 - rho)
        delta = q / (it_cost if it_cost > eta0 else eta0)
        prev = 0
        for i in range(n_layers):
            k = it_best[i]
            tau[offsets[i] + prev * sizes[i] + k] = tau[offsets[i] + prev * sizes[i] + k] + delta
            prev = k
        for j in range(n_edges):
            if tau[j] < tau_min:
                tau[j] = tau_min

        if it_cost < best_cost:
            best_cost = it_cost
            for i in range(n_layers):
                best_idx[i] = it_best[i]

    return best_idx_np, float(best_cost), tau_np
