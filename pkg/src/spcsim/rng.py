"""Seeded integer RNG helpers (SplitMix64).

All stochastic behaviour in the package flows through these functions so that
runs are reproducible from a single integer seed and so that the compiled and
pure-Python decision kernels draw bit-identical random streams.  Streams are
derived, not shared: `stream_state(seed, a, b)` gives an independent state for
any (a, b) pair, which makes per-ant / per-run streams order-independent.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Finalizer of SplitMix64; a 64-bit bijective scrambler."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, a: int = 0, b: int = 0) -> int:
    """Initial SplitMix64 state for the (a, b) substream of `seed`."""
    return mix64((seed + GOLDEN * (a + 1) + MIX1 * (b + 1)) & MASK64)


def next_u64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; returns (value, new_state)."""
    state = (state + GOLDEN) & MASK64
    return mix64(state), state


def next_double(state: int) -> tuple[float, int]:
    """Uniform double in [0, 1) with 53 random bits; returns (value, new_state)."""
    v, state = next_u64(state)
    return (v >> 11) * 2.0**-53, state


def uniform(state: int, lo: float, hi: float) -> tuple[float, int]:
    u, state = next_double(state)
    return lo + (hi - lo) * u, state


def randint(state: int, n: int) -> tuple[int, int]:
    """Integer in [0, n) by modulo reduction (bias immaterial for n << 2^64)."""
    v, state = next_u64(state)
    return v % n, state
