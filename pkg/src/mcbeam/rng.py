"""Deterministic seeding utilities.

All randomness in the package flows through counter-based Philox streams
keyed by ``(seed, stream index)``. Derived seeds are produced with
splitmix64, so experiment cells and realizations get independent,
reproducible streams no matter in which order (or on how many workers)
they are executed.
"""

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x):
    """One splitmix64 round: uint64 -> uint64 (Steele et al. finalizer)."""
    x = (x + _GOLDEN) & MASK64
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(*parts):
    """Fold integers into a single 64-bit seed.

    Order-sensitive: ``derive_seed(a, b) != derive_seed(b, a)`` in general.
    Used as the documented mixing function master seed -> (cell,
    realization) -> per-purpose sub-seeds.
    """
    state = 0
    for part in parts:
        state = splitmix64((state ^ (int(part) & MASK64)) & MASK64)
    return state


def stream(seed, index=0):
    """Philox generator for sub-stream ``index`` of ``seed``.

    The (seed, index) pair is the full 128-bit Philox key, so distinct
    indices give statistically independent streams.
    """
    key = [int(seed) & MASK64, int(index) & MASK64]
    return np.random.Generator(np.random.Philox(key=key))
