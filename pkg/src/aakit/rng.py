"""Seeded random streams.

Every random draw in the package goes through :func:`stream`, which keys a
counter-based Philox generator by ``(seed, *path)``.  Two calls with the same
key produce identical variates regardless of call order or worker count.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def _entropy(seed, path):
    words = [int(seed) & _MASK64]
    words.extend(int(p) & _MASK64 for p in path)
    return words


def stream(seed, *path):
    """Independent generator for the substream named by ``path``."""
    ss = np.random.SeedSequence(_entropy(seed, path))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed, *path):
    """Derive a 63-bit integer seed for a named substage."""
    ss = np.random.SeedSequence(_entropy(seed, path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def gaussian_matrix(rows, cols, seed, *path):
    """Standard normal ``rows x cols`` matrix; column ``j`` uses substream ``(*path, j)``.

    Filling per column keeps the result independent of how columns are
    partitioned across workers.
    """
    out = np.empty((rows, cols), order="F")
    for j in range(cols):
        out[:, j] = stream(seed, *path, j).standard_normal(rows)
    return out
