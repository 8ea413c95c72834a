"""Runtime switches read from the environment.

``AAKIT_NUMBA=0`` forces the pure-numpy kernels; ``AAKIT_WORKERS`` sets the
worker count (0 = auto, 1 = reproducibility mode); ``AAKIT_SEED`` overrides
any seed passed on the command line.
"""

import os

# the default layer probes TBB and warns about old versions; omp is always available
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None


def numba_enabled():
    if numba is None:
        return False
    return os.environ.get("AAKIT_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def worker_count():
    """Number of workers requested via ``AAKIT_WORKERS`` (0 means all cores)."""
    raw = os.environ.get("AAKIT_WORKERS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"AAKIT_WORKERS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("AAKIT_WORKERS must be >= 0")
    if n == 0:
        n = os.cpu_count() or 1
    return n


def reproducible_mode():
    return os.environ.get("AAKIT_WORKERS", "0").strip() == "1"


def seed_override(seed):
    raw = os.environ.get("AAKIT_SEED")
    if raw is None or raw.strip() == "":
        return seed
    return int(raw)


def apply_worker_count():
    """Push the worker count into numba's thread pool, if numba is active."""
    n = worker_count()
    if numba_enabled():
        n = min(n, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(n)
    return n
