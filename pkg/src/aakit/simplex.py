"""Least squares over the probability simplex.

``min_b ||z b - y||_2  s.t.  b >= 0, sum(b) = 1``, solved by accelerated
projected gradient with function-value restart.  The same solver handles the
k-dimensional projection-coefficient problems and the dictionary-sized
archetype problems.
"""

from dataclasses import dataclass

import numpy as np

from aakit import kernels
from aakit.linalg import ContractError, spectral_norm

ZERO_SNAP = 1e-12
KKT_TOL = 1e-10
MAX_ITER = 50_000
# power iteration approaches ||z||^2 from below; keep the step safely short
_LIPSCHITZ_PAD = 1.0 + 1e-8


@dataclass
class QPSolution:
    point: np.ndarray
    residual_norm: float
    kkt_residual: float
    iterations: int
    converged: bool


def snap(b):
    """Zero entries below ``ZERO_SNAP`` and renormalize columns to sum to one."""
    b = np.where(b < ZERO_SNAP, 0.0, b)
    sums = b.sum(axis=0)
    return b / sums


def project_onto_simplex(v):
    """Euclidean projection onto ``{w : w >= 0, sum(w) = 1}`` (sort and threshold)."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ContractError("project_onto_simplex needs a non-empty 1-D vector")
    if not np.isfinite(v).all():
        raise ContractError("project_onto_simplex needs finite input")
    return snap(kernels.project_simplex(np.ascontiguousarray(v)))


def lipschitz_constant(z):
    return spectral_norm(z) ** 2 * _LIPSCHITZ_PAD


def kkt_residual(z, y, b):
    """Projected-gradient residual ``||b - P(b - grad f(b))||_inf`` per column."""
    y2 = y if y.ndim == 2 else y[:, None]
    b2 = b if b.ndim == 2 else b[:, None]
    g = z.T @ (z @ b2 - y2)
    r = np.max(np.abs(b2 - kernels.project_simplex_columns(np.ascontiguousarray(b2 - g))), axis=0)
    return r if y.ndim == 2 else float(r[0])


def solve_columns(z, y, warm=None, lipschitz=None, tol=KKT_TOL, max_iter=MAX_ITER):
    """Solve the simplex least-squares problem for every column of ``y``.

    Returns ``(b, residual_norms, kkt, iterations, converged)`` where ``b`` is
    ``(k, n)`` with snapped, exactly feasible columns.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d, k = z.shape
    if y.shape[0] != d:
        raise ContractError(f"z has {d} rows but right-hand sides have {y.shape[0]}")
    if k < 1:
        raise ContractError("z needs at least one column")
    n = y.shape[1]
    if warm is None:
        b0 = np.full((k, n), 1.0 / k)
    else:
        b0 = np.asarray(warm, dtype=np.float64)
        if b0.shape != (k, n):
            raise ContractError(f"warm start has shape {b0.shape}, expected {(k, n)}")
    if lipschitz is None:
        lipschitz = lipschitz_constant(z)
    ynorm = np.sqrt((y * y).sum(axis=0))
    if lipschitz == 0.0:
        b = np.full((k, n), 1.0 / k)
        return b, ynorm, np.zeros(n), np.zeros(n, dtype=np.int64), np.ones(n, dtype=bool)
    tols = tol * np.maximum(1.0, ynorm)
    b, _, iters, conv = kernels.apg_batch(
        z, np.ascontiguousarray(y), np.ascontiguousarray(b0), float(lipschitz), tols, int(max_iter))
    b = snap(b)
    resid = np.sqrt(((z @ b - y) ** 2).sum(axis=0))
    kkt = kkt_residual(z, y, b)
    return b, resid, kkt, iters, conv


def simplex_lsq(z, y, warm=None, lipschitz=None):
    """Single right-hand side version of :func:`solve_columns`."""
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or y.ndim != 1 or z.shape[0] != y.shape[0]:
        raise ContractError(f"shape mismatch: z {z.shape}, y {y.shape}")
    w = None if warm is None else np.asarray(warm, dtype=np.float64)[:, None]
    b, resid, kkt, iters, conv = solve_columns(z, y[:, None], w, lipschitz)
    return QPSolution(b[:, 0], float(resid[0]), float(kkt[0]), int(iters[0]), bool(conv[0]))
