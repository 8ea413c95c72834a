"""Dense kernels shared by every stage.

Matrices follow the data convention ``x.shape == (d, N)``: one column per
point.  Arrays are plain float64 numpy arrays; column-stochastic factors are
validated (and clamped) through :func:`stochastic`.
"""

from typing import NamedTuple

import numpy as np

from aakit import kernels


class ContractError(ValueError):
    """Input violates an operation's precondition (shape, range, ...)."""


class NumericError(ArithmeticError):
    """An iterative routine failed to converge or produced non-finite values."""


class SVDFactors(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def truncate(self, p):
        return SVDFactors(self.u[:, :p], self.sigma[:p], self.v[:, :p])

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def as_dense(x, name="x"):
    """Validate a finite 2-D float64 matrix; copies only when needed."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {x.shape}")
    if not np.isfinite(x).all():
        bad = np.argwhere(~np.isfinite(x))[0]
        raise ContractError(f"{name} has a non-finite entry at {tuple(int(i) for i in bad)}")
    return x


def stochastic(a, tol=1e-10, name="matrix"):
    """Return ``a`` as a column-stochastic matrix.

    Entries in ``[-tol, 0)`` are clamped to zero; anything more negative, or a
    column sum further than ``tol`` from one, raises :class:`ContractError`.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim != 2:
        raise ContractError(f"{name} must be 2-D")
    if a.size and a.min() < -tol:
        raise ContractError(f"{name} has entry {a.min():.3e} < -{tol:g}")
    np.maximum(a, 0.0, out=a)
    sums = a.sum(axis=0)
    if a.shape[1] and np.abs(sums - 1.0).max() > tol:
        j = int(np.argmax(np.abs(sums - 1.0)))
        raise ContractError(f"{name} column {j} sums to {sums[j]!r}")
    return a


def is_stochastic(a, tol=1e-10):
    try:
        stochastic(a, tol)
    except ContractError:
        return False
    return True


def matmul(a, b):
    """Dense product ``a @ b`` with a shape check.

    Backed by BLAS; each output entry is owned by one thread, so the result
    does not depend on the worker count.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def qr_householder(a, rel_drop=1e-12):
    """Householder QR that drops numerically dependent columns.

    A column is dropped when the norm of its component orthogonal to the
    columns already kept is below ``rel_drop`` times the largest column norm.
    Returns ``(q, r)`` with ``q`` of shape ``(m, rank)`` and ``r`` of shape
    ``(rank, n)``; ``r`` is upper triangular when nothing was dropped and
    row-echelon otherwise.  The diagonal pivots are made positive.
    """
    a = as_dense(a, "a")
    m, n = a.shape
    if a.size == 0:
        return np.zeros((m, 0)), np.zeros((0, n))
    scale = float(np.sqrt((a * a).sum(axis=0)).max())
    if scale == 0.0:
        return np.zeros((m, 0)), np.zeros((0, n))
    q, r, pivots = kernels.householder_qr(np.ascontiguousarray(a), rel_drop * scale)
    signs = np.sign(r[np.arange(len(pivots)), pivots])
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


def svd_dense(a, max_sweeps=None):
    """Thin SVD by Golub-Kahan bidiagonalization and implicit-shift QR.

    Returns :class:`SVDFactors` with ``min(m, n)`` singular values sorted in
    nonincreasing order.  Raises :class:`NumericError` if the QR iteration
    exceeds ``max_sweeps`` (default ``100 * min(m, n)``).
    """
    a = as_dense(a, "a")
    m, n = a.shape
    r = min(m, n)
    if r == 0:
        return SVDFactors(np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0)))
    if max_sweeps is None:
        max_sweeps = 100 * r
    tall = m >= n
    work = np.ascontiguousarray(a if tall else a.T)
    u, w, v, sweeps, ok = kernels.svd_golub_kahan(work, max_sweeps)
    if not ok:
        nz = np.abs(w[w != 0])
        cond = nz.max() / nz.min() if nz.size else np.inf
        raise NumericError(
            f"SVD did not converge after {sweeps} sweeps (condition estimate {cond:.3e})")
    order = np.argsort(-w, kind="stable")
    u, w, v = u[:, order], w[order], v[:, order]
    if not tall:
        u, v = v, u
    return SVDFactors(np.ascontiguousarray(u), w, np.ascontiguousarray(v))


def spectral_norm(a, rtol=1e-10, max_iter=10_000):
    """Largest singular value by power iteration on ``a.T @ a``.

    Stops once the eigen-residual ``||G v - lam v||`` is below ``rtol * lam``.
    """
    a = as_dense(a, "a")
    if a.size == 0 or not np.any(a):
        return 0.0
    n = a.shape[1]
    # fixed, dense start vector: deterministic and almost surely not orthogonal
    # to the top right singular vector
    v = 1.0 + np.cos(np.arange(n) * 2.399963229728653)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        gv = a.T @ (a @ v)
        lam = float(v @ gv)
        nrm = np.linalg.norm(gv)
        if nrm == 0.0:
            # start vector in the null space; fall back to a coordinate sweep
            v = np.zeros(n)
            v[int(np.argmax((a * a).sum(axis=0)))] = 1.0
            continue
        if np.linalg.norm(gv - lam * v) <= rtol * lam:
            break
        v = gv / nrm
    return float(np.sqrt(max(lam, 0.0)))


def aa_objective(x, dictionary, a, b):
    """``||x - dictionary @ a @ b||_F / sqrt(N)``."""
    x = np.asarray(x, dtype=np.float64)
    dictionary = np.asarray(dictionary, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if dictionary.shape[0] != x.shape[0]:
        raise ContractError(f"dictionary has {dictionary.shape[0]} rows, x has {x.shape[0]}")
    if a.shape[0] != dictionary.shape[1]:
        raise ContractError(f"a has {a.shape[0]} rows, dictionary has {dictionary.shape[1]} columns")
    if b.shape[0] != a.shape[1]:
        raise ContractError(f"b has {b.shape[0]} rows, a has {a.shape[1]} columns")
    if b.shape[1] != x.shape[1]:
        raise ContractError(f"b has {b.shape[1]} columns, x has {x.shape[1]}")
    resid = x - (dictionary @ a) @ b
    return float(np.linalg.norm(resid) / np.sqrt(x.shape[1]))
