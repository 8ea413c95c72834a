"""Randomized block-Krylov rank-p sketching.

Builds ``K = [X S, (X X^T) X S, ..., (X X^T)^(s-1) X S]`` for a Gaussian
``S``, orthonormalizes it, and reads the rank-p representation off the SVD of
``X^T Q``:

    x_tilde = Sigma_emd[:p, :p] @ U_emd[:, :p].T      (p x N)
    basis   = Q @ V_emd[:, :p]                        (d x p)

so that ``basis @ x_tilde == basis @ basis.T @ X``.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from aakit import rng
from aakit.linalg import ContractError, NumericError, as_dense, qr_householder, svd_dense

log = logging.getLogger(__name__)


@dataclass
class SketchResult:
    x_tilde: np.ndarray
    basis: np.ndarray
    p: int
    s: int
    seed: int

    def reconstruct(self):
        return self.basis @ self.x_tilde


def krylov_default_s(n):
    """``ceil(ln n)``, never below 2."""
    if n < 2:
        raise ContractError("krylov_default_s needs n >= 2")
    return max(2, math.ceil(math.log(n)))


def block_krylov_sketch(x, p, s, seed, verify=True):
    x = as_dense(x)
    d, n = x.shape
    cap = min(d, n)
    if p < 1 or s < 1:
        raise ContractError(f"p and s must be >= 1 (got p={p}, s={s})")
    if p > cap:
        raise ContractError(f"p={p} exceeds min(d, N)={cap}")
    if p * s > cap:
        s_new = max(1, cap // p)
        warnings.warn(f"p*s={p * s} exceeds min(d, N)={cap}; reducing s from {s} to {s_new}",
                      RuntimeWarning, stacklevel=2)
        s = s_new

    start = rng.gaussian_matrix(n, p, seed, 0x4B52)
    block = x @ start
    blocks = []
    for j in range(s):
        if j:
            block = x @ (x.T @ blocks[-1])
        # re-orthonormalize each block so repeated products keep their span
        qj, _ = qr_householder(block)
        if qj.shape[1] == 0:
            break
        blocks.append(qj)
    if not blocks:
        raise NumericError("Krylov block vanished; is x zero?")
    q, _ = qr_householder(np.hstack(blocks))

    emd = svd_dense(x.T @ q)
    r = min(p, int(np.count_nonzero(emd.sigma > 0)), q.shape[1])
    if r < p:
        log.info("sketch rank reduced from %d to %d (numerical rank of the Krylov space)", p, r)
    x_tilde = emd.sigma[:r, None] * emd.u[:, :r].T
    basis = q @ emd.v[:, :r]
    out = SketchResult(x_tilde=x_tilde, basis=basis, p=r, s=s, seed=int(seed))
    if verify:
        _verify(out, x)
    return out


def _verify(sk, x):
    gram = sk.basis.T @ sk.basis
    if np.abs(gram - np.eye(sk.p)).max() > 1e-8:
        raise NumericError("sketch basis lost orthonormality")
    proj = sk.basis @ (sk.basis.T @ x)
    scale = max(np.linalg.norm(proj), np.finfo(float).tiny)
    if np.linalg.norm(sk.reconstruct() - proj) > 1e-7 * scale:
        raise NumericError("basis @ x_tilde does not match basis basis^T x")
