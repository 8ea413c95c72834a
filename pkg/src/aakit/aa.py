"""Archetypal analysis by alternating minimization.

Minimizes ``||x - dictionary @ A @ B||_F / sqrt(N)`` over column-stochastic
``A`` (n_dict x k) and ``B`` (k x N).  ``B`` is updated by projecting every
column of ``x`` onto conv(Z), ``Z = dictionary @ A``; ``A`` is updated one
archetype at a time (Gauss-Seidel), each step being a simplex least-squares
problem over the dictionary.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from aakit import rng
from aakit.linalg import ContractError, NumericError, aa_objective, as_dense, stochastic
from aakit.simplex import lipschitz_constant, solve_columns

log = logging.getLogger(__name__)

DEGENERATE_ROW = 1e-12
SNAP_TIE = 1e-9


@dataclass
class AAConfig:
    k: int
    rel_tol: float = 1e-3
    max_outer_iters: int = 200
    kmeans_iters: int = 25
    seed: int = 0
    degenerate_reset: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ContractError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.rel_tol < 1.0:
            raise ContractError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_outer_iters < 1:
            raise ContractError("max_outer_iters must be >= 1")


@dataclass
class AAModel:
    a: np.ndarray
    b: np.ndarray
    archetypes: np.ndarray
    objective_trace: list = field(default_factory=list)
    converged: bool = False
    info: dict = field(default_factory=dict)

    @property
    def k(self):
        return self.b.shape[0]

    @property
    def objective(self):
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    def to_dict(self):
        rows, cols = np.nonzero(self.a)
        return {
            "k": int(self.k),
            "objective_trace": [float(v) for v in self.objective_trace],
            "converged": bool(self.converged),
            "archetypes": [col.tolist() for col in self.archetypes.T],
            "a": {
                "shape": list(self.a.shape),
                "triplets": [[int(i), int(j), float(self.a[i, j])] for i, j in zip(rows, cols)],
            },
            "b": self.b.tolist(),
            "info": dict(self.info),
        }

    @classmethod
    def from_dict(cls, data):
        shape = tuple(data["a"]["shape"])
        a = np.zeros(shape)
        for i, j, v in data["a"]["triplets"]:
            a[int(i), int(j)] = v
        archetypes = np.array(data["archetypes"], dtype=np.float64).T
        return cls(a=a, b=np.array(data["b"], dtype=np.float64), archetypes=archetypes,
                   objective_trace=list(data["objective_trace"]), converged=bool(data["converged"]),
                   info=dict(data.get("info", {})))


class FitError(NumericError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = list(trace)


def _sq_dist(x, centers):
    # ||x_i - c_j||^2 for all pairs, shape (N, k)
    return np.maximum(
        (x * x).sum(axis=0)[:, None] - 2.0 * x.T @ centers + (centers * centers).sum(axis=0)[None, :],
        0.0,
    )


def kmeans_init(x, k, seed, iters=25):
    """k-means++ then Lloyd; each center snaps to its nearest unused data column.

    Returns the initial ``A`` (N x k) with one unit entry per column.
    """
    x = as_dense(x)
    n = x.shape[1]
    if not 1 <= k <= n:
        raise ContractError(f"k={k} must lie in [1, N={n}]")
    gen = rng.stream(seed, 0x4B4D)

    chosen = [int(gen.integers(n))]
    d2 = _sq_dist(x, x[:, chosen])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0.0:
            c = int(np.searchsorted(np.cumsum(d2), gen.random() * total, side="right"))
            c = min(c, n - 1)
        else:
            c = next(i for i in range(n) if i not in chosen)
        chosen.append(c)
        d2 = np.minimum(d2, _sq_dist(x, x[:, [c]])[:, 0])

    centers = x[:, chosen].copy()
    for _ in range(iters):
        labels = np.argmin(_sq_dist(x, centers), axis=1)
        new = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new[:, j] = x[:, members].mean(axis=1)
        if np.array_equal(new, centers):
            break
        centers = new

    dist = _sq_dist(x, centers)
    # a two-point cluster's mean is exactly equidistant from both members;
    # treat distances equal up to rounding as ties and take the lowest index
    scale = float((x * x).sum(axis=0).max()) + (centers * centers).sum(axis=0)
    free = np.ones(n, dtype=bool)
    picks = []
    for j in range(k):
        dj = np.where(free, dist[:, j], np.inf)
        tied = np.flatnonzero(dj <= dj.min() + SNAP_TIE * (dj.min() + scale[j]))
        picks.append(int(tied[0]))
        free[tied[0]] = False
    a = np.zeros((n, k))
    a[picks, np.arange(k)] = 1.0
    return a


def update_b(x, z, warm=None):
    """Projection coefficients of every column of ``x`` onto conv(z)."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.shape[0] != x.shape[0]:
        raise ContractError(f"z has {z.shape[0]} rows, x has {x.shape[0]}")
    b, _, _, _, _ = solve_columns(z, x, warm=warm)
    return b


def update_a_gauss_seidel(x, dictionary, a, b, lipschitz=None, degenerate_reset=True):
    """One Gauss-Seidel sweep over the archetypes; returns the new ``A``.

    Archetype i is re-fit against ``D_i = x - Z[:, -i] B[-i, :]`` with target
    ``D_i B[i, :]^T / ||B[i, :]||^2``.  An unused archetype (``B[i, :]`` ~ 0) is
    moved to the dictionary column nearest the worst-fit data column when
    ``degenerate_reset`` is set, otherwise left alone.
    """
    x = np.asarray(x, dtype=np.float64)
    dictionary = np.asarray(dictionary, dtype=np.float64)
    a = np.array(a, dtype=np.float64, copy=True)
    b = np.asarray(b, dtype=np.float64)
    k = a.shape[1]
    if lipschitz is None:
        lipschitz = lipschitz_constant(dictionary)
    z = dictionary @ a
    resid = x - z @ b
    for i in range(k):
        bi = b[i]
        nb2 = float(bi @ bi)
        if np.sqrt(nb2) < DEGENERATE_ROW:
            if degenerate_reset:
                worst = int(np.argmax((resid * resid).sum(axis=0)))
                target = x[:, worst]
                j = int(np.argmin(((dictionary - target[:, None]) ** 2).sum(axis=0)))
                old = z[:, i].copy()
                a[:, i] = 0.0
                a[j, i] = 1.0
                z[:, i] = dictionary[:, j]
                resid += np.outer(old - z[:, i], bi)
            continue
        d_i = resid + np.outer(z[:, i], bi)
        target = d_i @ bi / nb2
        col, _, _, _, _ = solve_columns(dictionary, target[:, None], warm=a[:, i:i + 1],
                                        lipschitz=lipschitz)
        a[:, i] = col[:, 0]
        z[:, i] = dictionary @ a[:, i]
        resid = d_i - np.outer(z[:, i], bi)
    return a


def fit(x, dictionary, cfg, init=None):
    """Alternate B- and A-updates until the relative decrease drops below ``cfg.rel_tol``.

    ``init`` is an optional starting ``A``; by default it comes from
    :func:`kmeans_init` on the dictionary columns.  The objective is recorded
    after every half-step; a last B-update follows the loop.
    """
    x = as_dense(x)
    dictionary = as_dense(dictionary, "dictionary")
    if dictionary.shape[0] != x.shape[0]:
        raise ContractError(f"dictionary has {dictionary.shape[0]} rows, x has {x.shape[0]}")
    if init is None:
        a = kmeans_init(dictionary, cfg.k, cfg.seed, cfg.kmeans_iters)
    else:
        a = stochastic(init, name="init")
        if a.shape != (dictionary.shape[1], cfg.k):
            raise ContractError(f"init has shape {a.shape}, expected {(dictionary.shape[1], cfg.k)}")
    lip = lipschitz_constant(dictionary)
    trace = []

    def record(a, b):
        obj = aa_objective(x, dictionary, a, b)
        trace.append(obj)
        if not np.isfinite(obj):
            raise FitError("objective became non-finite", trace)
        return obj

    b = update_b(x, dictionary @ a)
    prev = record(a, b)
    converged = False
    for it in range(cfg.max_outer_iters):
        if it:
            b = update_b(x, dictionary @ a, warm=b)
            record(a, b)
        a = update_a_gauss_seidel(x, dictionary, a, b, lip, cfg.degenerate_reset)
        obj = record(a, b)
        if prev == 0.0 or (prev - obj) / prev < cfg.rel_tol:
            converged = True
            break
        prev = obj
    b = update_b(x, dictionary @ a, warm=b)
    record(a, b)
    log.debug("fit: %d half-steps, objective %.6g", len(trace), trace[-1])
    return AAModel(a=a, b=b, archetypes=dictionary @ a, objective_trace=trace, converged=converged)
