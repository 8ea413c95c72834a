"""Approximate archetypal analysis end to end, plus the exact-SVD baseline."""

import time
from dataclasses import dataclass, field

import numpy as np

from aakit import rng
from aakit.aa import AAConfig, AAModel, fit
from aakit.hull import HullSupport, approx_convex_hull
from aakit.linalg import ContractError, aa_objective, as_dense, svd_dense
from aakit.sketch import SketchResult, block_krylov_sketch, krylov_default_s


class ConfigError(ValueError):
    """The requested configuration cannot be fitted (e.g. k exceeds the support)."""


@dataclass
class AAAConfig:
    k: int
    p: int = 20
    s: int = None
    m: int = 10_000
    eta: float = 0.003
    seed: int = 0
    aa: AAConfig = None
    # "curvature": the k support points with the most hits; "kmeans": k-means on X_T
    init: str = "curvature"

    def __post_init__(self):
        if self.p < 1 or self.m < 1:
            raise ContractError("p and m must be >= 1")
        if not 0.0 < self.eta < 3.0:
            raise ContractError(f"eta must lie in (0, 3), got {self.eta}")
        if self.aa is None:
            self.aa = AAConfig(k=self.k, seed=self.seed)
        elif self.aa.k != self.k:
            raise ContractError(f"aa.k={self.aa.k} disagrees with k={self.k}")
        if self.init not in ("curvature", "kmeans"):
            raise ContractError(f"unknown init {self.init!r}")


@dataclass
class AAAResult:
    model: AAModel
    support: HullSupport
    sketch: SketchResult
    timings: dict = field(default_factory=dict)
    reduced_objective: float = float("nan")
    original_objective: float = float("nan")

    def to_dict(self, include_timings=True):
        out = {
            "model": self.model.to_dict(),
            "support": {
                "indices": [int(i) for i in self.support.indices],
                "cum_curvature_estimate": float(self.support.cum_curvature_estimate),
                "eta": float(self.support.eta),
                "L": int(self.support.L),
            },
            "sketch": {"p": int(self.sketch.p), "s": int(self.sketch.s), "seed": int(self.sketch.seed)},
            "reduced_objective": float(self.reduced_objective),
            "original_objective": float(self.original_objective),
        }
        out["timings"] = dict(self.timings) if include_timings else None
        return out


def _ms(t0):
    return 1e3 * (time.perf_counter() - t0)


def fit_aaa(x, cfg):
    """Sketch, reduce to an approximate hull, fit there, then expand ``A``."""
    x = as_dense(x)
    n = x.shape[1]
    s = cfg.s if cfg.s is not None else krylov_default_s(n)
    timings = {}

    t0 = time.perf_counter()
    sk = block_krylov_sketch(x, cfg.p, s, rng.child_seed(cfg.seed, 1))
    timings["sketch_ms"] = _ms(t0)

    t0 = time.perf_counter()
    support = approx_convex_hull(sk.x_tilde, cfg.m, cfg.eta, rng.child_seed(cfg.seed, 2))
    timings["hull_ms"] = _ms(t0)

    t_size = support.indices.size
    if cfg.k > t_size:
        raise ConfigError(
            f"k={cfg.k} exceeds the support size |T|={t_size}; increase eta or the projection count M")

    t0 = time.perf_counter()
    init = None
    if cfg.init == "curvature":
        top = np.argsort(-support.hits, kind="stable")[:cfg.k]
        init = np.zeros((t_size, cfg.k))
        init[top, np.arange(cfg.k)] = 1.0
    reduced = fit(sk.x_tilde, sk.x_tilde[:, support.indices], cfg.aa, init=init)
    timings["fit_ms"] = _ms(t0)

    a = np.zeros((n, cfg.k))
    a[support.indices] = reduced.a
    model = AAModel(a=a, b=reduced.b, archetypes=x @ a,
                    objective_trace=reduced.objective_trace, converged=reduced.converged)
    return AAAResult(
        model=model,
        support=support,
        sketch=sk,
        timings=timings,
        reduced_objective=reduced.objective,
        original_objective=aa_objective(x, x, a, reduced.b),
    )


def svd_rank_for_variance(sigma, variance_keep):
    """Smallest p whose leading squared singular values reach the requested share."""
    if not 0.0 < variance_keep <= 1.0:
        raise ContractError(f"variance_keep must lie in (0, 1], got {variance_keep}")
    energy = np.cumsum(sigma ** 2)
    total = energy[-1] if energy.size else 0.0
    if total == 0.0:
        return 1
    if variance_keep == 1.0:
        # full variance: keep every nonzero direction
        return max(1, int(np.count_nonzero(sigma > sigma[0] * 1e-12)))
    return int(np.searchsorted(energy, variance_keep * total, side="left")) + 1


def fit_svd_aa(x, k, variance_keep, cfg, rank=None):
    """Fit on the truncated exact-SVD representation ``Sigma_p V_p^T``.

    ``rank`` overrides the variance rule.  The returned model's objective
    trace is on the representation; ``model.info`` holds the rank used and
    the objective recomputed on ``x``.
    """
    x = as_dense(x)
    if cfg.k != k:
        raise ContractError(f"cfg.k={cfg.k} disagrees with k={k}")
    factors = svd_dense(x)
    p = rank if rank is not None else svd_rank_for_variance(factors.sigma, variance_keep)
    rep = factors.sigma[:p, None] * factors.v[:, :p].T
    reduced = fit(rep, rep, cfg)
    info = {"rank": int(p), "original_objective": aa_objective(x, x, reduced.a, reduced.b)}
    return AAModel(a=reduced.a, b=reduced.b, archetypes=x @ reduced.a,
                   objective_trace=reduced.objective_trace, converged=reduced.converged, info=info)


def explained_variance(x, model):
    """``1 - ||x - x A B||_F^2 / sum_i ||x_i - mean||^2``."""
    x = as_dense(x)
    resid = x - (x @ model.a) @ model.b
    rss = float((resid * resid).sum())
    centered = x - x.mean(axis=1, keepdims=True)
    tss = float((centered * centered).sum())
    if tss == 0.0:
        if rss == 0.0:
            return 1.0
        raise ValueError("explained variance undefined for constant data with nonzero residual")
    return 1.0 - rss / tss
