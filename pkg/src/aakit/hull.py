"""Approximate convex hulls from random projections.

Each uniformly random direction ``v`` "hits" the column maximizing ``v . x_j``;
hit frequencies estimate the curvature (normal-cone measure) of every
extreme point.  The support keeps the fewest highest-curvature points whose
estimated cumulative curvature exceeds ``1 - eta/3``, and never fewer than
``d + 1``.
"""

import math
from dataclasses import dataclass

import numpy as np

from aakit import kernels, rng
from aakit.linalg import ContractError, as_dense
from aakit.simplex import lipschitz_constant, solve_columns

# directions are drawn in fixed-size blocks, each from its own substream, so
# counts depend only on (seed, m) and not on how blocks are scheduled
BLOCK = 4096


class DegenerateGeometryError(ValueError):
    pass


@dataclass
class HitCounts:
    counts: np.ndarray
    total: int


@dataclass
class HullSupport:
    indices: np.ndarray
    cum_curvature_estimate: float
    eta: float
    L: int
    hits: np.ndarray = None


def sample_sphere_direction(d, gen):
    """Uniform unit vector in R^d from the generator ``gen``."""
    if d < 1:
        raise ContractError("d must be >= 1")
    while True:
        v = gen.standard_normal(d)
        nrm = np.linalg.norm(v)
        if nrm > 0.0:
            return v / nrm


def _direction_block(d, size, seed, block_index):
    g = rng.stream(seed, 0x48554C4C, block_index)
    v = g.standard_normal((size, d))
    nrm = np.linalg.norm(v, axis=1)
    zero = nrm == 0.0
    while zero.any():
        v[zero] = g.standard_normal((int(zero.sum()), d))
        nrm = np.linalg.norm(v, axis=1)
        zero = nrm == 0.0
    return v / nrm[:, None]


def estimate_hit_counts(x, m, seed):
    x = as_dense(x)
    d, n = x.shape
    if m < 1 or n < 1:
        raise ContractError("need m >= 1 and at least one point")
    xt = np.ascontiguousarray(x.T)
    counts = np.zeros(n, dtype=np.int64)
    for b, start in enumerate(range(0, m, BLOCK)):
        size = min(BLOCK, m - start)
        dirs = _direction_block(d, size, seed, b)
        winners = kernels.argmax_projections(dirs, xt)
        counts += np.bincount(winners, minlength=n)
    return HitCounts(counts=counts, total=int(m))


def select_support(hits, eta, d):
    if not 0.0 < eta < 3.0:
        raise ContractError(f"eta must lie in (0, 3), got {eta}")
    counts = np.asarray(hits.counts)
    n = counts.size
    if hits.total < 1 or n == 0:
        raise ContractError("empty hit counts")
    order = np.argsort(-counts, kind="stable")
    mass = np.cumsum(counts[order]) / hits.total
    above = np.flatnonzero(mass > 1.0 - eta / 3.0)
    L = int(above[0]) + 1 if above.size else n
    L = max(L, min(d + 1, n))
    chosen = np.sort(order[:L])
    return HullSupport(
        indices=chosen,
        cum_curvature_estimate=float(counts[chosen].sum() / hits.total),
        eta=float(eta),
        L=L,
        hits=counts[chosen].copy(),
    )


def approx_convex_hull(x, m, eta, seed):
    x = as_dense(x)
    hits = estimate_hit_counts(x, m, seed)
    return select_support(hits, eta, x.shape[0])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points):
    """Andrew's monotone chain; returns hull vertex indices counter-clockwise.

    Points lying on hull edges are not vertices.  Exact duplicates resolve to
    the lowest index.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[1]
    order = sorted(range(n), key=lambda i: (pts[0, i], pts[1, i], i))
    uniq = []
    for i in order:
        if uniq and pts[0, i] == pts[0, uniq[-1]] and pts[1, i] == pts[1, uniq[-1]]:
            continue
        uniq.append(i)
    if len(uniq) < 3:
        return uniq

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and _cross(pts[:, out[-2]], pts[:, out[-1]], pts[:, i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(uniq)
    upper = chain(reversed(uniq))
    return lower[:-1] + upper[:-1]


def exact_curvature_2d(points):
    """Exact curvature of every point of a planar cloud.

    A hull vertex's curvature is its exterior angle divided by 2*pi; all other
    points get 0.  The values sum to one.
    """
    pts = as_dense(points, "points")
    if pts.shape[0] != 2:
        raise ContractError("exact_curvature_2d needs a 2 x N matrix")
    n = pts.shape[1]
    if n < 3:
        raise DegenerateGeometryError("need at least three points")
    hull = convex_hull_2d(pts)
    if len(hull) < 3:
        raise DegenerateGeometryError("points are collinear")
    kappa = np.zeros(n)
    h = len(hull)
    for t in range(h):
        prev_pt = pts[:, hull[t - 1]]
        cur = pts[:, hull[t]]
        nxt = pts[:, hull[(t + 1) % h]]
        e_in = cur - prev_pt
        e_out = nxt - cur
        turn = math.atan2(e_in[0] * e_out[1] - e_in[1] * e_out[0], e_in @ e_out)
        kappa[hull[t]] = turn / (2.0 * math.pi)
    return kappa


def hausdorff_to_subhull(x, support):
    """Hausdorff distance between conv(x[:, T]) and conv(x).

    conv(x_T) is contained in conv(x), so this is the largest distance from a
    column of ``x`` to conv(x_T).
    """
    x = as_dense(x)
    idx = np.asarray(getattr(support, "indices", support), dtype=np.int64)
    if idx.size == 0:
        raise ContractError("support must be non-empty")
    z = x[:, idx]
    _, resid, _, _, _ = solve_columns(z, x, lipschitz=lipschitz_constant(z))
    return float(resid.max())


def mc_projection_bound(q, eta, delta_gap, n, delta):
    """Projection count sufficient for the truncation guarantee.

    ``max(324 q^2 / eta^2, 4 / gap^2) * log(3 N / sqrt(delta))``
    """
    return math.ceil(max(324.0 * q * q / eta ** 2, 4.0 / delta_gap ** 2)
                     * math.log(3.0 * n / math.sqrt(delta)))


def hausdorff_bound(eta, d, radius):
    """``min(sqrt(2) pi eta^(1/(d-1)), 2) * R`` for the returned support."""
    return min(math.sqrt(2.0) * math.pi * eta ** (1.0 / (d - 1)), 2.0) * radius


def omitted_curvature_bound(omega, d, radius):
    """Hausdorff bound in terms of the curvature ``omega`` left outside the subset."""
    return min(math.sqrt(2.0) * math.pi * (2.0 * omega) ** (1.0 / (d - 1)), 2.0) * radius
