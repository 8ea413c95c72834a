"""Synthetic data with known structure."""

import math

import numpy as np
from scipy.optimize import nnls

from aakit import rng
from aakit.linalg import ContractError


def polytope(n, d, k, noise=0.0, seed=0):
    """Dirichlet(1) mixtures of ``k`` Gaussian vertices in R^d, plus Gaussian noise.

    The vertices themselves are included among the ``n`` points (at random
    positions), so conv(x) equals the planted polytope when ``noise == 0``.
    Returns ``(x, vertices, vertex_index)``.
    """
    if not 1 <= k <= n:
        raise ContractError(f"need 1 <= k <= n, got k={k}, n={n}")
    gen = rng.stream(seed, 0x504F4C59)
    vertices = gen.standard_normal((d, k))
    weights = gen.dirichlet(np.ones(k), size=n).T
    slots = gen.permutation(n)[:k]
    weights[:, slots] = np.eye(k)
    x = vertices @ weights
    if noise > 0.0:
        x = x + noise * gen.standard_normal((d, n))
    return x, vertices, slots


def lowrank_noise(n, d, r, noise=0.0, seed=0):
    """Rank-``r`` Gaussian factor product (unit-variance entries) plus ``noise`` * N(0, 1)."""
    if r < 1 or r > min(n, d):
        raise ContractError(f"rank r={r} must lie in [1, min(n, d)]")
    gen = rng.stream(seed, 0x4C52)
    left = gen.standard_normal((d, r))
    right = gen.standard_normal((r, n))
    x = left @ right / math.sqrt(r)
    if noise > 0.0:
        x = x + noise * gen.standard_normal((d, n))
    return x


def polygon_from_profile(profile, seed=0):
    """Convex polygon whose vertex curvatures equal ``profile``.

    Vertex j turns the boundary by ``2 pi profile[j]``; edge lengths are the
    smallest nonnegative correction to unit lengths that closes the polygon.
    The result is randomly rotated and centred on the origin.
    """
    kappa = np.asarray(profile, dtype=np.float64)
    if kappa.ndim != 1 or kappa.size < 3:
        raise ContractError("need at least three curvature values")
    if np.any(kappa <= 0) or abs(kappa.sum() - 1.0) > 1e-9:
        raise ContractError("curvatures must be positive and sum to 1")
    if np.any(kappa >= 0.5):
        raise ContractError("a curvature of 1/2 or more cannot be realised by a bounded polygon")
    h = kappa.size
    # edge j leaves vertex j; its direction accumulates the turns of vertices 1..j
    turns = 2.0 * math.pi * kappa
    heading = np.concatenate([[0.0], np.cumsum(turns[1:])])
    dirs = np.vstack([np.cos(heading), np.sin(heading)])
    extra, _ = nnls(dirs, -dirs.sum(axis=1))
    lengths = 1.0 + extra
    edges = dirs * lengths
    verts = np.concatenate([np.zeros((2, 1)), np.cumsum(edges[:, :-1], axis=1)], axis=1)
    verts -= verts.mean(axis=1, keepdims=True)
    theta = rng.stream(seed, 0x524F54).uniform(0.0, 2.0 * math.pi)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return rot @ verts


def polygon2d(profile, n_interior=0, seed=0):
    """Polygon vertices followed by strictly interior points.

    Returns ``(points, kappa)`` where ``kappa`` is the exact curvature of every
    point (zero for interior ones).
    """
    verts = polygon_from_profile(profile, seed)
    h = verts.shape[1]
    gen = rng.stream(seed, 0x494E54)
    w = gen.dirichlet(np.ones(h), size=n_interior).T if n_interior else np.zeros((h, 0))
    # pull interior points toward the centroid so none lands on the boundary
    inner = 0.9 * (verts @ w) + 0.1 * verts.mean(axis=1, keepdims=True)
    points = np.concatenate([verts, inner], axis=1)
    kappa = np.concatenate([np.asarray(profile, dtype=np.float64), np.zeros(n_interior)])
    return points, kappa


def regular_profile(h):
    return np.full(h, 1.0 / h)
