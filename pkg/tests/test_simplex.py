import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from aakit import kernels
from aakit.linalg import ContractError
from aakit.simplex import (KKT_TOL, kkt_residual, lipschitz_constant, project_onto_simplex,
                           simplex_lsq, solve_columns)


def test_projection_examples():
    assert np.allclose(project_onto_simplex([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5])
    assert np.array_equal(project_onto_simplex([10.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
    with pytest.raises(ContractError):
        project_onto_simplex([])


def test_projection_beats_dense_dirichlet_sample(gen):
    v = gen.standard_normal(6) * 0.5
    w = project_onto_simplex(v)
    cloud = gen.dirichlet(np.ones(6), size=1_000_000)
    best = np.sqrt(((cloud - v) ** 2).sum(axis=1)).min()
    dist = np.linalg.norm(w - v)
    # the exact projection is never beaten, and the sample's best is close
    assert dist <= best + 1e-12
    assert best - dist < 0.05


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30))
def test_projection_is_feasible_and_idempotent(values):
    w = project_onto_simplex(values)
    assert w.min() >= 0.0
    assert abs(w.sum() - 1.0) < 1e-10
    assert np.allclose(project_onto_simplex(w), w, atol=1e-12)


def test_projection_backends_agree(gen):
    v = np.ascontiguousarray(gen.standard_normal((9, 50)) * 3)
    a = kernels.backend("numba").project_simplex_columns(v)
    b = kernels.backend("numpy").project_simplex_columns(v)
    assert np.allclose(a, b, atol=1e-14)


def test_vertex_target_recovers_indicator(gen):
    z = gen.standard_normal((5, 4))
    sol = simplex_lsq(z, z[:, 2])
    assert sol.converged
    assert sol.residual_norm < 1e-8
    assert np.allclose(sol.point, np.eye(4)[2], atol=1e-8)


def test_midpoint_of_two_columns(gen):
    z = gen.standard_normal((3, 2))
    sol = simplex_lsq(z, z.mean(axis=1))
    assert np.allclose(sol.point, [0.5, 0.5], atol=1e-9)
    assert sol.residual_norm < 1e-9


def test_identity_against_barycentric_grid():
    z = np.eye(3)
    y = np.array([0.5, 0.4, -2.0])
    sol = simplex_lsq(z, y)
    step = 1e-3
    i, j = np.meshgrid(np.arange(1001), np.arange(1001), indexing="ij")
    mask = i + j <= 1000
    pts = np.stack([i[mask] * step, j[mask] * step, 1.0 - (i[mask] + j[mask]) * step])
    grid_best = ((pts - y[:, None]) ** 2).sum(axis=0).min()
    assert np.sum((sol.point - y) ** 2) <= grid_best + 1e-12
    assert grid_best - np.sum((sol.point - y) ** 2) < 1e-5


def test_zero_matrix_gives_uniform():
    y = np.array([3.0, 4.0])
    sol = simplex_lsq(np.zeros((2, 4)), y)
    assert np.allclose(sol.point, 0.25)
    assert sol.residual_norm == pytest.approx(5.0)


def test_iteration_cap_is_a_flag_not_an_error(gen):
    z = gen.standard_normal((4, 30))
    y = gen.standard_normal(4) * 5
    b, _, kkt, iters, conv = solve_columns(z, y[:, None], max_iter=3)
    assert not conv[0] and iters[0] == 3
    assert b.min() >= 0 and abs(b.sum() - 1) < 1e-10
    assert kkt[0] == pytest.approx(kkt_residual(z, y, b[:, 0]))


@pytest.mark.parametrize("trial", range(40))
def test_matches_active_set_enumeration(trial):
    gen = np.random.default_rng(trial)
    k = int(gen.integers(1, 5))
    d = int(gen.integers(1, 8))
    z = gen.standard_normal((d, k)) * gen.uniform(0.1, 5)
    y = gen.standard_normal(d) * gen.uniform(0.1, 5)
    sol = simplex_lsq(z, y)
    ref, _ = oracles.simplex_lsq_enumerate(z, y)
    assert np.sum((z @ sol.point - y) ** 2) - ref < 1e-8
    grad = z.T @ (z @ sol.point - y)
    assert (grad - grad @ sol.point).min() >= -1e-6


def test_warm_start_never_increases_objective(gen):
    z = gen.standard_normal((6, 40))
    y = gen.standard_normal((6, 25)) * 3
    cold, r_cold, *_ = solve_columns(z, y)
    warm = gen.dirichlet(np.ones(40), size=25).T
    f_warm = np.linalg.norm(z @ warm - y, axis=0)
    b, r, *_ = solve_columns(z, y, warm=warm, max_iter=5)
    assert np.all(r <= f_warm + 1e-12)
    assert np.allclose(solve_columns(z, y, warm=cold)[1], r_cold, atol=1e-9)


def test_backends_reach_same_objective(gen):
    z = np.ascontiguousarray(gen.standard_normal((5, 12)))
    y = np.ascontiguousarray(gen.standard_normal((5, 30)) * 2)
    b0 = np.full((12, 30), 1.0 / 12)
    lip = lipschitz_constant(z)
    tol = KKT_TOL * np.maximum(1.0, np.linalg.norm(y, axis=0))
    outs = [kernels.backend(n).apg_batch(z, y, b0.copy(), lip, tol, 50_000) for n in ("numba", "numpy")]
    assert outs[0][3].all() and outs[1][3].all()
    assert np.allclose(outs[0][1], outs[1][1], rtol=1e-9, atol=1e-12)


def test_shape_mismatch_raises(gen):
    with pytest.raises(ContractError):
        simplex_lsq(gen.standard_normal((3, 2)), np.ones(4))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_solution_is_always_a_simplex_vector(d, k, seed):
    g = np.random.default_rng(seed)
    sol = simplex_lsq(g.standard_normal((d, k)), g.standard_normal(d))
    p = sol.point
    assert p.min() >= 0.0
    assert abs(p.sum() - 1.0) < 1e-10
    assert np.all((p == 0) | (p >= 1e-12))
    assert sol.kkt_residual >= 0 and sol.residual_norm >= 0
