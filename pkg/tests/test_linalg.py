import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from aakit import kernels
from aakit.linalg import (ContractError, aa_objective, as_dense, is_stochastic, matmul,
                          qr_householder, spectral_norm, stochastic, svd_dense)


def _random_stochastic(gen, rows, cols):
    return gen.dirichlet(np.ones(rows), size=cols).T


@pytest.mark.parametrize("shape", [(20, 12), (12, 20), (7, 7), (50, 3), (1, 5), (5, 1)])
def test_svd_matches_lapack(gen, shape):
    a = gen.standard_normal(shape)
    f = svd_dense(a)
    ref = np.linalg.svd(a, compute_uv=False)
    assert np.allclose(f.sigma, ref, rtol=1e-12, atol=1e-12)
    assert np.all(np.diff(f.sigma) <= 0)
    assert np.allclose(f.reconstruct(), a, atol=1e-12)
    r = min(shape)
    assert np.allclose(f.u.T @ f.u, np.eye(r), atol=1e-12)
    assert np.allclose(f.v.T @ f.v, np.eye(r), atol=1e-12)


def test_svd_eckart_young(gen):
    a = oracles.decaying_matrix(30, 40, gen, rate=0.7)
    f = svd_dense(a)
    for p in (1, 3, 8):
        err = oracles.spectral(a - f.truncate(p).reconstruct())
        assert abs(err - f.sigma[p]) <= 1e-8 * f.sigma[p]


def test_svd_rank_deficient_and_zero(gen):
    b = gen.standard_normal((15, 3)) @ gen.standard_normal((3, 10))
    f = svd_dense(b)
    assert np.all(f.sigma[3:] < 1e-12 * f.sigma[0])
    z = svd_dense(np.zeros((4, 6)))
    assert np.all(z.sigma == 0)


def test_svd_both_backends_agree(gen):
    a = np.ascontiguousarray(gen.standard_normal((25, 9)))
    outs = [kernels.backend(name).svd_golub_kahan(a.copy(), 900) for name in ("numba", "numpy")]
    for u, w, v, _, ok in outs:
        assert ok
        assert np.allclose((u * w) @ v.T, a, atol=1e-12)
    assert np.allclose(np.sort(outs[0][1]), np.sort(outs[1][1]), rtol=1e-12)


def test_qr_orthonormal_and_reconstructs(gen):
    a = gen.standard_normal((30, 8))
    q, r = qr_householder(a)
    assert q.shape == (30, 8)
    assert np.allclose(q.T @ q, np.eye(8), atol=1e-13)
    assert np.allclose(q @ r, a, atol=1e-12)
    assert np.all(np.diag(r) > 0)
    assert np.allclose(np.tril(r, -1), 0)


def test_qr_drops_dependent_columns(gen):
    a = gen.standard_normal((20, 9))
    a = np.hstack([a, a[:, [2]]])
    q, r = qr_householder(a)
    assert q.shape[1] == 9
    assert np.allclose(q @ r, a, atol=1e-12)
    q0, _ = qr_householder(np.zeros((5, 3)))
    assert q0.shape == (5, 0)


def test_qr_both_backends_agree(gen):
    a = np.ascontiguousarray(gen.standard_normal((15, 6)))
    q1, r1, _ = kernels.backend("numba").householder_qr(a.copy(), 1e-12)
    q2, r2, _ = kernels.backend("numpy").householder_qr(a.copy(), 1e-12)
    assert np.allclose(q1 @ r1, q2 @ r2, atol=1e-12)
    assert np.allclose(np.abs(r1), np.abs(r2), atol=1e-12)


def test_spectral_norm_matches_lapack(gen):
    for shape in [(10, 4), (4, 10), (30, 30)]:
        a = gen.standard_normal(shape)
        assert spectral_norm(a) == pytest.approx(oracles.spectral(a), rel=1e-9)
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_stochastic_validation():
    good = np.array([[0.5, 1.0], [0.5, 0.0]])
    assert is_stochastic(good)
    clamped = stochastic(np.array([[1.0 + 5e-11], [-5e-11]]))
    assert clamped.min() == 0.0
    with pytest.raises(ContractError):
        stochastic(np.array([[0.5], [0.4]]))
    with pytest.raises(ContractError):
        stochastic(np.array([[1.2], [-0.2]]))


def test_stochastic_closed_under_product(gen):
    a = _random_stochastic(gen, 7, 4)
    b = _random_stochastic(gen, 4, 9)
    assert is_stochastic(a @ b)


def test_as_dense_rejects_bad_input():
    with pytest.raises(ContractError):
        as_dense(np.ones(3))
    with pytest.raises(ContractError, match=r"\(1, 0\)"):
        as_dense(np.array([[1.0, 2.0], [np.nan, 1.0]]))


def test_matmul_shape_check(gen):
    a, b = gen.standard_normal((3, 4)), gen.standard_normal((4, 2))
    assert np.allclose(matmul(a, b), a @ b)
    with pytest.raises(ContractError):
        matmul(a, a)


def test_objective_invariant_under_svd_representation(gen):
    x = gen.standard_normal((6, 40))
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    rep = s[:, None] * vt
    for _ in range(5):
        a = _random_stochastic(gen, 40, 3)
        b = _random_stochastic(gen, 3, 40)
        assert aa_objective(rep, rep, a, b) == pytest.approx(aa_objective(x, x, a, b), rel=1e-9)


def test_objective_checks_shapes(gen):
    x = gen.standard_normal((3, 5))
    with pytest.raises(ContractError):
        aa_objective(x, x, np.ones((4, 2)) / 4, np.ones((2, 5)) / 2)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31))
def test_svd_property_reconstructs(m, n, seed):
    a = np.random.default_rng(seed).standard_normal((m, n))
    f = svd_dense(a)
    assert np.allclose(f.reconstruct(), a, atol=1e-11)
    assert np.all(f.sigma >= 0)
