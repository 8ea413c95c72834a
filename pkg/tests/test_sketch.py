import math
import warnings

import numpy as np
import pytest

import oracles
from aakit import rng
from aakit.linalg import ContractError
from aakit.sketch import block_krylov_sketch, krylov_default_s


def test_default_s_uses_natural_log():
    assert krylov_default_s(200) == math.ceil(math.log(200)) == 6
    assert krylov_default_s(3) == 2
    with pytest.raises(ContractError):
        krylov_default_s(1)


def test_exact_low_rank_is_recovered(gen):
    x = gen.standard_normal((40, 4)) @ gen.standard_normal((4, 90))
    sk = block_krylov_sketch(x, 4, 3, seed=1)
    assert sk.p == 4
    assert np.linalg.norm(x - sk.reconstruct()) < 1e-9 * np.linalg.norm(x)
    assert np.allclose(sk.basis.T @ sk.basis, np.eye(4), atol=1e-10)


def test_representation_preserves_inner_products(gen):
    x = gen.standard_normal((30, 3)) @ gen.standard_normal((3, 50))
    sk = block_krylov_sketch(x, 3, 2, seed=7)
    assert np.allclose(sk.x_tilde.T @ sk.x_tilde, x.T @ x, atol=1e-9)


def test_spectral_error_near_optimal(gen):
    x = oracles.decaying_matrix(60, 150, gen, rate=0.7)
    sk = block_krylov_sketch(x, 5, 5, seed=3)
    assert oracles.spectral(x - sk.reconstruct()) <= 1.1 * oracles.sigma(x, 6)


def test_s_is_capped_with_warning(gen):
    x = gen.standard_normal((10, 40))
    with pytest.warns(RuntimeWarning, match="reducing s"):
        sk = block_krylov_sketch(x, 4, 5, seed=0)
    assert sk.s == 2


def test_p_above_min_dim_rejected(gen):
    with pytest.raises(ContractError):
        block_krylov_sketch(gen.standard_normal((5, 20)), 6, 1, seed=0)


def test_rank_deficient_input_reduces_p(gen):
    x = gen.standard_normal((30, 2)) @ gen.standard_normal((2, 60))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sk = block_krylov_sketch(x, 5, 2, seed=0)
    assert sk.p == 2
    assert np.linalg.norm(x - sk.reconstruct()) < 1e-9 * np.linalg.norm(x)


def test_same_seed_same_sketch(gen):
    x = gen.standard_normal((25, 70))
    a = block_krylov_sketch(x, 3, 2, seed=11)
    b = block_krylov_sketch(x, 3, 2, seed=11)
    assert np.array_equal(a.x_tilde, b.x_tilde)
    assert np.array_equal(a.basis, b.basis)


def test_gaussian_columns_are_independent_substreams():
    full = rng.gaussian_matrix(50, 4, 9, 1)
    assert np.array_equal(full[:, 2], rng.stream(9, 1, 2).standard_normal(50))
