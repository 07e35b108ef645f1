import numpy as np
import pytest

from gave.errors import NegativeTheta, SingularMatrix, ZeroDiagonal
from gave.linalg import Matrix
from gave.problems import S1_STENCIL, S2_STENCIL, block_banded, example_4_1
from gave.splittings import (
    Splitting,
    dlu,
    gauss_seidel_splitting,
    jacobi_splitting,
    omega_diag,
    relaxed_splitting,
    scalar_splitting,
    shift_splitting,
    shifted_splitting,
    solve_strategy_for,
    trivial_splitting,
    weighted_lower_splitting,
)


def dense(m):
    return m.to_dense()


def test_dlu_2x2():
    parts = dlu(Matrix.dense([[2.0, -1.0], [-3.0, 4.0]]))
    assert np.array_equal(dense(parts.d), np.diag([2.0, 4.0]))
    assert np.array_equal(dense(parts.l), [[0, 0], [3, 0]])
    assert np.array_equal(dense(parts.u), [[0, 1], [0, 0]])


def test_dlu_identity():
    parts = dlu(Matrix.identity(3))
    assert np.array_equal(dense(parts.d), np.eye(3))
    assert not dense(parts.l).any() and not dense(parts.u).any()


def test_dlu_s2_block():
    s2 = block_banded(4, 1, S2_STENCIL, {})
    parts = dlu(s2)
    assert np.array_equal(dense(parts.d), 3 * np.eye(4))
    assert np.array_equal(dense(parts.l), np.tril(np.ones((4, 4)), -1))
    assert np.array_equal(dense(parts.u), np.triu(np.ones((4, 4)), 1))
    assert np.array_equal(dense(parts.reconstruct()), dense(s2))


def test_weighted_lower_diagonal_input():
    s = weighted_lower_splitting(Matrix.diag([4.0, 4.0]))
    assert np.array_equal(dense(s.m_part), np.diag([4.0, 4.0]))
    assert not dense(s.n_part).any()


def test_weighted_lower_by_hand():
    a = Matrix.dense([[4.0, 0.0], [-2.0, 4.0]])
    s = weighted_lower_splitting(a)
    assert np.allclose(dense(s.m_part), [[4, 0], [-1.5, 4]])
    assert np.allclose(dense(s.n_part), [[0, 0], [0.5, 0]])
    assert np.array_equal(dense(s.split_matrix()), dense(a))
    assert s.strategy == "lower"


def test_weighted_lower_on_s1_block():
    s = weighted_lower_splitting(block_banded(3, 1, S1_STENCIL, {}))
    m = dense(s.m_part)
    assert np.array_equal(np.triu(m, 1), np.zeros((3, 3)))
    assert np.array_equal(np.diag(m), [36.0] * 3)


def test_weighted_lower_reconstructs_example():
    a = example_4_1(5).a
    for coefficient in (0.75, 1.0, 0.3):
        s = weighted_lower_splitting(a, coefficient)
        assert np.max(np.abs(dense(s.split_matrix()) - dense(a))) <= 1e-14 * a.max_abs()


def test_weighted_lower_zero_diagonal():
    with pytest.raises(ZeroDiagonal):
        weighted_lower_splitting(Matrix.dense([[0.0, 1.0], [1.0, 1.0]]))


def test_gauss_seidel_and_jacobi():
    a = Matrix.dense([[4.0, -1.0], [-2.0, 5.0]])
    gs = gauss_seidel_splitting(a)
    assert np.array_equal(dense(gs.m_part), [[4, 0], [-2, 5]])
    j = jacobi_splitting(a)
    assert np.array_equal(dense(j.m_part), np.diag([4.0, 5.0]))
    assert np.array_equal(dense(j.n_part), [[0, 1], [2, 0]])


def test_shift_splitting_examples():
    s = shift_splitting(Matrix.identity(2, 2.0), Matrix.zeros(2))
    assert np.array_equal(dense(s.m_part), np.eye(2))
    assert np.array_equal(dense(s.n_part), -np.eye(2))
    s = shift_splitting(Matrix.identity(2), Matrix.identity(2))
    assert np.array_equal(dense(s.m_part), np.eye(2))
    assert not dense(s.n_part).any()


def test_shift_splitting_example_diagonal():
    a = example_4_1(3).a
    s = shift_splitting(a, omega_diag(a, 2.0))
    assert np.allclose(s.m_part.diagonal(), 54.3, rtol=1e-15)


def test_shift_splitting_parts_sum_to_omega(rng):
    a = Matrix.dense(rng.standard_normal((5, 5)) + 6 * np.eye(5))
    omega = Matrix.diag(rng.uniform(0, 2, 5))
    s = shift_splitting(a, omega)
    assert np.allclose(dense(s.m_part + s.n_part), dense(omega), rtol=1e-15)


def test_shift_splitting_singular():
    with pytest.raises(SingularMatrix):
        shift_splitting(Matrix.identity(2), -1.0 * Matrix.identity(2))


def test_relaxed_theta_one_is_trivial(rng):
    a = Matrix.dense(rng.standard_normal((4, 4)) + 5 * np.eye(4))
    s = relaxed_splitting(a, 1.0, Matrix.zeros(4))
    assert np.array_equal(dense(s.m_part), dense(a))
    assert not dense(s.n_part).any()


def test_relaxed_theta_one_with_inner_is_shifted(rng):
    a = Matrix.dense(rng.standard_normal((4, 4)) + 5 * np.eye(4))
    inner = weighted_lower_splitting(a)
    omega = Matrix.diag(rng.uniform(0, 1, 4))
    s = relaxed_splitting(a, 1.0, omega, inner=inner)
    ref = shifted_splitting(inner, omega)
    assert np.allclose(dense(s.m_part), dense(ref.m_part), rtol=1e-15)
    assert np.allclose(dense(s.n_part), dense(ref.n_part), rtol=1e-15)


def test_relaxed_half_theta_arithmetic():
    # m = 0.5*(2I) + I = 2I and n = I + (0.5 - 1)(2I) = 0, so m - n = a
    s = relaxed_splitting(Matrix.identity(2, 2.0), 0.5, Matrix.identity(2))
    assert np.array_equal(dense(s.m_part), 2 * np.eye(2))
    assert np.array_equal(dense(s.n_part), np.zeros((2, 2)))


def test_relaxed_negative_theta():
    with pytest.raises(NegativeTheta):
        relaxed_splitting(Matrix.identity(2), -0.1, Matrix.zeros(2))


def test_build_rejects_wrong_target():
    with pytest.raises(ValueError, match="does not reproduce"):
        Splitting.build(Matrix.identity(2), Matrix.zeros(2), target=Matrix.identity(2, 2.0))


def test_build_singular_m_part():
    with pytest.raises(SingularMatrix):
        trivial_splitting(Matrix.dense([[1.0, 2.0], [2.0, 4.0]]))


def test_scalar_splitting_solve():
    q = scalar_splitting(3, 10.0, 0.5)
    assert q.strategy == "diagonal"
    assert np.allclose(q.solve(np.array([5.0, 10.0, 20.0])), [0.5, 1.0, 2.0])


def test_solve_strategy_for():
    assert solve_strategy_for(Matrix.identity(3)) == "diagonal"
    assert solve_strategy_for(Matrix.dense([[1.0, 0], [1, 1]])) == "lower"
    assert solve_strategy_for(Matrix.dense([[1.0, 1], [0, 1]])) == "upper"
    assert solve_strategy_for(Matrix.dense([[1.0, 1], [1, 1]])) == "lu"
