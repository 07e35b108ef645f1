import numpy as np
import pytest

from gave.convergence import certify_config
from gave.errors import DimensionMismatch, TooLarge
from gave.linalg import Matrix
from gave.oracle import enumerate_solutions, sign_patterns, verify_solution
from gave.problems import example_4_1, random_problem
from gave.solvers import GnmsConfig
from gave.splittings import scalar_splitting, weighted_lower_splitting


def as_set(solutions):
    return sorted(tuple(np.round(x, 8)) for x in solutions)


def test_sign_patterns_order():
    assert np.array_equal(sign_patterns(2), [[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert sign_patterns(0).shape == (1, 0)


def test_zero_b_gives_unique_solution(rng):
    a = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    c = rng.standard_normal(5)
    sols = enumerate_solutions(a, np.zeros((5, 5)), c)
    assert len(sols) == 1
    assert np.allclose(sols[0], np.linalg.solve(a, c))


def test_constructed_2x2_solution(ex2):
    a, b = ex2
    c = a.matvec(np.array([1.0, -1.0])) - b.matvec(np.array([1.0, 1.0]))
    assert np.array_equal(c, [4.0, -6.0])
    sols = enumerate_solutions(a, b, c)
    assert any(np.allclose(x, [1.0, -1.0], atol=1e-12) for x in sols)


def test_scalar_instance_has_no_solution():
    # x - 2|x| = 1: for x >= 0 it reads -x = 1, for x < 0 it reads 3x = 1,
    # and neither branch is sign-consistent
    assert enumerate_solutions([[1.0]], [[2.0]], [1.0]) == []


def test_scalar_instance_two_solutions():
    # x + 3|x| = 2: 4x = 2 on x >= 0 and -2x = 2 on x < 0
    sols = enumerate_solutions([[1.0]], [[-3.0]], [2.0])
    assert as_set(sols) == as_set([np.array([0.5]), np.array([-1.0])])


def test_zero_component_is_deduplicated():
    # x = 0 solves x - |x| = 0 on both orthants; reported once
    sols = enumerate_solutions([[2.0]], [[1.0]], [0.0])
    assert len(sols) == 1 and sols[0][0] == 0.0


def test_too_large():
    with pytest.raises(TooLarge):
        enumerate_solutions(np.eye(17), np.zeros((17, 17)), np.ones(17))
    with pytest.raises(TooLarge):
        enumerate_solutions(np.eye(3), np.zeros((3, 3)), np.ones(3), n_max=2)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        enumerate_solutions(np.eye(2), np.eye(3), np.ones(2))
    with pytest.raises(DimensionMismatch):
        verify_solution(np.eye(2), np.eye(2), np.ones(2), np.ones(3))


def test_singular_orthant_skipped():
    # on x >= 0 the system is 0 * x = 1; on x < 0 it is 2x = 1, inconsistent
    assert enumerate_solutions([[1.0]], [[1.0]], [1.0]) == []


def test_verify_solution_examples():
    p = example_4_1(3)
    assert verify_solution(p.a, p.b, p.c, p.x_star)
    assert not verify_solution(p.a, p.b, p.c, np.zeros(p.n))
    assert verify_solution(np.eye(2), np.zeros((2, 2)), np.zeros(2), np.zeros(2))


def test_oracle_outputs_verify(rng):
    for _ in range(30):
        n = int(rng.integers(1, 7))
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        c = rng.standard_normal(n)
        for x in enumerate_solutions(a, b, c):
            assert verify_solution(a, b, c, x, tol=1e-10)


def test_permutation_invariance(rng):
    seen_multiple = False
    for _ in range(40):
        n = int(rng.integers(2, 6))
        a = np.eye(n) + 0.3 * rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        c = rng.standard_normal(n)
        perm = rng.permutation(n)
        p = np.eye(n)[perm]
        sols = enumerate_solutions(a, b, c)
        moved = enumerate_solutions(p @ a @ p.T, p @ b @ p.T, p @ c)
        assert as_set(moved) == as_set([p @ x for x in sols])
        seen_multiple |= len(sols) > 1
    assert seen_multiple


def test_unique_when_theorem_holds(rng):
    checked = 0
    for seed in range(60):
        n = int(rng.integers(1, 9))
        p = random_problem(n, seed=seed, condition_target=rng.uniform(0.1, 3.0))
        cfg = GnmsConfig(weighted_lower_splitting(p.a), scalar_splitting(n, 10.0, 0.5))
        if certify_config(cfg, p.b).holds:
            checked += 1
            sols = enumerate_solutions(p.a, p.b, p.c)
            assert len(sols) == 1
            assert np.allclose(sols[0], p.x_star, atol=1e-9)
    assert checked >= 10


def test_accepts_matrix_objects(ex2):
    a, b = ex2
    c = np.array([4.0, -6.0])
    assert as_set(enumerate_solutions(a, b, c)) == as_set(enumerate_solutions(a.to_dense(), b.to_dense(), c))
    assert isinstance(a, Matrix)
