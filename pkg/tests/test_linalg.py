import math

import numpy as np
import pytest

from regcoreset.errors import RankDeficiencyError, ShapeError
from regcoreset.linalg import (
    RegressionInstance,
    augment,
    as_matrix,
    as_vector,
    check_full_column_rank,
    entrywise_p_norm,
    induced_norm_upper,
    statistical_dimension,
    svd,
)


def test_as_matrix_rejects_bad_shapes_and_values():
    with pytest.raises(ShapeError):
        as_matrix([1.0, 2.0])
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        as_matrix([[np.inf]])


def test_as_vector_rejects_bad_shapes_and_values():
    with pytest.raises(ShapeError):
        as_vector([[1.0]])
    with pytest.raises(ShapeError):
        as_vector([])
    with pytest.raises(ValueError):
        as_vector([np.nan])


def test_instance_shape_agreement():
    inst = RegressionInstance([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], [1.0, 2.0, 3.0])
    assert inst.n == 3
    assert inst.d == 2
    with pytest.raises(ShapeError):
        RegressionInstance([[1.0], [2.0]], [1.0, 2.0, 3.0])


def test_augment_appends_response_column():
    inst = RegressionInstance([[1.0]], [2.0])
    assert np.array_equal(augment(inst), [[1.0, 2.0]])
    inst = RegressionInstance(np.eye(3), np.zeros(3))
    ap = augment(inst)
    assert ap.shape == (3, 4)
    assert np.all(ap[:, -1] == 0.0)


def test_augment_shape_law():
    rng = np.random.default_rng(11)
    for n, d in [(2, 1), (5, 3), (10, 10)]:
        inst = RegressionInstance(rng.standard_normal((n, d)), rng.standard_normal(n))
        assert augment(inst).shape == (n, d + 1)


def test_entrywise_norm_hand_values():
    assert entrywise_p_norm(np.eye(2), 2) == pytest.approx(math.sqrt(2))
    assert entrywise_p_norm([[1.0, -2.0], [3.0, 0.0]], 1) == pytest.approx(6.0)
    assert entrywise_p_norm([[3.0, 4.0]], 2) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        entrywise_p_norm(np.eye(2), 0.5)


def test_entrywise_norm_matches_singular_values():
    # Frobenius norm equals the l2 norm of the spectrum.
    rng = np.random.default_rng(5)
    for trial in range(10):
        M = rng.standard_normal((6, 4))
        sigma = np.linalg.svd(M, compute_uv=False)
        assert entrywise_p_norm(M, 2) == pytest.approx(
            math.sqrt(np.sum(sigma**2)), abs=1e-8
        )


def test_induced_norm_hand_values():
    assert induced_norm_upper(np.diag([1.0, 2.0]), 1) == pytest.approx(2.0)
    assert induced_norm_upper([[0.0, 1.0], [1.0, 0.0]], 2) == pytest.approx(1.0)
    assert induced_norm_upper([[1.0, 1.0], [1.0, 1.0]], 1) == pytest.approx(2.0)
    assert induced_norm_upper([[1.0, 1.0], [1.0, 1.0]], np.inf) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        induced_norm_upper(np.eye(2), 0.9)


def test_induced_norm_dominates_random_directions():
    rng = np.random.default_rng(17)
    M = rng.standard_normal((8, 5))
    for p in (1.0, 1.5, 2.0, 3.0):
        bound = induced_norm_upper(M, p)
        x = rng.standard_normal((10000, 5))
        x /= np.linalg.norm(x, ord=p, axis=1, keepdims=True)
        attained = np.max(np.linalg.norm(x @ M.T, ord=p, axis=1))
        assert attained <= bound * (1 + 1e-12)


def test_svd_diagonal_and_orthogonality():
    res = svd(np.diag([3.0, 2.0]))
    assert np.allclose(res.singular_values, [3.0, 2.0])
    q, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((7, 3)))
    assert np.allclose(svd(q).singular_values, 1.0, atol=1e-10)


def test_svd_reconstructs():
    M = np.random.default_rng(3).standard_normal((10, 3))
    res = svd(M)
    rebuilt = res.left @ np.diag(res.singular_values) @ res.right.T
    assert np.linalg.norm(rebuilt - M) / np.linalg.norm(M) < 1e-8
    gram = res.left.T @ res.left
    assert np.linalg.norm(gram - np.eye(3)) < 1e-8


def test_svd_requires_tall_input():
    with pytest.raises(ShapeError):
        svd(np.ones((2, 3)))


def test_statistical_dimension_hand_values():
    assert statistical_dimension([1.0, 1.0, 1.0], 0.0) == pytest.approx(3.0)
    # 1/(1 + 2/4) + 1/(1 + 2/1) = 2/3 + 1/3
    assert statistical_dimension([2.0, 1.0], 2.0) == pytest.approx(1.0)
    assert statistical_dimension([1.0], 1e12) < 1e-11


def test_statistical_dimension_monotone_in_lambda():
    sigma = np.array([3.0, 1.0, 0.2])
    lams = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0]
    values = [statistical_dimension(sigma, lam) for lam in lams]
    for earlier, later in zip(values, values[1:]):
        assert later < earlier
    assert 0.0 < values[-1] <= 3.0


def test_statistical_dimension_rejects_bad_input():
    with pytest.raises(RankDeficiencyError):
        statistical_dimension([1.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        statistical_dimension([1.0], -1.0)


def test_rank_check():
    check_full_column_rank(np.array([3.0, 1e-3]))
    with pytest.raises(RankDeficiencyError):
        check_full_column_rank(np.array([1.0, 0.0]))
    with pytest.raises(RankDeficiencyError):
        check_full_column_rank(np.array([1.0, 1e-14]))
