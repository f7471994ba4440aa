import math

import numpy as np
import pytest

from src.errors import DegenerateDirectionError, InsufficientDataError, SingularityError
from src.numerics import (
    SymmetricMatrix,
    covariance,
    default_ridge,
    fisher_direction,
    inv_sqrt,
    sym_eig,
)
from src.sampling import DistributionSpec, PointSet, sample


def test_covariance_by_hand():
    cov = covariance(PointSet([[0.0, 0.0], [2.0, 0.0]]))
    assert np.array_equal(np.asarray(cov), [[2.0, 0.0], [0.0, 0.0]])


def test_covariance_needs_two_points():
    with pytest.raises(InsufficientDataError):
        covariance(PointSet([[1.0, 2.0]]))


def test_covariance_is_psd():
    ps = sample(DistributionSpec.gaussian(30), 20, seed=1)
    cov = covariance(ps)
    assert sym_eig(cov).eigenvalues.min() >= -1e-12 * cov.trace()


def test_uniform_cube_covariance_diagonal():
    cov = np.asarray(covariance(sample(DistributionSpec.cube(100), 50000, seed=6)))
    assert np.all(np.abs(np.diag(cov) - 1.0 / 12.0) < 0.004)


def test_symmetric_matrix_is_exactly_symmetric():
    rng = np.random.default_rng(0)
    entries = SymmetricMatrix(rng.standard_normal((6, 6))).entries
    assert np.array_equal(entries, entries.T)
    assert not entries.flags.writeable


def test_sym_eig_identity():
    assert np.allclose(sym_eig(np.eye(3)).eigenvalues, [1.0, 1.0, 1.0])


def test_sym_eig_two_by_two():
    decomposition = sym_eig([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(decomposition.eigenvalues, [1.0, 3.0])
    low, high = decomposition.eigenvectors.T
    assert np.allclose(np.abs(low), 1 / math.sqrt(2))
    assert low[0] * low[1] < 0
    assert np.allclose(np.abs(high), 1 / math.sqrt(2))
    assert high[0] * high[1] > 0


def test_sym_eig_reconstructs():
    rng = np.random.default_rng(12)
    for d in rng.integers(1, 201, size=100):
        a = rng.standard_normal((d, d))
        a = (a + a.T) / 2
        rebuilt = np.asarray(sym_eig(a).reconstruct())
        assert np.linalg.norm(rebuilt - a) <= 1e-10 * np.linalg.norm(a)


def test_inv_sqrt_identity():
    assert np.allclose(np.asarray(inv_sqrt(np.eye(4), ridge=0.0)), np.eye(4))


def test_inv_sqrt_diagonal():
    result = np.asarray(inv_sqrt(np.diag([4.0, 9.0]), ridge=0.0))
    assert np.allclose(result, np.diag([0.5, 1.0 / 3.0]), rtol=0, atol=1e-15)


def test_inv_sqrt_whitens_random_psd():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((20, 40))
    a = b @ b.T
    w = np.asarray(inv_sqrt(a, ridge=1e-10 * np.trace(a) / 20))
    assert np.max(np.abs(w @ a @ w - np.eye(20))) <= 1e-8


def test_inv_sqrt_singular():
    with pytest.raises(SingularityError):
        inv_sqrt(np.diag([1.0, 0.0]), ridge=0.0)


def test_default_ridge():
    assert default_ridge(np.eye(4)) == pytest.approx(1e-10)
    assert default_ridge(2 * np.eye(3)) == pytest.approx(2e-10)


def test_fisher_identity_pooled():
    half = np.eye(2) / 2
    w = fisher_direction(half, half, [1.0, 0.0], [0.0, 0.0], ridge=0.0)
    assert w == pytest.approx([1.0, 0.0], abs=1e-12)


def test_fisher_two_by_two_by_hand():
    w = fisher_direction(np.diag([4.0, 1.0]), np.zeros((2, 2)), [1.0, 1.0], [0.0, 0.0], ridge=0.0)
    expected = np.array([0.25, 1.0]) / math.hypot(0.25, 1.0)
    assert w == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx([0.24253562503633297, 0.9701425001453319], abs=1e-15)


def test_fisher_degenerate_direction():
    with pytest.raises(DegenerateDirectionError):
        fisher_direction(np.eye(2), np.eye(2), [1.0, 2.0], [1.0, 2.0])
