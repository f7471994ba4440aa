import math

import numpy as np
import pytest

from src.bounds import (
    BallBoundQuery,
    CubeBoundQuery,
    TupleBoundQuery,
    ball_all_bound,
    ball_angle_bound,
    ball_single_bound,
    cube_all_bound,
    cube_single_bound,
    max_cardinality_all,
    max_cardinality_single,
    orthogonality_probability,
    pairwise_orthogonality_bound,
    quasiorthogonal_set_size,
    tuple_bound,
    tuple_delta,
    tuple_grid,
    tuple_log_objective,
    tuple_threshold,
)
from src.errors import ParameterError


def test_pairwise_orthogonality():
    assert pairwise_orthogonality_bound(2000, 0.1) == pytest.approx(
        1 - 2 * math.exp(-10), rel=1e-12
    )
    assert pairwise_orthogonality_bound(1, 0.01) == 0.0


def test_pairwise_orthogonality_monotone_in_n():
    values = [pairwise_orthogonality_bound(n, 0.2) for n in range(1, 2000, 50)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_quasiorthogonal_set_size():
    result = quasiorthogonal_set_size(2000, 0.1, 0.01)
    assert result.value == pytest.approx(14.88, rel=1e-3)
    assert result.value == pytest.approx(
        math.exp(5) * math.sqrt(math.log(1 / 0.99)), rel=1e-12
    )


def test_quasiorthogonal_unit_log_term():
    # eps^2 n / 4 = 1 and ln(1/(1-theta)) = 1
    result = quasiorthogonal_set_size(100, 0.2, 1 - 1 / math.e)
    assert result.value == pytest.approx(math.e, rel=1e-12)


def test_quasiorthogonal_huge_dimension():
    result = quasiorthogonal_set_size(10**6, 0.1, 0.5)
    expected = 2500 / math.log(10) + 0.5 * math.log10(math.log(2))
    assert result.detail["log10_value"] == pytest.approx(expected, rel=1e-12)
    assert math.isinf(result.value)


def test_quasiorthogonal_rejects_theta():
    with pytest.raises(ParameterError):
        quasiorthogonal_set_size(100, 0.1, 1.0)
    with pytest.raises(ParameterError):
        quasiorthogonal_set_size(100, 0.1, 0.0)


def test_orthogonality_probability():
    result = orthogonality_probability(2000, 10, 0.15)
    exponent = 100 * math.exp(-22.5)
    assert result.value == pytest.approx(math.exp(-exponent), rel=1e-12)
    assert result.detail["theta"] == pytest.approx(exponent, rel=1e-6)
    assert result.detail["pair_bound"] == pytest.approx(2 * math.exp(-22.5), rel=1e-12)


def test_ball_single_one_point():
    assert ball_single_bound(BallBoundQuery(2, 1, 0.5)).value == pytest.approx(0.75)


def test_ball_single_value():
    result = ball_single_bound(BallBoundQuery(50, 100, 0.9))
    assert result.value == pytest.approx(0.994846, abs=1e-6)
    direct = 1 - 0.9**50 - 0.5 * 99 * (1 - 0.81) ** 25
    assert result.value == pytest.approx(direct, rel=1e-12)


def test_ball_single_vacuous_in_low_dimension():
    result = ball_single_bound(BallBoundQuery(2, 10**6, 0.9))
    assert result.value == 0.0
    assert result.detail["raw"] < 0


def test_ball_all_value():
    result = ball_all_bound(BallBoundQuery(100, 1000, 0.9))
    assert result.value == pytest.approx(0.97344, abs=1e-5)
    direct = 1 - 1000 * 0.9**100 - 0.5 * 1000 * 999 * (1 - 0.81) ** 50
    assert result.value == pytest.approx(direct, rel=1e-12)


def test_ball_angle_value():
    q = BallBoundQuery(30, 20, 0.8)
    direct = 1 - 20 * 0.8**30 - 20 * 19 * (1 - 0.64) ** 15
    assert ball_angle_bound(q).value == pytest.approx(direct, rel=1e-12)


def test_ball_variants_coincide_for_one_point():
    q = BallBoundQuery(10, 1, 0.7)
    values = {ball_single_bound(q).value, ball_all_bound(q).value, ball_angle_bound(q).value}
    assert len(values) == 1
    assert values.pop() == pytest.approx(1 - 0.7**10, rel=1e-12)


def test_ball_query_rejects_radius():
    with pytest.raises(ParameterError):
        BallBoundQuery(10, 10, 1.0)


def test_max_cardinality_single():
    result = max_cardinality_single(100, 0.9, 0.01)
    direct = 2 * (0.01 - 0.9**100) / 0.19**50
    assert result.value == pytest.approx(direct, rel=1e-6)
    assert result.value == pytest.approx(2.3e34, rel=0.01)


def test_max_cardinality_single_zero_branch():
    assert max_cardinality_single(10, 0.9, 0.1).value == 0.0


def test_max_cardinality_all_matches_asymptote():
    result = max_cardinality_all(100, 0.9, 0.01)
    assert result.detail["asymptotic"]
    assert result.value == pytest.approx(0.01 / 0.9**100, rel=1e-6)
    assert result.value == pytest.approx(3.8e2, rel=0.02)


def test_max_cardinality_all_direct_regime():
    n, r, theta = 5, 0.6, 0.1
    x = 2 * theta * (1 - r * r) ** (n / 2) / r ** (2 * n)
    direct = (r / math.sqrt(1 - r * r)) ** n * (-1 + math.sqrt(1 + x))
    result = max_cardinality_all(n, r, theta)
    assert not result.detail["asymptotic"]
    assert result.value == pytest.approx(direct, rel=1e-12)


def test_cube_single_value():
    result = cube_single_bound(CubeBoundQuery(5000, 100, 0.5))
    r0_4 = (5000 / 12) ** 2
    direct = 1 - 200 * math.exp(-2 * 0.25 * r0_4 / 5000) - 99 * math.exp(-2 * r0_4 * 0.25 / 5000)
    assert result.value == pytest.approx(direct, rel=1e-12)
    assert result.value == pytest.approx(1 - 8.7e-6, abs=2e-7)


def test_cube_vacuous_in_low_dimension():
    assert cube_single_bound(CubeBoundQuery(100, 100, 0.5)).value == 0.0
    assert cube_all_bound(CubeBoundQuery(100, 100, 0.5)).value == 0.0


def test_cube_near_delta_limit_is_well_formed():
    result = cube_single_bound(CubeBoundQuery(5000, 50, 2 / 3 - 1e-9))
    assert 0.0 <= result.value <= 1.0
    assert result.detail["angle_exponent"] < 1e-10


def test_cube_rejects_delta():
    with pytest.raises(ParameterError):
        CubeBoundQuery(100, 10, 0.7)
    with pytest.raises(ParameterError):
        CubeBoundQuery(100, 10, 0.0)


def test_cube_custom_variances():
    q = CubeBoundQuery(4, 2, 0.5, variances=[0.01, 0.02, 0.03, 0.04])
    assert q.r0_squared == pytest.approx(0.1)
    assert q.sigma0_squared == pytest.approx(0.01)


def test_tuple_delta():
    assert tuple_delta(0.0, 1, 0.0, 0.0) == 0.0
    assert tuple_delta(0.1, 2, 0.5, 0.5) == pytest.approx(1 - 0.5 * 1.31**2 / 1.5, rel=1e-12)
    assert tuple_delta(0.1, 2, 0.5, 0.5) == pytest.approx(0.42797, abs=1e-5)


def test_tuple_threshold_side_condition():
    with pytest.raises(ParameterError):
        tuple_threshold(0.5, 2, 0.5, -1.0)


def test_tuple_bound_example():
    result = tuple_bound(TupleBoundQuery(100, 1000, 2, 0.5, 0.5))
    assert result.value >= 0.99995
    assert 0 < result.detail["epsilon"] < 1


def test_tuple_bound_matches_dense_grid():
    q = TupleBoundQuery(100, 500, 2, 1.0, 0.0)
    result = tuple_bound(q)
    grid, values, admissible = tuple_grid(q, 10000)
    best = float(grid[np.argmax(np.where(admissible, values, -np.inf))])
    local = np.linspace(max(best - 1e-4, 1e-12), min(best + 1e-4, 1 - 1e-12), 10001)
    logs = [tuple_log_objective(float(eps), q) for eps in local]
    dense = math.exp(max(v for v in logs if v is not None))
    assert result.value >= dense - 1e-12
    assert abs(result.value - dense) <= 1e-9
    assert result.value == pytest.approx(0.9915, abs=1e-3)


def test_tuple_bound_single_point_reduction():
    n, M = 50, 100
    result = tuple_bound(TupleBoundQuery(n, M, 1, 0.0, 0.0))
    grid = np.arange(1, 2001) / 2001
    delta = 1 - (1 - grid) ** 4
    direct = (1 - (1 - grid) ** n) * (1 - delta ** (n / 2) / 2) ** M
    assert result.value >= direct.max() - 1e-12


def test_tuple_bound_without_admissible_eps():
    with pytest.raises(ParameterError):
        tuple_bound(TupleBoundQuery(100, 10, 3, 0.0, -0.5))


def test_tuple_query_validation():
    with pytest.raises(ParameterError):
        TupleBoundQuery(100, 10, 2, 0.2, 0.5)
    with pytest.raises(ParameterError):
        TupleBoundQuery(100, 10, 2, 1.5, 0.0)
    with pytest.raises(ParameterError):
        TupleBoundQuery(100, 10, 3, -0.5, -0.5)


def test_bound_result_to_dict():
    data = ball_single_bound(BallBoundQuery(2, 1, 0.5)).to_dict()
    assert data["bound"] == "ball-single"
    assert data["value"] == pytest.approx(0.75)
    assert "r_term" in data["detail"]
