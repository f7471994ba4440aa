"""Closed-form probability bounds and cardinality caps for the stochastic
separation theorems.

Powers such as r^n and rho^n are always formed from their logarithms, so the
regimes of interest (rho^n far below the smallest double) stay finite.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .sampling import UNIFORM_VARIANCE
from .utils import LOG_OVERFLOW, check_positive_int, clamp_probability, exp_or_inf

logger = logging.getLogger("Bounds")

TUPLE_GRID_POINTS = 1024
TUPLE_REFINE_TOL = 1e-10


@dataclass(frozen=True)
class BoundResult:
    name: str
    value: float
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"bound": self.name, "value": self.value, "detail": dict(self.detail)}


def _check_open_unit(value, name):
    if not 0 < value < 1:
        raise ParameterError(name, f"must lie in (0, 1), got {value}")
    return float(value)


@dataclass(frozen=True)
class BallBoundQuery:
    n: int
    M: int
    r: float

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.M, "M")
        _check_open_unit(self.r, "r")

    @property
    def rho(self):
        return math.sqrt(1.0 - self.r * self.r)

    @property
    def log_r_n(self):
        return self.n * math.log(self.r)

    @property
    def log_rho_n(self):
        # rho^n = (1 - r^2)^(n/2)
        return 0.5 * self.n * math.log1p(-self.r * self.r)


@dataclass(frozen=True, eq=False)
class CubeBoundQuery:
    n: int
    M: int
    delta: float
    variances: Optional[np.ndarray] = None

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.M, "M")
        if not 0 < self.delta < 2.0 / 3.0:
            raise ParameterError("delta", f"must lie in (0, 2/3), got {self.delta}")
        if self.variances is None:
            variances = np.full(self.n, UNIFORM_VARIANCE)
        else:
            variances = np.array(self.variances, dtype=float).reshape(-1)
            if variances.size == 1:
                variances = np.full(self.n, float(variances[0]))
        if variances.size != self.n:
            raise ParameterError("variances", f"expected {self.n} entries, got {variances.size}")
        if not np.all(variances > 0):
            raise ParameterError("variances", "every variance must be > 0")
        variances.setflags(write=False)
        object.__setattr__(self, "variances", variances)

    @property
    def r0_squared(self):
        return float(np.sum(self.variances))

    @property
    def sigma0_squared(self):
        return float(np.min(self.variances))


@dataclass(frozen=True)
class TupleBoundQuery:
    n: int
    M: int
    m: int
    beta1: float
    beta2: float
    grid_points: int = TUPLE_GRID_POINTS
    refine_tol: float = TUPLE_REFINE_TOL

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.M, "M")
        check_positive_int(self.m, "m")
        check_positive_int(self.grid_points, "grid_points", minimum=3)
        if self.beta1 < self.beta2:
            raise ParameterError("beta1", "must be >= beta2")
        if self.beta1 > 1:
            raise ParameterError("beta1", "inner products of ball points cannot exceed 1")
        if 1 + (self.m - 1) * self.beta1 <= 0:
            raise ParameterError("beta1", "side condition 1 + (m-1)*beta1 > 0 violated")


def pairwise_orthogonality_bound(n, eps):
    """Lower bound on P(|(x, y)| < eps) for independent uniform unit vectors."""
    check_positive_int(n, "n")
    if eps <= 0:
        raise ParameterError("eps", "must be > 0")
    return clamp_probability(1.0 - 2.0 * math.exp(-0.5 * n * eps * eps))


def _log_sqrt_log_term(theta):
    # log sqrt(ln(1/(1-theta)))
    return 0.5 * math.log(-math.log1p(-theta))


def quasiorthogonal_set_size(n, eps, theta) -> BoundResult:
    """Cap on N below which N random unit vectors are pairwise
    eps-orthogonal with probability above 1 - theta."""
    check_positive_int(n, "n")
    _check_open_unit(eps, "eps")
    _check_open_unit(theta, "theta")
    log_value = eps * eps * n / 4.0 + _log_sqrt_log_term(theta)
    return BoundResult(
        "prop1",
        exp_or_inf(log_value),
        {"log_value": log_value, "log10_value": log_value / math.log(10)},
    )


def orthogonality_probability(n, N, eps) -> BoundResult:
    """The probability 1 - theta the set-size formula promises at a given N."""
    check_positive_int(n, "n")
    check_positive_int(N, "N")
    if eps <= 0:
        raise ParameterError("eps", "must be > 0")
    # N = e^{eps^2 n/4} sqrt(ln 1/(1-theta))  <=>  1-theta = exp(-N^2 e^{-eps^2 n/2})
    exponent = N * N * math.exp(-0.5 * eps * eps * n)
    value = math.exp(-exponent)
    return BoundResult(
        "prop1-probability",
        value,
        {"theta": -math.expm1(-exponent), "pair_bound": 2.0 * math.exp(-0.5 * n * eps * eps)},
    )


def _ball_bound(name, q: BallBoundQuery, log_r_coeff, log_rho_coeff):
    r_n = math.exp(q.log_r_n)
    rho_n = math.exp(q.log_rho_n)
    r_term = exp_or_inf(log_r_coeff + q.log_r_n)
    if log_rho_coeff == -math.inf:
        rho_term = 0.0
    else:
        rho_term = exp_or_inf(log_rho_coeff + q.log_rho_n)
    raw = 1.0 - r_term - rho_term
    return BoundResult(
        name,
        clamp_probability(raw),
        {
            "r_n": r_n,
            "rho_n": rho_n,
            "log_r_n": q.log_r_n,
            "log_rho_n": q.log_rho_n,
            "r_term": r_term,
            "rho_term": rho_term,
            "raw": raw,
        },
    )


def _log_or_neg_inf(x):
    return math.log(x) if x > 0 else -math.inf


def ball_single_bound(q: BallBoundQuery) -> BoundResult:
    """1 - r^n - 0.5 (M-1) rho^n"""
    return _ball_bound("ball-single", q, 0.0, _log_or_neg_inf(0.5 * (q.M - 1)))


def ball_all_bound(q: BallBoundQuery) -> BoundResult:
    """1 - M r^n - 0.5 M (M-1) rho^n"""
    log_pairs = _log_or_neg_inf(q.M - 1)
    return _ball_bound(
        "ball-all", q, math.log(q.M), math.log(0.5) + math.log(q.M) + log_pairs
    )


def ball_angle_bound(q: BallBoundQuery) -> BoundResult:
    """1 - M r^n - M (M-1) rho^n"""
    log_pairs = _log_or_neg_inf(q.M - 1)
    return _ball_bound("ball-angle", q, math.log(q.M), math.log(q.M) + log_pairs)


def _check_cap_args(n, r, theta):
    check_positive_int(n, "n")
    _check_open_unit(r, "r")
    _check_open_unit(theta, "theta")
    log_r_n = n * math.log(r)
    log_rho_n = 0.5 * n * math.log1p(-r * r)
    return log_r_n, log_rho_n


def max_cardinality_single(n, r, theta) -> BoundResult:
    """M < 2 (theta - r^n) / rho^n; zero when theta <= r^n."""
    log_r_n, log_rho_n = _check_cap_args(n, r, theta)
    r_n = math.exp(log_r_n)
    if theta <= r_n:
        return BoundResult(
            "max-m-single",
            0.0,
            {"r_n": r_n, "log_rho_n": log_rho_n, "log10_value": -math.inf},
        )
    log_value = math.log(2.0) + math.log(theta - r_n) - log_rho_n
    return BoundResult(
        "max-m-single",
        exp_or_inf(log_value),
        {
            "r_n": r_n,
            "log_rho_n": log_rho_n,
            "log_value": log_value,
            "log10_value": log_value / math.log(10),
        },
    )


def max_cardinality_all(n, r, theta) -> BoundResult:
    """M < (r/rho)^n (-1 + sqrt(1 + 2 theta rho^n / r^(2n)))."""
    log_r_n, log_rho_n = _check_cap_args(n, r, theta)
    log_x = math.log(2.0 * theta) + log_rho_n - 2.0 * log_r_n
    asymptotic = False
    if log_x > LOG_OVERFLOW:
        # -1 + sqrt(1 + x) = sqrt(x) (1 - 1/sqrt(x)) up to O(1/x)
        half = 0.5 * log_x
        log_root_term = half + math.log1p(-math.exp(-half))
    else:
        x = math.exp(log_x)
        if 1.0 + x == 1.0:
            # -1 + sqrt(1 + x) ~ x / 2: the cap tends to theta / r^n
            asymptotic = True
            log_root_term = log_x - math.log(2.0)
        else:
            # x / (1 + sqrt(1 + x)) avoids the cancellation of -1 + sqrt(1 + x)
            log_root_term = log_x - math.log1p(math.sqrt(1.0 + x))
    log_value = (log_r_n - log_rho_n) + log_root_term
    return BoundResult(
        "max-m-all",
        exp_or_inf(log_value),
        {
            "log_x": log_x,
            "asymptotic": asymptotic,
            "asymptote": exp_or_inf(math.log(theta) - log_r_n),
            "log_value": log_value,
            "log10_value": log_value / math.log(10),
        },
    )


def _cube_bound(name, q: CubeBoundQuery, log_pairs):
    r0_4 = q.r0_squared**2
    norm_exponent = 2.0 * q.delta**2 * r0_4 / q.n
    angle_exponent = 2.0 * r0_4 * (2.0 - 3.0 * q.delta) ** 2 / q.n
    norm_term = exp_or_inf(math.log(2.0 * q.M) - norm_exponent)
    angle_term = (
        0.0 if log_pairs == -math.inf else exp_or_inf(log_pairs - angle_exponent)
    )
    raw = 1.0 - norm_term - angle_term
    return BoundResult(
        name,
        clamp_probability(raw),
        {
            "r0_squared": q.r0_squared,
            "norm_exponent": norm_exponent,
            "angle_exponent": angle_exponent,
            "norm_term": norm_term,
            "angle_term": angle_term,
            "raw": raw,
        },
    )


def cube_single_bound(q: CubeBoundQuery) -> BoundResult:
    """1 - 2M exp(-2 delta^2 R0^4 / n) - (M-1) exp(-2 R0^4 (2-3 delta)^2 / n)"""
    return _cube_bound("cube-single", q, _log_or_neg_inf(q.M - 1))


def cube_all_bound(q: CubeBoundQuery) -> BoundResult:
    """As cube_single_bound with M(M-1) in front of the angle term."""
    return _cube_bound("cube-all", q, math.log(q.M) + _log_or_neg_inf(q.M - 1))


def _side_conditions(eps, m, beta1, beta2):
    if (1 - eps) ** 2 + beta2 * (m - 1) <= 0:
        return "(1-eps)^2 + beta2*(m-1) > 0"
    if 1 + (m - 1) * beta1 <= 0:
        return "1 + (m-1)*beta1 > 0"
    return None


def tuple_threshold(eps, m, beta1, beta2):
    """Threshold r of the tuple-separating functional (x, y_mean/|y_mean|)."""
    violated = _side_conditions(eps, m, beta1, beta2)
    if violated:
        raise ParameterError("eps", f"side condition {violated} violated at eps={eps}")
    return ((1 - eps) ** 2 + beta2 * (m - 1)) / math.sqrt(m * (1 + (m - 1) * beta1))


def tuple_delta(eps, m, beta1, beta2):
    """Delta(eps, m) = 1 - r(eps)^2."""
    return 1.0 - tuple_threshold(eps, m, beta1, beta2) ** 2


def tuple_log_objective(eps, q: TupleBoundQuery):
    """log of (1-(1-eps)^n)^m (1 - Delta^(n/2)/2)^M, or None if inadmissible."""
    if _side_conditions(eps, q.m, q.beta1, q.beta2):
        return None
    delta = tuple_delta(eps, q.m, q.beta1, q.beta2)
    shell = math.exp(q.n * math.log1p(-eps))
    if shell >= 1.0:
        return -math.inf
    if delta <= 0:
        cap = 0.0
    else:
        cap = 0.5 * math.exp(0.5 * q.n * math.log(delta))
    return q.m * math.log1p(-shell) + q.M * math.log1p(-cap)


def tuple_grid(q: TupleBoundQuery, points):
    """Log-objective on ``points`` equally spaced interior points of (0, 1).

    Returns (grid, values, admissible); inadmissible points carry -inf.
    """
    grid = np.arange(1, points + 1) / (points + 1)
    values = np.full(points, -math.inf)
    admissible = np.zeros(points, dtype=bool)
    for i, eps in enumerate(grid):
        value = tuple_log_objective(float(eps), q)
        if value is not None:
            admissible[i] = True
            values[i] = value
    return grid, values, admissible


def tuple_bound(q: TupleBoundQuery) -> BoundResult:
    """max over eps in (0,1) of the tuple separation lower bound: coarse grid,
    then bounded Brent refinement on the bracket around the best grid point."""
    grid, values, admissible = tuple_grid(q, q.grid_points)
    if not np.any(admissible):
        raise ParameterError("eps", "no eps in (0, 1) satisfies the side conditions")
    best = int(np.argmax(np.where(admissible, values, -np.inf)))
    grid_log = float(values[best])
    best_eps, best_log = float(grid[best]), grid_log

    if math.isfinite(grid_log):
        lo = float(grid[best - 1]) if best > 0 else 0.5 * float(grid[0])
        hi = float(grid[best + 1]) if best + 1 < grid.size else 0.5 * (1 + float(grid[-1]))

        def negative(eps):
            v = tuple_log_objective(eps, q)
            return math.inf if v is None or v == -math.inf else -v

        result = minimize_scalar(
            negative, bounds=(lo, hi), method="bounded", options={"xatol": q.refine_tol}
        )
        if result.success and -result.fun > best_log:
            best_eps, best_log = float(result.x), float(-result.fun)

    value = math.exp(best_log) if math.isfinite(best_log) else 0.0
    shell_term = (1.0 - math.exp(q.n * math.log1p(-best_eps))) ** q.m
    logger.debug(f"tuple bound {value:.12g} at eps={best_eps:.10g}")
    return BoundResult(
        "tuple",
        clamp_probability(value),
        {
            "epsilon": best_eps,
            "delta": tuple_delta(best_eps, q.m, q.beta1, q.beta2),
            "threshold": tuple_threshold(best_eps, q.m, q.beta1, q.beta2),
            "shell_term": shell_term,
            "cap_term": value / shell_term if shell_term > 0 else 0.0,
            "grid_best": math.exp(grid_log) if math.isfinite(grid_log) else 0.0,
            "log_value": best_log,
        },
    )
