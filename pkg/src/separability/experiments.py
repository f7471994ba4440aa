"""Events of the separation theorems as Monte Carlo experiments.

Each experiment draws one trial's sample from a generator, evaluates the
theorem's event with vectorized linear algebra, and can re-evaluate it with an
exhaustive per-point loop for the runner's soundness spot-check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..bounds import (
    BallBoundQuery,
    BoundResult,
    CubeBoundQuery,
    TupleBoundQuery,
    ball_all_bound,
    ball_angle_bound,
    ball_single_bound,
    cube_all_bound,
    cube_single_bound,
    orthogonality_probability,
    tuple_bound,
)
from ..enums import BallVariant, CubeVariant, DistributionKind
from ..errors import NumericalError, ParameterError, ResampleExhaustedError
from ..numerics import covariance, fisher_direction
from ..sampling import UNIFORM_VARIANCE, DistributionSpec, draw_points
from ..utils import check_positive_int

logger = logging.getLogger("Experiments")

TUPLE_ATTEMPT_CAP = 10_000


@dataclass
class TrialOutcome:
    success: bool
    counts: dict = field(default_factory=dict)


def _unit_rows(points):
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return points / norms


def _off_diagonal_below(matrix, threshold):
    """True iff every off-diagonal entry is < threshold (nan counts as not)."""
    check = matrix < threshold
    np.fill_diagonal(check, True)
    return bool(check.all())


class Experiment:
    """Base class: subclasses set ``name`` and implement the hooks."""

    name = ""
    note = None
    bound_applicable = True

    def params(self):
        raise NotImplementedError

    def bound(self) -> BoundResult:
        raise NotImplementedError

    def draw(self, rng):
        raise NotImplementedError

    def event(self, sample) -> TrialOutcome:
        raise NotImplementedError

    def recheck(self, sample) -> bool:
        raise NotImplementedError

    def summarize(self, counts, trials):
        """Extra report detail from the summed per-trial counts."""
        return dict(counts)


class OrthogonalityExperiment(Experiment):
    name = "pairwise-orthogonality"

    def __init__(self, n, N, eps):
        self.n = check_positive_int(n, "n")
        self.N = check_positive_int(N, "N", minimum=2)
        if eps <= 0:
            raise ParameterError("eps", "must be > 0")
        self.eps = float(eps)
        self.spec = DistributionSpec.sphere(self.n)

    def params(self):
        return {"n": self.n, "N": self.N, "eps": self.eps}

    def bound(self):
        return orthogonality_probability(self.n, self.N, self.eps)

    def draw(self, rng):
        return draw_points(self.spec, self.N, rng)

    def event(self, sample):
        gram = np.abs(sample @ sample.T)
        upper = gram[np.triu_indices(self.N, k=1)]
        violations = int(np.count_nonzero(upper >= self.eps))
        return TrialOutcome(violations == 0, {"pair_violations": violations})

    def recheck(self, sample):
        for i in range(self.N):
            for j in range(i + 1, self.N):
                if not abs(float(np.dot(sample[i], sample[j]))) < self.eps:
                    return False
        return True

    def summarize(self, counts, trials):
        pairs = trials * self.N * (self.N - 1) // 2
        violations = counts.get("pair_violations", 0)
        bound = self.bound()
        return {
            "pair_violations": violations,
            "pairs": pairs,
            "pair_violation_rate": violations / pairs,
            "pair_violation_bound": bound.detail["pair_bound"],
            "implied_theta": bound.detail["theta"],
        }


class BallExperiment(Experiment):
    def __init__(self, query: BallBoundQuery, variant=BallVariant.SINGLE):
        self.query = query
        self.variant = BallVariant(variant)
        self.spec = DistributionSpec.ball(query.n)
        self.name = f"ball-{self.variant.value}"

    def params(self):
        q = self.query
        return {"n": q.n, "M": q.M, "r": q.r, "variant": self.variant.value}

    def bound(self):
        return {
            BallVariant.SINGLE: ball_single_bound,
            BallVariant.ALL: ball_all_bound,
            BallVariant.ANGLE: ball_angle_bound,
        }[self.variant](self.query)

    def draw(self, rng):
        return draw_points(self.spec, self.query.M, rng)

    def event(self, sample):
        r = self.query.r
        norms = np.linalg.norm(sample, axis=1)
        if self.variant == BallVariant.SINGLE:
            # |x_M| > r and (x_i, x_M/|x_M|) < r for all i != M
            last = sample[-1]
            if not norms[-1] > r:
                return TrialOutcome(False)
            projections = sample[:-1] @ (last / norms[-1])
            return TrialOutcome(bool(np.all(projections < r)))

        if not np.all(norms > r):
            return TrialOutcome(False)
        units = _unit_rows(sample)
        if self.variant == BallVariant.ALL:
            # entry (i, j) = (x_i, x_j/|x_j|)
            matrix = sample @ units.T
        else:
            matrix = units @ units.T
        return TrialOutcome(_off_diagonal_below(matrix, r))

    def recheck(self, sample):
        r = self.query.r
        M = sample.shape[0]
        targets = [M - 1] if self.variant == BallVariant.SINGLE else range(M)
        for j in targets:
            norm_j = math.sqrt(float(np.dot(sample[j], sample[j])))
            if not norm_j > r:
                return False
            direction = sample[j] / norm_j
            for i in range(M):
                if i == j:
                    continue
                x = sample[i]
                if self.variant == BallVariant.ANGLE:
                    x = x / math.sqrt(float(np.dot(x, x)))
                if not float(np.dot(x, direction)) < r:
                    return False
        return True


class CubeExperiment(Experiment):
    def __init__(self, query: CubeBoundQuery, variant=CubeVariant.SINGLE, means=None):
        self.query = query
        self.variant = CubeVariant(variant)
        self.name = f"cube-{self.variant.value}"
        uniform = means is None and bool(np.all(query.variances == UNIFORM_VARIANCE))
        if uniform:
            self.spec = DistributionSpec.cube(query.n)
        else:
            self.spec = DistributionSpec.cube(
                query.n,
                means=0.5 if means is None else means,
                variances=query.variances,
            )
        # the event is centred on the known expectations, not the sample mean
        self.center = self.spec.coordinate_means()

    def params(self):
        q = self.query
        return {
            "n": q.n,
            "M": q.M,
            "delta": q.delta,
            "r0_squared": q.r0_squared,
            "variant": self.variant.value,
            "uniform": self.spec.is_uniform_cube,
        }

    def bound(self):
        if self.variant == CubeVariant.SINGLE:
            return cube_single_bound(self.query)
        return cube_all_bound(self.query)

    def draw(self, rng):
        return draw_points(self.spec, self.query.M, rng)

    def event(self, sample):
        q = self.query
        r0 = math.sqrt(q.r0_squared)
        centered = sample - self.center
        ratios = np.sum(centered**2, axis=1) / q.r0_squared
        if not np.all((ratios >= 1 - q.delta) & (ratios <= 1 + q.delta)):
            return TrialOutcome(False)
        threshold = math.sqrt(1 - q.delta)
        units = _unit_rows(centered)
        if self.variant == CubeVariant.SINGLE:
            projections = (centered[:-1] / r0) @ units[-1]
            return TrialOutcome(bool(np.all(projections < threshold)))
        matrix = (centered / r0) @ units.T
        return TrialOutcome(_off_diagonal_below(matrix, threshold))

    def recheck(self, sample):
        q = self.query
        r0 = math.sqrt(q.r0_squared)
        threshold = math.sqrt(1 - q.delta)
        M = sample.shape[0]
        centered = [sample[j] - self.center for j in range(M)]
        for d in centered:
            ratio = float(np.dot(d, d)) / q.r0_squared
            if not 1 - q.delta <= ratio <= 1 + q.delta:
                return False
        targets = [M - 1] if self.variant == CubeVariant.SINGLE else range(M)
        for j in targets:
            direction = centered[j] / math.sqrt(float(np.dot(centered[j], centered[j])))
            for i in range(M):
                if i != j and not float(np.dot(centered[i] / r0, direction)) < threshold:
                    return False
        return True


class TupleExperiment(Experiment):
    name = "tuple"
    note = (
        "constructive variant: tests the explicit functional (x, y_mean/|y_mean|) "
        "with the closed-form threshold, which lower-bounds the existence event"
    )

    def __init__(self, query: TupleBoundQuery, attempt_cap=TUPLE_ATTEMPT_CAP):
        self.query = query
        self.attempt_cap = check_positive_int(attempt_cap, "attempt_cap")
        self.spec = DistributionSpec.ball(query.n)
        self._bound = tuple_bound(query)
        self.threshold = self._bound.detail["threshold"]

    def params(self):
        q = self.query
        return {"n": q.n, "M": q.M, "m": q.m, "beta1": q.beta1, "beta2": q.beta2}

    def bound(self):
        return self._bound

    def correlation_condition(self, tuple_points):
        """beta2 (m-1) <= sum_{j != i} (y_i, y_j) <= beta1 (m-1) for every i."""
        q = self.query
        gram = tuple_points @ tuple_points.T
        sums = gram.sum(axis=1) - np.diag(gram)
        return bool(
            np.all(sums >= q.beta2 * (q.m - 1)) and np.all(sums <= q.beta1 * (q.m - 1))
        )

    def draw(self, rng):
        q = self.query
        outside = draw_points(self.spec, q.M, rng)
        for attempt in range(1, self.attempt_cap + 1):
            candidate = draw_points(self.spec, q.m, rng)
            if self.correlation_condition(candidate):
                return outside, candidate, attempt
        raise ResampleExhaustedError(self.attempt_cap, "the tuple correlation condition")

    def event(self, sample):
        outside, tuple_points, attempts = sample
        mean = tuple_points.mean(axis=0)
        norm = np.linalg.norm(mean)
        counts = {"attempts": attempts, "tuple_points_drawn": attempts * self.query.m}
        if norm == 0:
            return TrialOutcome(False, counts)
        direction = mean / norm
        separated = bool(
            np.all(tuple_points @ direction >= self.threshold)
            and np.all(outside @ direction < self.threshold)
        )
        return TrialOutcome(separated, counts)

    def recheck(self, sample):
        outside, tuple_points, _ = sample
        mean = tuple_points.mean(axis=0)
        norm = math.sqrt(float(np.dot(mean, mean)))
        if norm == 0:
            return False
        direction = mean / norm
        for y in tuple_points:
            if not float(np.dot(y, direction)) >= self.threshold:
                return False
        for x in outside:
            if not float(np.dot(x, direction)) < self.threshold:
                return False
        return True

    def summarize(self, counts, trials):
        return {
            "threshold": self.threshold,
            "mean_attempts": counts.get("attempts", 0) / trials,
            "tuple_points_drawn": counts.get("tuple_points_drawn", 0),
        }


class FisherExperiment(Experiment):
    name = "fisher-separability"

    def __init__(self, n, M, r=0.9, kind=DistributionKind.BALL):
        self.n = check_positive_int(n, "n")
        self.M = check_positive_int(M, "M", minimum=3)
        self.r = float(r)
        self.kind = DistributionKind(kind)
        if self.kind == DistributionKind.ELLIPSOID:
            # semi-axes 1, 1/2, 1/3, ... keep the law genuinely anisotropic
            self.spec = DistributionSpec.ellipsoid(self.n, 1.0 / np.arange(1, self.n + 1))
        else:
            self.spec = DistributionSpec(self.kind, self.n)
        if self.kind != DistributionKind.BALL:
            self.bound_applicable = False
            self.note = (
                f"the reference bound is the unit-ball one; {self.kind.value} trials are "
                "reported without a verdict"
            )

    def params(self):
        return {"n": self.n, "M": self.M, "r": self.r, "kind": self.kind.value}

    def bound(self):
        return ball_single_bound(BallBoundQuery(self.n, self.M, self.r))

    def draw(self, rng):
        return draw_points(self.spec, self.M, rng)

    def _functional(self, sample):
        error, rest = sample[-1], sample[:-1]
        w = fisher_direction(
            covariance(rest), np.zeros((self.n, self.n)), error, rest.mean(axis=0)
        )
        return w, float(np.dot(w, error))

    def event(self, sample):
        try:
            w, c = self._functional(sample)
        except NumericalError as e:
            logger.debug(f"degenerate Fisher direction counted as failure: {e}")
            return TrialOutcome(False, {"degenerate": 1})
        return TrialOutcome(bool(np.all(sample[:-1] @ w < c)))

    def recheck(self, sample):
        try:
            w, c = self._functional(sample)
        except NumericalError:
            return False
        return all(float(np.dot(x, w)) < c for x in sample[:-1])

    def summarize(self, counts, trials):
        return {"degenerate": counts.get("degenerate", 0)}
