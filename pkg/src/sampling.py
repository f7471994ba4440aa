"""Seeded generators for the random point ensembles.

Every draw goes through a counter-based Philox generator whose key is derived
from ``(seed, stream)`` with ``numpy.random.SeedSequence``, so the points of a
stream do not depend on which other streams were drawn, or in which order.
Streams are bit-identical on one platform and numpy version; the normal
sampler is not guaranteed stable across numpy major versions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .enums import DistributionKind
from .errors import ParameterError
from .utils import check_positive_int, check_seed

logger = logging.getLogger("Sampling")

UNIFORM_MEAN = 0.5
UNIFORM_VARIANCE = 1.0 / 12.0


def make_rng(seed, stream=0):
    """Generator for stream ``stream`` (an int or a tuple of ints) of master
    seed ``seed``."""
    seed = check_seed(seed)
    if isinstance(stream, (tuple, list)):
        key = tuple(int(s) for s in stream)
    else:
        key = (int(stream),)
    sequence = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


def _as_vector(values, n, name):
    if values is None:
        return None
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.size == 1 and n > 1:
        vector = np.full(n, float(vector[0]))
    if vector.size != n:
        raise ParameterError(name, f"expected {n} entries, got {vector.size}")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    kind: DistributionKind
    dimension: int
    means: Optional[np.ndarray] = None
    variances: Optional[np.ndarray] = None
    axes: Optional[np.ndarray] = None

    def __post_init__(self):
        if not isinstance(self.kind, DistributionKind):
            raise ParameterError("kind", f"unknown distribution {self.kind!r}")
        if self.kind == DistributionKind.EXTERNAL:
            raise ParameterError("kind", "external point sets cannot be sampled")
        check_positive_int(self.dimension, "dimension")
        n = self.dimension
        object.__setattr__(self, "means", _as_vector(self.means, n, "means"))
        object.__setattr__(
            self, "variances", _as_vector(self.variances, n, "variances")
        )
        object.__setattr__(self, "axes", _as_vector(self.axes, n, "axes"))

        if self.variances is not None and not np.all(self.variances > 0):
            raise ParameterError("variances", "every variance must be > 0")

        if self.kind == DistributionKind.CUBE:
            self._check_cube()
        elif self.kind == DistributionKind.ELLIPSOID:
            if self.axes is None or not np.all(self.axes > 0):
                raise ParameterError("axes", "every semi-axis must be > 0")

    def _check_cube(self):
        if self.means is None and self.variances is None:
            return
        means = self.coordinate_means()
        variances = self.coordinate_variances()
        if not np.all((means > 0) & (means < 1)):
            raise ParameterError("means", "cube coordinate means must lie in (0, 1)")
        # a law on [0,1] with mean mu has variance below mu(1-mu)
        if not np.all(variances < means * (1 - means)):
            raise ParameterError(
                "variances", "cube variances must satisfy sigma^2 < mu(1-mu)"
            )

    @classmethod
    def ball(cls, n):
        return cls(DistributionKind.BALL, n)

    @classmethod
    def sphere(cls, n):
        return cls(DistributionKind.SPHERE, n)

    @classmethod
    def cube(cls, n, means=None, variances=None):
        return cls(DistributionKind.CUBE, n, means=means, variances=variances)

    @classmethod
    def gaussian(cls, n, mean=None, variances=None):
        return cls(DistributionKind.GAUSSIAN, n, means=mean, variances=variances)

    @classmethod
    def ellipsoid(cls, n, axes):
        return cls(DistributionKind.ELLIPSOID, n, axes=axes)

    @property
    def is_uniform_cube(self):
        return (
            self.kind == DistributionKind.CUBE
            and self.means is None
            and self.variances is None
        )

    def coordinate_means(self):
        n = self.dimension
        if self.means is not None:
            return np.array(self.means)
        if self.kind == DistributionKind.CUBE:
            return np.full(n, UNIFORM_MEAN)
        return np.zeros(n)

    def coordinate_variances(self):
        n = self.dimension
        if self.variances is not None:
            return np.array(self.variances)
        if self.kind == DistributionKind.CUBE:
            return np.full(n, UNIFORM_VARIANCE)
        if self.kind == DistributionKind.GAUSSIAN:
            return np.ones(n)
        raise ParameterError("kind", f"{self.kind.value} has no per-coordinate variances")

    def to_dict(self):
        data = {"kind": self.kind.value, "n": self.dimension}
        for name in ("means", "variances", "axes"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value.tolist()
        return data


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    spec: Optional[DistributionSpec] = None
    seed: Optional[int] = None
    # kind named by a file header whose parameters are not recorded
    declared_kind: Optional[DistributionKind] = None
    norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ParameterError("points", "expected a non-empty M x n array")
        if self.spec is not None and self.spec.dimension != points.shape[1]:
            raise ParameterError(
                "points", f"rows have length {points.shape[1]}, spec says {self.spec.dimension}"
            )
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "norms", np.linalg.norm(points, axis=1))

    @property
    def count(self):
        return self.points.shape[0]

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def kind(self):
        if self.spec is not None:
            return self.spec.kind
        return self.declared_kind or DistributionKind.EXTERNAL

    def subset(self, indices):
        return PointSet(
            self.points[np.asarray(indices, dtype=int)], self.spec, self.seed, self.declared_kind
        )


def _unit_directions(rng, count, n):
    directions = rng.standard_normal((count, n))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # zero rows have probability zero but cannot be normalized
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        directions[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
    return directions / norms


def draw_points(spec: DistributionSpec, count, rng):
    """Draw ``count`` i.i.d. rows of ``spec`` from an existing generator."""
    n = spec.dimension
    if spec.kind == DistributionKind.SPHERE:
        return _unit_directions(rng, count, n)
    if spec.kind in (DistributionKind.BALL, DistributionKind.ELLIPSOID):
        directions = _unit_directions(rng, count, n)
        # P(|x| <= t) = t^n for the uniform ball
        radii = rng.random(count) ** (1.0 / n)
        points = directions * radii[:, None]
        if spec.kind == DistributionKind.ELLIPSOID:
            points = points * spec.axes
        return points
    if spec.kind == DistributionKind.CUBE:
        if spec.is_uniform_cube:
            return rng.random((count, n))
        means = spec.coordinate_means()
        variances = spec.coordinate_variances()
        concentration = means * (1 - means) / variances - 1
        return rng.beta(means * concentration, (1 - means) * concentration, (count, n))
    if spec.kind == DistributionKind.GAUSSIAN:
        return spec.coordinate_means() + rng.standard_normal((count, n)) * np.sqrt(
            spec.coordinate_variances()
        )
    raise ParameterError("kind", f"cannot sample {spec.kind.value}")


def sample(spec: DistributionSpec, count, seed, stream=0) -> PointSet:
    """``count`` i.i.d. points of ``spec``; a pure function of its arguments."""
    count = check_positive_int(count, "count")
    seed = check_seed(seed)
    logger.debug(
        f"Sampling {count} points from {spec.kind.value} (n={spec.dimension}, seed={seed})"
    )
    points = draw_points(spec, count, make_rng(seed, stream))
    return PointSet(points, spec, seed)


@dataclass(frozen=True)
class RadialStatistics:
    min_norm: float
    max_norm: float
    mean_square_norm: float

    def to_dict(self):
        return {
            "min_norm": self.min_norm,
            "max_norm": self.max_norm,
            "mean_square_norm": self.mean_square_norm,
        }


def radial_statistics(ps: PointSet) -> RadialStatistics:
    norms = ps.norms
    return RadialStatistics(
        min_norm=float(norms.min()),
        max_norm=float(norms.max()),
        mean_square_norm=float(np.mean(np.sum(ps.points**2, axis=1))),
    )


def shell_fraction(ps: PointSet, r):
    """Fraction of points with norm strictly above ``r``."""
    return float(np.mean(ps.norms > r))
