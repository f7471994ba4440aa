"""Centering, projection onto the leading principal components and whitening.

Points are always transformed one row at a time through the same code path,
so a threshold computed on a fitting point at fit time reproduces bit for bit
when the same point is applied later.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DegenerateDataError,
    DimensionMismatchError,
    InsufficientDataError,
    ParameterError,
)
from ..numerics import covariance, default_ridge, inv_sqrt, sym_eig
from .data import LabeledData

logger = logging.getLogger("Preprocessing")

DEFAULT_VARIANCE_FRACTION = 0.999
DEFAULT_COND_CAP = 1e6
# total variance below this share of the mean squared norm means "no spread"
DEGENERATE_SCALE = 1e-14
# eigenvalues below this share of the largest one are numerically zero
ZERO_EIGENVALUE_SCALE = 1e-12
CUMULATIVE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class PreprocessingPipeline:
    mean: np.ndarray
    H: np.ndarray
    W: np.ndarray
    ridge: float
    variance_fraction: float
    cond_cap: float
    eigenvalues: np.ndarray
    cond_capped: bool = False

    def __post_init__(self):
        for name in ("mean", "H", "W", "eigenvalues"):
            # C order: a loaded model must sum in the same order as the fitted one
            value = np.array(getattr(self, name), dtype=float, order="C")
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        n, m = self.H.shape
        if self.mean.shape != (n,):
            raise ParameterError("mean", f"expected length {n}, got {self.mean.shape}")
        if self.W.shape != (m, m):
            raise ParameterError("W", f"expected shape {(m, m)}, got {self.W.shape}")

    @property
    def n(self):
        return self.H.shape[0]

    @property
    def m(self):
        return self.H.shape[1]

    def transform(self, x):
        """W H^T (x - mean) for a single n-vector."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatchError(self.n, x.shape[-1] if x.ndim else 0, "x")
        return self.W @ (self.H.T @ (x - self.mean))

    def transform_many(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n:
            raise DimensionMismatchError(self.n, points.shape[1], "points")
        return np.array([self.transform(row) for row in points]).reshape(-1, self.m)


def _canonical_signs(vectors):
    # the largest-magnitude entry of every column is made positive
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _retained_count(eigenvalues, variance_fraction):
    total = float(np.sum(np.clip(eigenvalues, 0, None)))
    eligible = int(np.count_nonzero(eigenvalues > ZERO_EIGENVALUE_SCALE * eigenvalues[0]))
    cumulative = np.cumsum(eigenvalues[:eligible])
    target = variance_fraction * total * (1 - CUMULATIVE_SLACK)
    reached = np.flatnonzero(cumulative >= target)
    m = int(reached[0]) + 1 if reached.size else eligible
    return max(1, min(m, eligible))


def _capped_ridge(eigenvalues, base_ridge, cond_cap):
    """Smallest ridge >= base_ridge with (l_max + ridge)/(l_min + ridge) <= cond_cap."""
    l_max = float(eigenvalues[-1])
    l_min = float(eigenvalues[0])
    if (l_max + base_ridge) <= cond_cap * (l_min + base_ridge):
        return base_ridge, False
    return max(base_ridge, (l_max - cond_cap * l_min) / (cond_cap - 1)), True


def fit_pipeline(
    data: LabeledData,
    variance_fraction=DEFAULT_VARIANCE_FRACTION,
    cond_cap=DEFAULT_COND_CAP,
    ridge=None,
) -> PreprocessingPipeline:
    if not 0 < variance_fraction <= 1:
        raise ParameterError("variance_fraction", "must lie in (0, 1]")
    if not cond_cap > 1:
        raise ParameterError("cond_cap", "must be > 1")
    if ridge is not None and ridge < 0:
        raise ParameterError("ridge", "must be >= 0")

    points = data.points.points
    if points.shape[0] < 2:
        raise InsufficientDataError(2, points.shape[0])
    correct = points.shape[0] - data.errors.size
    if correct < 2:
        raise InsufficientDataError(2, correct, "correct points")

    mean = points.mean(axis=0)
    sample_cov = covariance(points)
    trace = sample_cov.trace()
    scale = float(np.mean(np.sum(points**2, axis=1)))
    if trace <= DEGENERATE_SCALE * scale or trace <= 0:
        raise DegenerateDataError(trace)

    decomposition = sym_eig(sample_cov)
    eigenvalues = decomposition.eigenvalues[::-1]
    eigenvectors = decomposition.eigenvectors[:, ::-1]
    m = _retained_count(eigenvalues, variance_fraction)
    H = np.ascontiguousarray(_canonical_signs(eigenvectors[:, :m]))

    projected = np.array([H.T @ (x - mean) for x in points])
    projected_cov = covariance(projected)
    base_ridge = default_ridge(projected_cov) if ridge is None else float(ridge)
    spectrum = sym_eig(projected_cov).eigenvalues
    used_ridge, capped = _capped_ridge(spectrum, base_ridge, cond_cap)
    if capped:
        logger.info(
            f"Retained spectrum exceeds condition cap {cond_cap:g}; "
            f"whitening with ridge {used_ridge:.3e}"
        )
    W = np.array(inv_sqrt(projected_cov, used_ridge))

    logger.debug(f"Pipeline: n={points.shape[1]}, m={m}, ridge={used_ridge:.3e}")
    return PreprocessingPipeline(
        mean=mean,
        H=H,
        W=W,
        ridge=used_ridge,
        variance_fraction=float(variance_fraction),
        cond_cap=float(cond_cap),
        eigenvalues=eigenvalues[:m],
        cond_capped=capped,
    )


def transform(pipeline: PreprocessingPipeline, x):
    return pipeline.transform(x)
