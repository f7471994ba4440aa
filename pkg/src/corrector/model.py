"""Fisher knowledge units on top of the preprocessing pipeline.

A unit fires on x when (w, z) >= c, where z is the transformed x, w the unit
Fisher direction of its error cluster and c the smallest projection of the
cluster's fitting points, so every fitting error is flagged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..enums import CovarianceMode
from ..errors import DimensionMismatchError, ParameterError
from ..numerics import covariance, fisher_direction
from .clustering import AUTO, DEFAULT_BETA_THRESHOLD, cluster_errors
from .data import LabeledData
from .pipeline import (
    DEFAULT_COND_CAP,
    DEFAULT_VARIANCE_FRACTION,
    PreprocessingPipeline,
    fit_pipeline,
)

logger = logging.getLogger("Corrector")


@dataclass(frozen=True)
class CorrectorOptions:
    clusters: Union[str, int] = AUTO
    beta_threshold: float = DEFAULT_BETA_THRESHOLD
    variance_fraction: float = DEFAULT_VARIANCE_FRACTION
    cond_cap: float = DEFAULT_COND_CAP
    margin: float = 0.0
    covariance: CovarianceMode = CovarianceMode.EXACT
    ridge: Optional[float] = None
    # False keeps explicit clusters that miss the threshold as they are
    split_clusters: bool = True

    def __post_init__(self):
        if self.clusters != AUTO and (
            isinstance(self.clusters, bool)
            or not isinstance(self.clusters, (int, np.integer))
            or self.clusters < 1
        ):
            raise ParameterError("clusters", f"must be `auto` or >= 1, got {self.clusters!r}")
        if self.margin < 0:
            raise ParameterError("margin", "must be >= 0")
        object.__setattr__(self, "covariance", CovarianceMode(self.covariance))

    def to_dict(self):
        return {
            "clusters": self.clusters if self.clusters == AUTO else int(self.clusters),
            "beta_threshold": self.beta_threshold,
            "variance_fraction": self.variance_fraction,
            "cond_cap": self.cond_cap,
            "margin": self.margin,
            "covariance": self.covariance.value,
            "ridge": self.ridge,
            "split_clusters": self.split_clusters,
        }


@dataclass(frozen=True, eq=False)
class KnowledgeUnit:
    w: np.ndarray
    c: float
    cluster_size: int
    beta1: float
    beta2: float

    def __post_init__(self):
        w = np.array(self.w, dtype=float, order="C")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def projection(self, z):
        return float(np.dot(self.w, z))


@dataclass(frozen=True, eq=False)
class CorrectorModel:
    pipeline: PreprocessingPipeline
    units: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        for unit in self.units:
            if unit.w.shape != (self.pipeline.m,):
                raise DimensionMismatchError(self.pipeline.m, unit.w.shape[0], "unit")

    @property
    def n(self):
        return self.pipeline.n

    @property
    def m(self):
        return self.pipeline.m


@dataclass(frozen=True)
class Decision:
    flagged: bool
    fired_units: tuple
    scores: tuple

    @property
    def max_score(self):
        return max(self.scores) if self.scores else float("-inf")


@dataclass(frozen=True)
class CascadeDecision:
    stages: tuple

    @property
    def flagged(self):
        return any(decision.flagged for decision in self.stages)

    @property
    def first_stage(self):
        """Index of the first stage that flagged, or None."""
        for index, decision in enumerate(self.stages):
            if decision.flagged:
                return index
        return None


def _rest_statistics(Z, members, totals):
    """Mean and covariance of every row of Z except ``members``."""
    total_sum, total_scatter = totals
    block = Z[members]
    count = Z.shape[0] - len(members)
    mean = (total_sum - block.sum(axis=0)) / count
    scatter = total_scatter - block.T @ block
    cov = (scatter - count * np.outer(mean, mean)) / (count - 1)
    return mean, cov


def _fit_unit(Z, members, cluster, options, totals, global_cov):
    mean_rest, cov_rest = _rest_statistics(Z, members, totals)
    if options.covariance == CovarianceMode.GLOBAL:
        cov_rest = global_cov
    block = Z[members]
    if len(members) >= 2:
        cov_err = np.asarray(covariance(block))
    else:
        cov_err = np.zeros((Z.shape[1], Z.shape[1]))
    w = fisher_direction(cov_rest, cov_err, block.mean(axis=0), mean_rest)

    c = min(float(np.dot(w, Z[i])) for i in members)
    if options.margin > 0:
        rest = np.ones(Z.shape[0], dtype=bool)
        rest[members] = False
        c -= options.margin * float(np.std(Z[rest] @ w))
    return KnowledgeUnit(
        w=w,
        c=c,
        cluster_size=len(members),
        beta1=cluster.beta1,
        beta2=cluster.beta2,
    )


def fit(data: LabeledData, options: Optional[CorrectorOptions] = None) -> CorrectorModel:
    options = options or CorrectorOptions()
    if data.errors.size == 0:
        raise ParameterError("errors", "at least one error index is required")

    pipeline = fit_pipeline(
        data, options.variance_fraction, options.cond_cap, options.ridge
    )
    Z = pipeline.transform_many(data.points.points)
    clusters = cluster_errors(
        Z[data.errors], options.clusters, options.beta_threshold, options.split_clusters
    )
    logger.info(
        f"Fitting {len(clusters)} knowledge unit(s) for {data.errors.size} errors "
        f"(n={pipeline.n}, m={pipeline.m})"
    )

    totals = (Z.sum(axis=0), Z.T @ Z)
    global_cov = None
    if options.covariance == CovarianceMode.GLOBAL:
        global_cov = np.asarray(covariance(Z))
    units = []
    for i, cluster in enumerate(clusters, start=1):
        members = [int(data.errors[j]) for j in cluster.members]
        units.append(_fit_unit(Z, members, cluster, options, totals, global_cov))
        logger.debug(f"Unit fitted - {i}/{len(clusters)}")

    meta = {
        "samples": int(data.points.count),
        "errors": int(data.errors.size),
        "clusters": len(clusters),
        "seed": data.points.seed,
        "cond_capped": pipeline.cond_capped,
        "options": options.to_dict(),
    }
    return CorrectorModel(pipeline=pipeline, units=tuple(units), meta=meta)


def apply(model: CorrectorModel, x) -> Decision:
    z = model.pipeline.transform(x)
    projections = [unit.projection(z) for unit in model.units]
    fired = tuple(i for i, (p, unit) in enumerate(zip(projections, model.units)) if p >= unit.c)
    scores = tuple(p - unit.c for p, unit in zip(projections, model.units))
    return Decision(flagged=bool(fired), fired_units=fired, scores=scores)


def _rows(model, points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != model.n:
        raise DimensionMismatchError(model.n, points.shape[1], "points")
    return points


def apply_many(model: CorrectorModel, points):
    return [apply(model, x) for x in _rows(model, points)]


def cascade_apply(models, x) -> CascadeDecision:
    if not models:
        raise ParameterError("models", "the cascade needs at least one model")
    return CascadeDecision(tuple(apply(model, x) for model in models))


def cascade_apply_many(models, points):
    if not models:
        raise ParameterError("models", "the cascade needs at least one model")
    for model in models:
        _rows(model, points)
    return [cascade_apply(models, x) for x in np.atleast_2d(np.asarray(points, float))]


def training_recall(model: CorrectorModel, data: LabeledData):
    """Share of the labelled errors of ``data`` that ``model`` flags."""
    if data.errors.size == 0:
        return 1.0
    flagged = [apply(model, data.points.points[i]).flagged for i in data.errors]
    return float(np.mean(flagged))


def residual_errors(models, data: LabeledData):
    """Error indices of ``data`` not flagged by any of ``models``."""
    if not models:
        return data.errors
    return np.array(
        [i for i in data.errors if not cascade_apply(models, data.points.points[i]).flagged],
        dtype=int,
    )


def fit_stage(models, data: LabeledData, options=None) -> Optional[CorrectorModel]:
    """Next cascade stage for the errors the earlier ``models`` miss, or None."""
    residual = residual_errors(models, data)
    if residual.size == 0:
        logger.info("Every error is already flagged by the cascade; no stage fitted")
        return None
    logger.info(f"{residual.size}/{data.errors.size} errors left for the next stage")
    return fit(data.with_errors(residual), options)


def fit_cascade(data: LabeledData, stage_errors, options=None):
    """Stage k is fitted on those of ``stage_errors[k]`` that stages < k miss."""
    models = []
    for k, errors in enumerate(stage_errors):
        logger.info(f"Cascade stage - {k + 1}/{len(stage_errors)}")
        model = fit_stage(models, data.with_errors(errors), options)
        if model is not None:
            models.append(model)
    return models
