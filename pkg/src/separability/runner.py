"""Run separation experiments trial by trial and turn counts into reports."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Optional

import numpy as np

from .. import __version__
from ..bounds import BallBoundQuery, BoundResult, CubeBoundQuery, TupleBoundQuery
from ..corrector import CorrectorOptions, LabeledData, apply_many, fit
from ..enums import BallVariant, CubeVariant, DistributionKind, Verdict
from ..errors import ParameterError
from ..sampling import DistributionSpec, PointSet, draw_points, make_rng
from ..utils import check_positive_int, check_seed
from .experiments import (
    BallExperiment,
    CubeExperiment,
    Experiment,
    FisherExperiment,
    OrthogonalityExperiment,
    TupleExperiment,
)
from .statistics import VERDICT_CONFIDENCE, WilsonInterval, verdict, wilson_interval

logger = logging.getLogger("Trial Runner")

SPOT_CHECK_EVERY = 100
DEFAULT_TRIALS = 200


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        check_positive_int(self.trials, "trials")
        check_seed(self.seed)
        check_positive_int(self.jobs, "jobs")


@dataclass
class SeparationReport:
    event: str
    params: dict
    trials: int
    successes: int
    interval: WilsonInterval
    bound: BoundResult
    verdict: Verdict
    seed: int
    detail: dict = field(default_factory=dict)
    spot_check: dict = field(default_factory=dict)
    note: Optional[str] = None
    bound_applicable: bool = True

    @property
    def frequency(self):
        return self.successes / self.trials

    def to_dict(self):
        data = {
            "event": self.event,
            "params": dict(self.params),
            "trials": self.trials,
            "successes": self.successes,
            "frequency": self.frequency,
            "wilson99": [self.interval.lower, self.interval.upper],
            "bound": self.bound.value,
            "bound_name": self.bound.name,
            "bound_applicable": self.bound_applicable,
            "verdict": self.verdict.value,
            "seed": self.seed,
            "detail": dict(self.detail),
            "spot_check": dict(self.spot_check),
            "sepkit_version": __version__,
        }
        if self.bound.name == "tuple":
            data["maximizer_detail"] = dict(self.bound.detail)
        if self.note:
            data["note"] = self.note
        return data


def _run_trial(experiment: Experiment, seed, spot_check_every, index):
    rng = make_rng(seed, index)
    sample = experiment.draw(rng)
    outcome = experiment.event(sample)
    checked = spot_check_every > 0 and index % spot_check_every == 0
    mismatch = checked and experiment.recheck(sample) != outcome.success
    return outcome, checked, mismatch


class TrialRunner:
    """Runs the trials of an experiment, serially or over a process pool.

    Trial ``i`` always draws from stream ``i`` of the master seed and the
    counts are summed in trial order, so the report does not depend on
    ``jobs``.
    """

    def __init__(self, jobs=1, spot_check_every=SPOT_CHECK_EVERY):
        self.jobs = check_positive_int(jobs, "jobs")
        self.spot_check_every = spot_check_every

    def _outcomes(self, experiment, config):
        worker = partial(_run_trial, experiment, config.seed, self.spot_check_every)
        indices = range(config.trials)
        if self.jobs == 1 or config.trials == 1:
            for index in indices:
                yield worker(index)
            return
        chunksize = max(1, config.trials // (4 * self.jobs))
        with Pool(self.jobs) as pool:
            yield from pool.imap(worker, indices, chunksize=chunksize)

    def run(self, experiment: Experiment, config: ExperimentConfig) -> SeparationReport:
        logger.info(
            f"Running `{experiment.name}` for {config.trials} trials "
            f"(seed={config.seed}, jobs={self.jobs})"
        )
        successes = 0
        counts = {}
        checked = 0
        mismatches = 0
        step = max(1, config.trials // 10)
        for i, (outcome, was_checked, mismatch) in enumerate(
            self._outcomes(experiment, config), start=1
        ):
            successes += int(outcome.success)
            for key, value in outcome.counts.items():
                counts[key] = counts.get(key, 0) + value
            checked += int(was_checked)
            mismatches += int(mismatch)
            if i % step == 0:
                logger.debug(f"Trials done - {i}/{config.trials}")

        if mismatches:
            logger.warning(
                f"Spot check of `{experiment.name}` found {mismatches} "
                f"mismatching trial(s) out of {checked}"
            )

        bound = experiment.bound()
        interval = wilson_interval(successes, config.trials, VERDICT_CONFIDENCE)
        if experiment.bound_applicable:
            result = verdict(successes / config.trials, bound.value, interval)
        else:
            result = Verdict.NOT_APPLICABLE
        logger.info(
            f"`{experiment.name}`: {successes}/{config.trials} successes, "
            f"bound {bound.value:.6g}, {result.value}"
        )
        return SeparationReport(
            event=experiment.name,
            params=experiment.params(),
            trials=config.trials,
            successes=successes,
            interval=interval,
            bound=bound,
            verdict=result,
            seed=config.seed,
            detail=experiment.summarize(counts, config.trials),
            spot_check={"checked": checked, "mismatches": mismatches},
            note=experiment.note,
            bound_applicable=experiment.bound_applicable,
        )


def _run(experiment, trials, seed, jobs):
    config = ExperimentConfig(trials=trials, seed=seed, jobs=jobs)
    return TrialRunner(jobs).run(experiment, config)


def orthogonality_experiment(n, N, eps, trials, seed, jobs=1) -> SeparationReport:
    return _run(OrthogonalityExperiment(n, N, eps), trials, seed, jobs)


def ball_experiment(
    q: BallBoundQuery, variant=BallVariant.SINGLE, trials=DEFAULT_TRIALS, seed=0, jobs=1
) -> SeparationReport:
    return _run(BallExperiment(q, variant), trials, seed, jobs)


def cube_experiment(
    q: CubeBoundQuery,
    variant=CubeVariant.SINGLE,
    trials=DEFAULT_TRIALS,
    seed=0,
    jobs=1,
    means=None,
) -> SeparationReport:
    return _run(CubeExperiment(q, variant, means), trials, seed, jobs)


def tuple_experiment(q: TupleBoundQuery, trials=DEFAULT_TRIALS, seed=0, jobs=1):
    return _run(TupleExperiment(q), trials, seed, jobs)


def fisher_separability_experiment(
    n, M, trials=DEFAULT_TRIALS, seed=0, jobs=1, r=0.9, kind=DistributionKind.BALL
) -> SeparationReport:
    return _run(FisherExperiment(n, M, r, kind), trials, seed, jobs)


@dataclass
class CollateralReport:
    n: int
    M: int
    trials: int
    seed: int
    rows: list

    def to_dict(self):
        return {
            "event": "collateral-sweep",
            "params": {"n": self.n, "M": self.M},
            "trials": self.trials,
            "seed": self.seed,
            "rows": [dict(row) for row in self.rows],
            "sepkit_version": __version__,
        }


def collateral_sweep(n, M, error_counts, trials=DEFAULT_TRIALS, seed=0) -> CollateralReport:
    """Collateral flagging of one knowledge unit fitted to k errors.

    For every k, each trial draws a ball sample of size M, labels k random
    points as errors, fits a corrector with a single cluster and measures the
    share of correct points it flags on the fitting sample and on a fresh
    sample of the same size.
    """
    n = check_positive_int(n, "n")
    M = check_positive_int(M, "M", minimum=3)
    trials = check_positive_int(trials, "trials")
    seed = check_seed(seed)
    error_counts = [check_positive_int(k, "errors") for k in error_counts]
    if not error_counts:
        raise ParameterError("errors", "at least one error count is required")
    for k in error_counts:
        if k > M - 2:
            raise ParameterError("errors", f"{k} errors leave fewer than 2 correct points")

    spec = DistributionSpec.ball(n)
    # one functional for all k errors, whatever their correlation
    options = CorrectorOptions(clusters=1, split_clusters=False)
    rows = []
    for position, k in enumerate(error_counts):
        logger.info(f"Collateral sweep: k={k} - {position + 1}/{len(error_counts)}")
        fitting_rates = []
        fresh_rates = []
        for trial in range(trials):
            rng = make_rng(seed, (position, trial))
            points = PointSet(draw_points(spec, M, rng), spec, seed)
            errors = np.sort(rng.choice(M, size=k, replace=False))
            model = fit(LabeledData(points, errors), options)

            flagged = np.array([d.flagged for d in apply_many(model, points.points)])
            correct = np.ones(M, dtype=bool)
            correct[errors] = False
            fitting_rates.append(float(flagged[correct].mean()))

            fresh = draw_points(spec, M, rng)
            fresh_flags = [d.flagged for d in apply_many(model, fresh)]
            fresh_rates.append(float(np.mean(fresh_flags)))

        rows.append(
            {
                "errors": k,
                "fitting_flag_rate": float(np.mean(fitting_rates)),
                "fitting_flag_rate_max": float(np.max(fitting_rates)),
                "fresh_flag_rate": float(np.mean(fresh_rates)),
                "fresh_flag_rate_max": float(np.max(fresh_rates)),
            }
        )
    return CollateralReport(n=n, M=M, trials=trials, seed=seed, rows=rows)
