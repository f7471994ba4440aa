"""Wilson score interval and the PASS/FAIL rule of the separation reports."""

import math
from dataclasses import dataclass

from scipy.stats import norm

from ..enums import Verdict
from ..errors import ParameterError

VERDICT_CONFIDENCE = 0.99


@dataclass(frozen=True)
class WilsonInterval:
    lower: float
    upper: float
    halfwidth: float


def wilson_interval(successes, trials, confidence=VERDICT_CONFIDENCE) -> WilsonInterval:
    """Wilson score interval for a binomial proportion.

    Unlike the normal approximation it stays inside [0, 1] and is usable at
    0 or T successes, which is where separation frequencies live.
    """
    if trials < 1:
        raise ParameterError("trials", "must be >= 1")
    if not 0 <= successes <= trials:
        raise ParameterError("successes", f"must lie in [0, {trials}]")
    if not 0 < confidence < 1:
        raise ParameterError("confidence", "must lie in (0, 1)")

    z = float(norm.ppf(0.5 + confidence / 2))
    p_hat = successes / trials
    denominator = 1 + z**2 / trials
    center = (p_hat + z**2 / (2 * trials)) / denominator
    margin = (z / denominator) * math.sqrt(
        p_hat * (1 - p_hat) / trials + z**2 / (4 * trials**2)
    )
    # the limits are exact at the ends of the range
    lower = 0.0 if successes == 0 else max(0.0, center - margin)
    upper = 1.0 if successes == trials else min(1.0, center + margin)
    return WilsonInterval(lower=lower, upper=upper, halfwidth=margin)


def verdict(frequency, bound, interval: WilsonInterval) -> Verdict:
    """PASS unless the frequency sits significantly below the lower bound."""
    if frequency >= bound - interval.halfwidth:
        return Verdict.PASS
    return Verdict.FAIL
