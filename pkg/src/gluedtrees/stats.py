"""Monte Carlo estimates with Wald errors and Clopper-Pearson upper bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from scipy.stats import beta

CONFIDENCE = 0.99


def clopper_pearson_upper(successes: float, trials: float, confidence: float = CONFIDENCE) -> float:
    """Upper end of the two-sided exact binomial interval.

    ``successes`` may be fractional when an effective sample size is used.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if successes >= trials:
        return 1.0
    q = 1.0 - (1.0 - confidence) / 2.0
    return float(beta.ppf(q, successes + 1, trials - successes))


def clopper_pearson_lower(successes: float, trials: float, confidence: float = CONFIDENCE) -> float:
    if trials <= 0:
        raise ValueError("trials must be positive")
    if successes <= 0:
        return 0.0
    q = (1.0 - confidence) / 2.0
    return float(beta.ppf(q, successes, trials - successes + 1))


@dataclass(frozen=True)
class Estimate:
    trials: int
    successes: int
    mean: float
    stderr: float
    ci99_upper: float
    seed: int | None = None
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise ValueError(f"invalid counts {self.successes}/{self.trials}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Estimate":
        return cls(**d)


def binomial_estimate(successes: int, trials: int, seed: int | None = None, parameters=None) -> Estimate:
    successes, trials = int(successes), int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    return Estimate(
        trials=trials,
        successes=successes,
        mean=p,
        stderr=math.sqrt(p * (1.0 - p) / trials),
        ci99_upper=clopper_pearson_upper(successes, trials),
        seed=seed,
        parameters=dict(parameters or {}),
    )


def clustered_estimate(
    successes: Sequence[int],
    trials: Sequence[int],
    seed: int | None = None,
    parameters=None,
) -> Estimate:
    """Pooled estimate over clusters (one cluster per sampled graph).

    The standard error is the cluster-robust ratio-estimator error, floored at
    the plain binomial error.  The upper bound is Clopper-Pearson evaluated at
    the design-effect-adjusted sample size.
    """
    if len(successes) != len(trials) or not trials:
        raise ValueError("need matching, non-empty per-cluster counts")
    total = int(sum(trials))
    hits = int(sum(successes))
    if total < 1:
        raise ValueError("trials must be >= 1")
    p = hits / total
    binom_var = p * (1.0 - p) / total
    var = binom_var
    k = len(trials)
    if k > 1:
        resid = sum((y - p * m) ** 2 for y, m in zip(successes, trials))
        var = max(binom_var, k / (k - 1) * resid / total**2)
    if p in (0.0, 1.0) or var <= 0:
        upper = clopper_pearson_upper(hits, total)
    else:
        n_eff = total * binom_var / var
        upper = clopper_pearson_upper(p * n_eff, n_eff)
    return Estimate(
        trials=total,
        successes=hits,
        mean=p,
        stderr=math.sqrt(var),
        ci99_upper=max(upper, p),
        seed=seed,
        parameters=dict(parameters or {}),
    )
