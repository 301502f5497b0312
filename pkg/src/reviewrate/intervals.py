"""Confidence intervals for the aggregate surviving-event rate.

Three constructions with different coverage/width trade-offs:

* ``ci_bootstrap`` refits the generative model at the point estimates and
  takes central quantiles of re-simulated estimates. Narrowest intervals,
  but can badly under-cover at low sampling rates.
* ``ci_wald`` uses the normal limit of the estimator with a plug-in variance.
  Its lower bound can go negative and it is unreliable at low event counts.
* ``ci_gamma_wsip`` treats the estimate as a weighted sum of independent
  Poisson counts and inverts gamma distributions matched to its mean and
  variance, with the upper bound widened by the largest weight. Conservative
  (it over-covers and is the widest), which is the preferred trade-off when
  under-coverage is the costlier mistake.
"""

from __future__ import annotations

import math

import numpy as np

from . import _batch
from .distributions import RngStream, gamma_quantile, normal_quantile
from .estimator import estimate_theta
from .model import Dataset, IntervalResult, InvalidDataError, RateEstimate

__all__ = ["ci_bootstrap", "ci_wald", "ci_gamma_wsip"]


def _check_level(level: float) -> float:
    level = float(level)
    if not 0.0 < level < 1.0:
        raise InvalidDataError(f"confidence level must lie in (0, 1), got {level!r}")
    return level


def ci_bootstrap(dataset: Dataset, level: float, B: int, rng: RngStream) -> IntervalResult:
    """Parametric bootstrap interval from ``B`` re-simulated datasets.

    Replicates are generated in one batch on the supplied stream, so the
    result is a deterministic function of ``(dataset, level, B, rng)``.
    Replicates with a zero estimate are kept: the refitted model genuinely
    produces them.
    """
    level = _check_level(level)
    B = int(B)
    if B < 100:
        raise InvalidDataError(f"bootstrap needs at least 100 replicates, got {B}")
    estimate_theta(dataset)  # full validation, errors name the stratum

    e_obs = np.array([s.e for s in dataset.strata], dtype=np.int64)
    n_obs = np.array([s.n for s in dataset.strata], dtype=np.int64)
    lower, upper = _batch.bootstrap_bounds(
        e_obs, n_obs, dataset.config.m, level, B, rng.generator
    )
    return IntervalResult(method="bootstrap", level=level, lower=lower, upper=upper)


def ci_wald(
    estimate: RateEstimate, m: float, level: float, clamp_at_zero: bool = False
) -> IntervalResult:
    """Normal-approximation interval around the point estimate.

    The half-width is ``z * sqrt(variance)`` with the plug-in variance
    ``(1/m) * sum_h lambda_hat_hT / pi_hat_h``. By default the lower bound is
    reported as-is even when negative; ``clamp_at_zero`` floors it at 0.
    A zero estimate yields the degenerate interval (0, 0).
    """
    level = _check_level(level)
    if not m > 0:
        raise InvalidDataError(f"mileage must be positive, got {m!r}")
    variance = sum(
        lam_T / prod for lam_T, prod in zip(estimate.theta_by_stratum, estimate.pi_prod)
    ) / m
    z = normal_quantile(1.0 - (1.0 - level) / 2.0)
    half = z * math.sqrt(variance)
    lower = estimate.theta_hat - half
    if clamp_at_zero:
        lower = max(0.0, lower)
    return IntervalResult(
        method="wald", level=level, lower=lower, upper=estimate.theta_hat + half
    )


def ci_gamma_wsip(estimate: RateEstimate, dataset: Dataset, level: float) -> IntervalResult:
    """Gamma interval for the weighted-sum-of-independent-Poissons approximation.

    The lower bound inverts a gamma matched to (mean, variance) =
    (theta_hat, sum_h w_h^2 e_hT) and is 0 exactly when the estimate is 0;
    the upper bound shifts both moments up by the largest weight, which keeps
    it defined and conservative even with no observed events.
    """
    level = _check_level(level)
    alpha = 1.0 - level
    weights = estimate.weights
    e_T = [s.e[-1] for s in dataset.strata]
    if len(e_T) != len(weights):
        raise InvalidDataError(
            f"estimate covers {len(weights)} strata but dataset has {len(e_T)}"
        )
    variance = sum(w * w * e for w, e in zip(weights, e_T))
    w_max = max(weights)

    theta = estimate.theta_hat
    lower = gamma_quantile(alpha / 2.0, theta, variance) if theta > 0 else 0.0
    upper = gamma_quantile(
        1.0 - alpha / 2.0, theta + w_max, variance + w_max * w_max
    )
    return IntervalResult(method="gamma_wsip", level=level, lower=lower, upper=upper)
