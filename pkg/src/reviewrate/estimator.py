"""Point estimation from observed tiered-review counts.

The survival-rate estimate for tier t multiplies the observed pool sizes and
divides by the review sizes, which is the inverse-sampling-weighted count of
events still alive after t tiers, normalized by mileage:

    Lambda_hat[0] = e_0 / m
    Lambda_hat[t] = Lambda_hat[t-1] * e_t / n_t      while the pool is non-empty

Per-class rates are consecutive differences of the survival rates, and the
aggregate rate is the sum over strata of the last per-class rate. An empty
pool at any tier zeroes every later estimate.

``em_fixed_point_residual_t2`` evaluates, for two review tiers, the
three-equation fixed-point system that the expectation-maximization update of
the latent class counts must satisfy at a maximum of the likelihood. It is a
verification oracle: the closed-form estimate above zeroes all three
residuals, and perturbed points do not.
"""

from __future__ import annotations

from .model import Dataset, InvalidDataError, ObservedStratum, RateEstimate, validate_observed

__all__ = [
    "estimate_Lambda",
    "estimate_lambda",
    "estimate_pi",
    "estimate_theta",
    "em_fixed_point_residual_t2",
]


def _checked(stratum: ObservedStratum, label: str = "stratum") -> None:
    check = validate_observed(stratum)
    if not check:
        raise InvalidDataError(f"invalid {label}: {check.reason}")


def estimate_Lambda(stratum: ObservedStratum, m: float) -> tuple[float, ...]:
    """Estimated rates of events that would survive tiers 1..t, for t = 0..T.

    The sequence is non-increasing; division by a review count only happens
    where the incoming pool was non-empty, which guarantees it is at least 1.
    """
    _checked(stratum)
    if not m > 0:
        raise InvalidDataError(f"mileage must be positive, got {m!r}")
    e, n = stratum.e, stratum.n
    out = [e[0] / m]
    for t in range(1, len(e)):
        if e[t - 1] == 0:
            out.append(0.0)
        else:
            # The escalation fraction is computed first: e_t/n_t <= 1 exactly for
            # integer counts, so the sequence is non-increasing to the last bit.
            out.append(out[t - 1] * (e[t] / n[t - 1]))
    return tuple(out)


def estimate_lambda(stratum: ObservedStratum, m: float) -> tuple[float, ...]:
    """Estimated per-class rates: differences of consecutive survival rates."""
    Lam = estimate_Lambda(stratum, m)
    T = len(Lam) - 1
    return tuple(Lam[t] - Lam[t + 1] for t in range(T)) + (Lam[T],)


def estimate_pi(stratum: ObservedStratum) -> tuple[float, ...]:
    """Estimated per-tier sampling rates, ``n_t / e_{t-1}``.

    Tiers whose incoming pool was empty never sampled anything; they get 1 so
    that downstream inverse-sampling weights stay finite (such strata
    contribute a zero rate anyway).
    """
    _checked(stratum)
    e, n = stratum.e, stratum.n
    return tuple(n[t - 1] / e[t - 1] if e[t - 1] > 0 else 1.0 for t in range(1, len(e)))


def estimate_theta(dataset: Dataset) -> RateEstimate:
    """Full point estimate for a dataset: per-stratum rates, weights, and the aggregate."""
    m = dataset.config.m
    for h, stratum in enumerate(dataset.strata):
        _checked(stratum, label=f"stratum {h}")

    Lambda_hat = tuple(estimate_Lambda(s, m) for s in dataset.strata)
    lambda_hat = tuple(estimate_lambda(s, m) for s in dataset.strata)
    pi_hat = tuple(estimate_pi(s) for s in dataset.strata)

    pi_prod = []
    for pis in pi_hat:
        prod = 1.0
        for p in pis:
            prod *= p
        pi_prod.append(prod)
    weights = tuple(1.0 / (m * prod) for prod in pi_prod)
    theta_hat = sum(lam[-1] for lam in lambda_hat)

    return RateEstimate(
        Lambda_hat=Lambda_hat,
        lambda_hat=lambda_hat,
        pi_hat=pi_hat,
        pi_prod=tuple(pi_prod),
        weights=weights,
        theta_hat=theta_hat,
    )


def em_fixed_point_residual_t2(
    stratum: ObservedStratum, lambdas: tuple[float, float, float], m: float = 1.0
) -> tuple[float, float, float]:
    """Residuals of the two-tier EM fixed-point system at a candidate rate triple.

    Each residual is the candidate rate minus the conditional expectation of
    the matching latent class count given the observed counts; all three
    vanish exactly at the maximum-likelihood rates. Counts are evaluated at
    mileage 1, so callers pass rates scaled by ``m`` (the default leaves
    them untouched).

    The expectation allocates the unreviewed portion of each pool across the
    classes still alive there, proportionally to the candidate rates. When
    the surviving-class mass ``lambdas[1] + lambdas[2]`` is zero, there is no
    mass to allocate proportionally and that allocation term is dropped,
    which keeps the oracle informative at such degenerate candidate points
    instead of failing on them.
    """
    _checked(stratum)
    if stratum.tiers != 2:
        raise InvalidDataError(f"the fixed-point system is defined for 2 tiers, got {stratum.tiers}")
    e, n = stratum.e, stratum.n
    if e[0] < 1 or e[1] < 1:
        raise InvalidDataError("the fixed-point system needs a non-terminated stratum (e_0, e_1 >= 1)")

    lam0, lam1, lam2 = (float(v) * float(m) for v in lambdas)
    total = lam0 + lam1 + lam2
    tail = lam1 + lam2
    if total <= 0:
        raise ValueError("the candidate rates must have positive total mass")

    def tail_share(lam: float) -> float:
        return lam / tail if tail > 0 else 0.0

    expect0 = (e[0] - n[0]) * (lam0 / total) + (n[0] - e[1])
    expect1 = (e[0] - n[0]) * (lam1 / total) + (e[1] - n[1]) * tail_share(lam1) + (n[1] - e[2])
    expect2 = (e[0] - n[0]) * (lam2 / total) + (e[1] - n[1]) * tail_share(lam2) + e[2]
    return (lam0 - expect0, lam1 - expect1, lam2 - expect2)
