"""Domain types shared by the generator, estimator, interval, and study modules.

All types are immutable value objects. Observed counts are deliberately
permissive at construction time (any integer content is accepted) so that
data read from files can be inspected; :func:`validate_observed` performs the
full consistency check and reports the first violated constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

__all__ = [
    "InvalidDataError",
    "ReviewConfig",
    "StratumParams",
    "Scenario",
    "LatentTable",
    "ObservedStratum",
    "Dataset",
    "RateEstimate",
    "IntervalResult",
    "ValidationResult",
    "validate_observed",
    "CI_METHODS",
]

CI_METHODS = ("bootstrap", "wald", "gamma_wsip")


class InvalidDataError(ValueError):
    """Raised when observed data or a scenario violates a structural constraint."""


def _int_tuple(values: Iterable[Any], what: str) -> tuple[int, ...]:
    out = []
    for v in values:
        i = int(v)
        if i != v:
            raise InvalidDataError(f"{what} must be integers, got {v!r}")
        out.append(i)
    return tuple(out)


@dataclass(frozen=True)
class ReviewConfig:
    """Shape of one review process: mileage, stratum count, and tier count."""

    m: float
    H: int
    T: int

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise InvalidDataError(f"mileage must be positive, got {self.m!r}")
        if self.H < 1:
            raise InvalidDataError(f"stratum count must be at least 1, got {self.H!r}")
        if self.T < 1:
            raise InvalidDataError(f"tier count must be at least 1, got {self.T!r}")


@dataclass(frozen=True)
class StratumParams:
    """Per-stratum event rates (one per class, T+1 of them) and per-tier sampling rates."""

    lambdas: tuple[float, ...]
    pis: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "pis", tuple(float(v) for v in self.pis))
        if len(self.lambdas) != len(self.pis) + 1:
            raise InvalidDataError(
                f"expected one more rate than sampling rates, got {len(self.lambdas)} rates "
                f"and {len(self.pis)} sampling rates"
            )
        for v in self.lambdas:
            if not v >= 0:
                raise InvalidDataError(f"rates must be non-negative, got {v!r}")
        for v in self.pis:
            # pi = 0 would make the rate unidentifiable, so it is rejected outright.
            if not 0 < v <= 1:
                raise InvalidDataError(f"sampling rates must lie in (0, 1], got {v!r}")

    @property
    def tiers(self) -> int:
        return len(self.pis)


@dataclass(frozen=True)
class Scenario:
    """A full parameterization: configuration plus per-stratum parameters."""

    config: ReviewConfig
    strata: tuple[StratumParams, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "strata", tuple(self.strata))
        if len(self.strata) != self.config.H:
            raise InvalidDataError(
                f"expected {self.config.H} strata, got {len(self.strata)}"
            )
        for i, s in enumerate(self.strata):
            if s.tiers != self.config.T:
                raise InvalidDataError(
                    f"stratum {i} has {s.tiers} tiers, expected {self.config.T}"
                )

    @property
    def theta(self) -> float:
        """True aggregate rate of events that survive every tier."""
        return sum(s.lambdas[-1] for s in self.strata)

    def to_dict(self) -> dict:
        return {
            "m": self.config.m,
            "H": self.config.H,
            "T": self.config.T,
            "strata": [
                {"lambdas": list(s.lambdas), "pis": list(s.pis)} for s in self.strata
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            config = ReviewConfig(m=float(data["m"]), H=int(data["H"]), T=int(data["T"]))
            strata = tuple(
                StratumParams(lambdas=tuple(s["lambdas"]), pis=tuple(s["pis"]))
                for s in data["strata"]
            )
        except (KeyError, TypeError) as exc:
            raise InvalidDataError(f"malformed scenario document: {exc}") from exc
        return cls(config=config, strata=strata)


@dataclass(frozen=True)
class LatentTable:
    """Complete-review class counts, hidden from the estimator.

    ``x[t][s]`` counts the events of class ``t`` present in escalation set
    ``s``; class ``t < T`` holds events a tier ``t+1`` review would reject,
    class ``T`` holds events no tier would reject. Row ``t`` has entries for
    ``s = 0..t`` (an event rejected at tier ``t+1`` cannot survive past
    escalation set ``t``), giving a lower-triangular layout.
    """

    x: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(_int_tuple(row, "latent counts") for row in self.x)
        object.__setattr__(self, "x", rows)
        for t, row in enumerate(rows):
            if len(row) != t + 1:
                raise InvalidDataError(
                    f"latent row {t} must have {t + 1} entries, got {len(row)}"
                )
            if any(v < 0 for v in row):
                raise InvalidDataError(f"latent counts must be non-negative, got row {row}")

    @property
    def tiers(self) -> int:
        return len(self.x) - 1

    def escalation_totals(self) -> tuple[int, ...]:
        """Column sums: the pool size of each escalation set implied by the table."""
        T = self.tiers
        return tuple(sum(self.x[t][s] for t in range(s, T + 1)) for s in range(T + 1))


@dataclass(frozen=True)
class ObservedStratum:
    """Observable per-tier counts for one stratum: pool sizes ``e`` and review sizes ``n``."""

    e: tuple[int, ...]
    n: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "e", _int_tuple(self.e, "escalation counts"))
        object.__setattr__(self, "n", _int_tuple(self.n, "review counts"))

    @property
    def tiers(self) -> int:
        return len(self.n)


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of a structural check; falsy when invalid, with the first violation named."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_observed(stratum: ObservedStratum, tiers: int | None = None) -> ValidationResult:
    """Check every structural constraint of an observed stratum.

    Verifies the shape (``len(e) == len(n) + 1``, optionally against an
    expected tier count), non-negativity, the per-tier ordering
    ``e_t <= n_t <= e_{t-1}``, that a non-empty pool is always reviewed at
    least once, and that all counts stay zero after an empty pool.
    """
    e, n = stratum.e, stratum.n
    if len(e) != len(n) + 1:
        return ValidationResult(
            False, f"expected len(e) == len(n) + 1, got len(e)={len(e)} and len(n)={len(n)}"
        )
    if tiers is not None and len(n) != tiers:
        return ValidationResult(False, f"expected {tiers} tiers, got {len(n)}")
    if any(v < 0 for v in e):
        return ValidationResult(False, f"negative escalation count in e={e}")
    if any(v < 0 for v in n):
        return ValidationResult(False, f"negative review count in n={n}")
    for t in range(1, len(e)):
        prev, reviewed, escalated = e[t - 1], n[t - 1], e[t]
        if prev == 0:
            if reviewed != 0 or escalated != 0:
                return ValidationResult(
                    False,
                    f"tier {t}: counts must stay zero after an empty pool, "
                    f"got n_{t}={reviewed}, e_{t}={escalated}",
                )
        else:
            if reviewed < 1:
                return ValidationResult(
                    False, f"tier {t}: a non-empty pool must be reviewed, got n_{t}=0"
                )
            if reviewed > prev:
                return ValidationResult(
                    False, f"tier {t}: n_{t}={reviewed} exceeds the pool e_{t-1}={prev}"
                )
            if escalated > reviewed:
                return ValidationResult(
                    False, f"tier {t}: e_{t}={escalated} exceeds the review count n_{t}={reviewed}"
                )
    return ValidationResult(True)


@dataclass(frozen=True)
class Dataset:
    """Observed counts for every stratum under one configuration."""

    config: ReviewConfig
    strata: tuple[ObservedStratum, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "strata", tuple(self.strata))
        if len(self.strata) != self.config.H:
            raise InvalidDataError(
                f"expected {self.config.H} strata, got {len(self.strata)}"
            )
        for i, s in enumerate(self.strata):
            if len(s.e) != self.config.T + 1 or len(s.n) != self.config.T:
                raise InvalidDataError(
                    f"stratum {i} has shape e[{len(s.e)}]/n[{len(s.n)}], "
                    f"expected e[{self.config.T + 1}]/n[{self.config.T}]"
                )

    def to_dict(self) -> dict:
        return {
            "m": self.config.m,
            "strata": [{"e": list(s.e), "n": list(s.n)} for s in self.strata],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dataset":
        try:
            m = float(data["m"])
            strata = tuple(
                ObservedStratum(e=tuple(s["e"]), n=tuple(s["n"])) for s in data["strata"]
            )
        except (KeyError, TypeError) as exc:
            raise InvalidDataError(f"malformed dataset document: {exc}") from exc
        if not strata:
            raise InvalidDataError("dataset must contain at least one stratum")
        tiers = strata[0].tiers
        config = ReviewConfig(m=m, H=len(strata), T=tiers)
        return cls(config=config, strata=strata)


@dataclass(frozen=True)
class RateEstimate:
    """Point estimates for one dataset.

    ``Lambda_hat[h][t]`` estimates the rate of events that would survive
    tiers 1..t in stratum h, ``lambda_hat[h][t]`` the per-class rates,
    ``pi_hat[h][t]`` the per-tier sampling rates (filled with 1 past early
    termination), ``pi_prod[h]`` their product, and ``weights[h]`` the
    inverse-sampling weight ``1 / (m * pi_prod[h])``. ``theta_hat`` is the
    aggregate surviving-event rate, the sum over strata of the last
    ``lambda_hat`` entry.
    """

    Lambda_hat: tuple[tuple[float, ...], ...]
    lambda_hat: tuple[tuple[float, ...], ...]
    pi_hat: tuple[tuple[float, ...], ...]
    pi_prod: tuple[float, ...]
    weights: tuple[float, ...]
    theta_hat: float

    @property
    def theta_by_stratum(self) -> tuple[float, ...]:
        return tuple(lam[-1] for lam in self.lambda_hat)


@dataclass(frozen=True)
class IntervalResult:
    """A two-sided confidence interval for the aggregate rate."""

    method: str
    level: float
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.method not in CI_METHODS:
            raise InvalidDataError(
                f"unknown interval method {self.method!r}; expected one of {CI_METHODS}"
            )
        if not 0 < self.level < 1:
            raise InvalidDataError(f"confidence level must lie in (0, 1), got {self.level!r}")
        if not self.lower <= self.upper:
            raise InvalidDataError(
                f"interval bounds are inverted: ({self.lower!r}, {self.upper!r})"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower
