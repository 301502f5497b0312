"""Monte Carlo coverage studies over fixed and randomized scenarios.

A sweep repeatedly simulates a scenario, estimates the aggregate rate,
builds the requested confidence intervals, and tallies how often each
interval contains the true rate, split into lower misses (truth below the
interval) and upper misses (truth above it). Two fixed five-stratum,
three-tier scenarios sweep the first-tier sampling rate over a grid; the
comprehensive study instead randomizes all rates and sampling rates per
scenario and is summarized in moving windows of the expected number of
observed surviving events.

Replications are vectorized: each (scenario, grid point) batch-generates all
its replications on one child stream, and each replication's bootstrap runs
on its own sub-stream. Output ordering is canonical (scenario, grid point,
method), so a sweep is a pure function of its spec.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _batch
from .distributions import RngStream
from .model import CI_METHODS, InvalidDataError, ReviewConfig, Scenario, StratumParams

__all__ = [
    "StudySpec",
    "CoverageRow",
    "WindowSummary",
    "scenario_common",
    "scenario_rare",
    "scenario_comprehensive",
    "expected_observed_tp",
    "run_sweep",
    "summarize_comprehensive",
    "rows_to_csv",
    "DEFAULT_PI1_GRID",
]

STUDY_SOURCES = ("fixed-common", "fixed-rare", "comprehensive")

DEFAULT_PI1_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))

_COMMON_LAMBDAS = (
    (10.0, 5.0, 2.5, 18.0),
    (20.0, 15.0, 25.0, 10.0),
    (20.0, 30.0, 8.0, 5.0),
    (5.0, 6.0, 25.0, 10.0),
    (30.0, 12.0, 4.0, 15.0),
)
_RARE_LAST_COLUMN = (4.0, 2.0, 1.0, 2.0, 2.0)
_UPPER_TIER_PIS = (
    (0.5, 0.95),
    (0.6, 0.96),
    (0.7, 0.97),
    (0.8, 0.98),
    (0.9, 0.99),
)

CSV_HEADER = (
    "scenario_id",
    "pi1",
    "expected_tp",
    "method",
    "level",
    "reps",
    "coverage",
    "lower_miss",
    "upper_miss",
    "mean_width",
)


@dataclass(frozen=True)
class StudySpec:
    """Everything a sweep needs; two specs that compare equal produce identical rows."""

    source: str
    pi1_grid: tuple[float, ...] = DEFAULT_PI1_GRID
    replications: int = 1000
    level: float = 0.9
    methods: tuple[str, ...] = CI_METHODS
    B: int = 2000
    num_scenarios: int = 100_000
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.source not in STUDY_SOURCES:
            raise InvalidDataError(
                f"unknown study source {self.source!r}; expected one of {STUDY_SOURCES}"
            )
        object.__setattr__(self, "pi1_grid", tuple(float(p) for p in self.pi1_grid))
        if any(not 0 < p <= 1 for p in self.pi1_grid):
            raise InvalidDataError(f"grid values must lie in (0, 1], got {self.pi1_grid}")
        if self.replications < 1:
            raise InvalidDataError(f"replications must be at least 1, got {self.replications}")
        if not 0 < self.level < 1:
            raise InvalidDataError(f"level must lie in (0, 1), got {self.level!r}")
        object.__setattr__(self, "methods", tuple(self.methods))
        for method in self.methods:
            if method not in CI_METHODS:
                raise InvalidDataError(
                    f"unknown method {method!r}; expected a subset of {CI_METHODS}"
                )
        if self.num_scenarios < 1:
            raise InvalidDataError(f"num_scenarios must be at least 1, got {self.num_scenarios}")
        if "bootstrap" in self.methods and self.B < 100:
            raise InvalidDataError(f"bootstrap needs at least 100 replicates, got B={self.B}")


@dataclass(frozen=True)
class CoverageRow:
    """Coverage tally for one (scenario, grid point, method) cell.

    Counts are kept as integers so that covered + lower misses + upper
    misses always reconstructs the replication count exactly.
    """

    scenario_id: str
    pi1: float | None
    expected_tp: float
    method: str
    level: float
    reps: int
    cover_n: int
    lower_miss_n: int
    upper_miss_n: int
    mean_width: float

    @property
    def coverage(self) -> float:
        return self.cover_n / self.reps

    @property
    def lower_miss(self) -> float:
        return self.lower_miss_n / self.reps

    @property
    def upper_miss(self) -> float:
        return self.upper_miss_n / self.reps


def scenario_common(pi1: float = 1.0) -> Scenario:
    """The fixed five-stratum, three-tier scenario with a high surviving-event rate.

    The first-tier sampling rate is the sweep's free parameter and is filled
    in here; the higher tiers keep their fixed per-stratum rates.
    """
    return _fixed_scenario(_COMMON_LAMBDAS, pi1)


def scenario_rare(pi1: float = 1.0) -> Scenario:
    """The common scenario with the surviving-event rates lowered to rare levels."""
    lambdas = tuple(
        row[:3] + (last,) for row, last in zip(_COMMON_LAMBDAS, _RARE_LAST_COLUMN)
    )
    return _fixed_scenario(lambdas, pi1)


def _fixed_scenario(lambdas: tuple[tuple[float, ...], ...], pi1: float) -> Scenario:
    strata = tuple(
        StratumParams(lambdas=row, pis=(float(pi1),) + upper)
        for row, upper in zip(lambdas, _UPPER_TIER_PIS)
    )
    return Scenario(config=ReviewConfig(m=1.0, H=5, T=3), strata=strata)


def scenario_comprehensive(rng: RngStream) -> Scenario:
    """Draw one randomized five-stratum, three-tier scenario.

    Per stratum, in order: a mean in Uniform(1, 4) then an exponential rate
    with that mean for each of the four classes (one vectorized call each),
    then the three sampling rates, the first Uniform(0, 1) and each later one
    uniform between its predecessor and 1 so rates never decrease across
    tiers. A zero first-tier draw is redrawn since zero sampling rates are
    rejected by construction.
    """
    gen = rng.generator
    strata = []
    for _ in range(5):
        means = gen.uniform(1.0, 4.0, size=4)
        lambdas = gen.exponential(scale=means)
        pi1 = gen.uniform(0.0, 1.0)
        while pi1 == 0.0:
            pi1 = gen.uniform(0.0, 1.0)
        pi2 = gen.uniform(pi1, 1.0)
        pi3 = gen.uniform(pi2, 1.0)
        strata.append(StratumParams(lambdas=tuple(lambdas), pis=(pi1, pi2, pi3)))
    return Scenario(config=ReviewConfig(m=1.0, H=5, T=3), strata=tuple(strata))


def expected_observed_tp(scenario: Scenario) -> float:
    """Expected number of surviving events that reach and pass the last tier's review."""
    total = 0.0
    for params in scenario.strata:
        prod = 1.0
        for p in params.pis:
            prod *= p
        total += scenario.config.m * params.lambdas[-1] * prod
    return total


def _scenario_arrays(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    lam = np.array([s.lambdas for s in scenario.strata], dtype=float)
    pis = np.array([s.pis for s in scenario.strata], dtype=float)
    return lam, pis


def _coverage_rows(
    scenario: Scenario,
    theta_true: float,
    scenario_id: str,
    pi1: float | None,
    spec: StudySpec,
    cell_stream: RngStream,
) -> list[CoverageRow]:
    """Run all replications for one (scenario, grid point) cell and tally per method."""
    lam, pis = _scenario_arrays(scenario)
    m = scenario.config.m
    R = spec.replications

    # Sub-stream 0 generates the data; sub-stream 1 parents the per-replication
    # bootstrap streams, so changing the method set never perturbs the data.
    e, n = _batch.generate_counts(lam, pis, m, R, cell_stream.child(0).generator)
    est = _batch.estimate_counts(e, n, m)
    expected_tp = expected_observed_tp(scenario)

    bounds: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for method in spec.methods:
        if method == "wald":
            bounds[method] = _batch.wald_bounds(est.theta, est.wald_var, spec.level)
        elif method == "gamma_wsip":
            bounds[method] = _batch.gamma_bounds(est.theta, est.gamma_var, est.w_max, spec.level)
        elif method == "bootstrap":
            boot_root = cell_stream.child(1)
            lower = np.empty(R)
            upper = np.empty(R)
            for r in range(R):
                lower[r], upper[r] = _batch.bootstrap_bounds(
                    e[:, :, r], n[:, :, r], m, spec.level, spec.B, boot_root.child(r).generator
                )
            bounds[method] = (lower, upper)

    rows = []
    for method in CI_METHODS:
        if method not in bounds:
            continue
        lower, upper = bounds[method]
        lower_miss = int(np.count_nonzero(theta_true < lower))
        upper_miss = int(np.count_nonzero(theta_true > upper))
        rows.append(
            CoverageRow(
                scenario_id=scenario_id,
                pi1=pi1,
                expected_tp=expected_tp,
                method=method,
                level=spec.level,
                reps=R,
                cover_n=R - lower_miss - upper_miss,
                lower_miss_n=lower_miss,
                upper_miss_n=upper_miss,
                mean_width=float(np.mean(upper - lower)),
            )
        )
    return rows


def run_sweep(spec: StudySpec) -> list[CoverageRow]:
    """Run a full coverage study and return its rows in canonical order.

    Fixed studies iterate the first-tier sampling grid; the comprehensive
    study iterates freshly drawn scenarios. Data streams live under one
    branch of the master stream and scenario-parameter draws under another,
    so the two can never collide.
    """
    root = RngStream(spec.master_seed)
    data_root = root.child(0)
    param_root = root.child(1)

    rows: list[CoverageRow] = []
    if spec.source == "comprehensive":
        for si in range(spec.num_scenarios):
            scenario = scenario_comprehensive(param_root.child(si))
            rows.extend(
                _coverage_rows(
                    scenario,
                    scenario.theta,
                    scenario_id=f"comprehensive-{si}",
                    pi1=None,
                    spec=spec,
                    cell_stream=data_root.child(si, 0),
                )
            )
    else:
        make = scenario_common if spec.source == "fixed-common" else scenario_rare
        scenario_id = "common" if spec.source == "fixed-common" else "rare"
        for gi, pi1 in enumerate(spec.pi1_grid):
            scenario = make(pi1)
            rows.extend(
                _coverage_rows(
                    scenario,
                    scenario.theta,
                    scenario_id=scenario_id,
                    pi1=pi1,
                    spec=spec,
                    cell_stream=data_root.child(0, gi),
                )
            )
    return rows


@dataclass(frozen=True)
class WindowSummary:
    """Order statistics of per-scenario coverage metrics within one moving window."""

    x: float
    method: str
    n_scenarios: int
    skipped: bool = False
    # metric -> (min, 25th percentile, median, 75th percentile, max)
    stats: dict = field(default_factory=dict)


_WINDOW_METRICS = ("coverage", "lower_miss", "upper_miss", "mean_width")


def summarize_comprehensive(
    rows: Sequence[CoverageRow],
    window: float = 1.0,
    grid: Iterable[float] | None = None,
) -> list[WindowSummary]:
    """Summarize comprehensive-study rows in moving windows of expected observed events.

    Every row whose expected observed surviving-event count falls within
    ``center - window .. center + window`` contributes to that center's
    summary. By default the centers are the distinct expected counts present
    in the rows. Centers whose window is empty are emitted with the skipped
    flag set.
    """
    if window <= 0:
        raise InvalidDataError(f"window must be positive, got {window!r}")
    by_method: dict[str, list[CoverageRow]] = {}
    for row in rows:
        by_method.setdefault(row.method, []).append(row)

    out: list[WindowSummary] = []
    for method in CI_METHODS:
        if method not in by_method:
            continue
        method_rows = by_method[method]
        xs = np.array([r.expected_tp for r in method_rows])
        centers = sorted(set(xs.tolist())) if grid is None else [float(g) for g in grid]
        values = {
            "coverage": np.array([r.coverage for r in method_rows]),
            "lower_miss": np.array([r.lower_miss for r in method_rows]),
            "upper_miss": np.array([r.upper_miss for r in method_rows]),
            "mean_width": np.array([r.mean_width for r in method_rows]),
        }
        for center in centers:
            mask = np.abs(xs - center) <= window
            count = int(np.count_nonzero(mask))
            if count == 0:
                out.append(WindowSummary(x=center, method=method, n_scenarios=0, skipped=True))
                continue
            stats = {
                metric: tuple(
                    float(q) for q in np.percentile(values[metric][mask], [0, 25, 50, 75, 100])
                )
                for metric in _WINDOW_METRICS
            }
            out.append(
                WindowSummary(x=center, method=method, n_scenarios=count, stats=stats)
            )
    return out


def rows_to_csv(rows: Iterable[CoverageRow]) -> str:
    """Render rows as CSV text with a fixed header and canonical float formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.scenario_id,
                "" if row.pi1 is None else repr(float(row.pi1)),
                repr(float(row.expected_tp)),
                row.method,
                repr(float(row.level)),
                row.reps,
                repr(row.coverage),
                repr(row.lower_miss),
                repr(row.upper_miss),
                repr(float(row.mean_width)),
            ]
        )
    return buf.getvalue()
