"""Command-line interface: generate datasets, estimate rates, run coverage studies.

Exit codes: 0 success, 1 usage error, 2 validation error (malformed files or
inconsistent data), 3 internal error. All output files are written
atomically (temp file in the target directory, then rename), and every
command is deterministic given its flags and seed. The default seed comes
from the ``REVIEWRATE_SEED`` environment variable when set, else 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from typing import Sequence

from .distributions import RngStream
from .estimator import estimate_theta
from .generator import generate_dataset
from .intervals import ci_bootstrap, ci_gamma_wsip, ci_wald
from .model import Dataset, InvalidDataError, Scenario
from .study import DEFAULT_PI1_GRID, StudySpec, rows_to_csv, run_sweep

__all__ = ["main", "entry_point"]

_EXIT_USAGE = 1
_EXIT_VALIDATION = 2
_EXIT_INTERNAL = 3

_CI_CHOICES = ("bootstrap", "wald", "gamma", "all", "none")
_STUDY_SOURCES = {"common": "fixed-common", "rare": "fixed-rare", "comprehensive": "comprehensive"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would sys.exit(2); we map usage to 1
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("REVIEWRATE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"REVIEWRATE_SEED must be an integer, got {raw!r}") from exc


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidDataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidDataError(
            f"cannot parse {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _check_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise UsageError(f"--level must lie strictly between 0 and 1, got {level}")
    return level


def _build_parser() -> _Parser:
    parser = _Parser(prog="reviewrate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate a dataset from a scenario file")
    gen.add_argument("scenario", help="scenario JSON file")
    gen.add_argument("--seed", type=int, default=None, help="master seed (default: env or 0)")
    gen.add_argument("--out", required=True, help="output dataset JSON file")
    gen.add_argument("--latent", default=None, help="also write the latent tables to this file")

    est = sub.add_parser("estimate", help="estimate rates and intervals from a dataset file")
    est.add_argument("dataset", help="dataset JSON file")
    est.add_argument("--ci", choices=_CI_CHOICES, default="all", help="interval method(s)")
    est.add_argument("--level", type=float, default=0.9, help="confidence level")
    est.add_argument("--B", type=int, default=2000, help="bootstrap replicates")
    est.add_argument("--seed", type=int, default=None, help="bootstrap seed (default: env or 0)")
    est.add_argument("--json", dest="json_out", default=None, help="also write a JSON report")

    stu = sub.add_parser("study", help="run a coverage study and write its CSV")
    stu.add_argument("--study", choices=sorted(_STUDY_SOURCES), required=True)
    stu.add_argument("--reps", type=int, default=1000, help="replications per grid point")
    stu.add_argument("--grid", default=None, help="comma-separated first-tier sampling rates")
    stu.add_argument("--num-scenarios", type=int, default=100_000,
                     help="scenario count for the comprehensive study")
    stu.add_argument("--methods", default="bootstrap,wald,gamma",
                     help="comma-separated subset of bootstrap,wald,gamma")
    stu.add_argument("--B", type=int, default=2000, help="bootstrap replicates")
    stu.add_argument("--level", type=float, default=0.9, help="confidence level")
    stu.add_argument("--seed", type=int, default=None, help="master seed (default: env or 0)")
    stu.add_argument("--out", required=True, help="output CSV file")
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    scenario = Scenario.from_dict(_load_json(args.scenario))
    seed = args.seed if args.seed is not None else _default_seed()
    latents, dataset = generate_dataset(scenario, RngStream(seed))
    _atomic_write(args.out, json.dumps(dataset.to_dict(), indent=2) + "\n")
    if args.latent:
        doc = {"strata": [{"x": [list(row) for row in latent.x]} for latent in latents]}
        _atomic_write(args.latent, json.dumps(doc, indent=2) + "\n")
    print(f"wrote {args.out}" + (f" and {args.latent}" if args.latent else ""))
    return 0


def _method_name(cli_name: str) -> str:
    return "gamma_wsip" if cli_name == "gamma" else cli_name


def _cmd_estimate(args: argparse.Namespace) -> int:
    level = _check_level(args.level)
    if args.B < 100:
        raise UsageError(f"--B must be at least 100, got {args.B}")
    dataset = Dataset.from_dict(_load_json(args.dataset))
    estimate = estimate_theta(dataset)
    m = dataset.config.m

    requested = ("bootstrap", "wald", "gamma") if args.ci == "all" else (args.ci,)
    intervals = []
    for name in requested:
        if name == "none":
            continue
        if name == "bootstrap":
            seed = args.seed if args.seed is not None else _default_seed()
            intervals.append(ci_bootstrap(dataset, level, args.B, RngStream(seed)))
        elif name == "wald":
            intervals.append(ci_wald(estimate, m, level))
        elif name == "gamma":
            intervals.append(ci_gamma_wsip(estimate, dataset, level))

    print(f"theta_hat: {estimate.theta_hat:.6g}  (mileage m={m:g}, "
          f"{dataset.config.H} strata, {dataset.config.T} tiers)")
    print("stratum  lambda_T_hat  pi_prod_hat  weight")
    for h, (lam_T, prod, w) in enumerate(
        zip(estimate.theta_by_stratum, estimate.pi_prod, estimate.weights)
    ):
        print(f"{h:>7}  {lam_T:>12.6g}  {prod:>11.6g}  {w:>6.4g}")
    for iv in intervals:
        print(f"{iv.method:>10} {100 * iv.level:g}% interval: "
              f"[{iv.lower:.6g}, {iv.upper:.6g}]  width {iv.width:.6g}")

    if args.json_out:
        report = {
            "m": m,
            "theta_hat": estimate.theta_hat,
            "Lambda_hat": [list(v) for v in estimate.Lambda_hat],
            "lambda_hat": [list(v) for v in estimate.lambda_hat],
            "pi_hat": [list(v) for v in estimate.pi_hat],
            "pi_prod": list(estimate.pi_prod),
            "weights": list(estimate.weights),
            "intervals": [
                {"method": iv.method, "level": iv.level, "lower": iv.lower, "upper": iv.upper}
                for iv in intervals
            ],
        }
        _atomic_write(args.json_out, json.dumps(report, indent=2) + "\n")
    return 0


def _cmd_study(args: argparse.Namespace) -> int:
    level = _check_level(args.level)
    if args.reps < 1:
        raise UsageError(f"--reps must be at least 1, got {args.reps}")
    if args.num_scenarios < 1:
        raise UsageError(f"--num-scenarios must be at least 1, got {args.num_scenarios}")

    methods = []
    for name in args.methods.split(","):
        name = name.strip()
        if name not in ("bootstrap", "wald", "gamma"):
            raise UsageError(f"--methods entries must be bootstrap, wald or gamma, got {name!r}")
        methods.append(_method_name(name))

    if args.grid is None:
        grid = DEFAULT_PI1_GRID
    else:
        try:
            grid = tuple(float(v) for v in args.grid.split(","))
        except ValueError as exc:
            raise UsageError(f"--grid must be comma-separated numbers: {exc}") from exc
        if any(not 0 < g <= 1 for g in grid):
            raise UsageError(f"--grid values must lie in (0, 1], got {args.grid}")

    seed = args.seed if args.seed is not None else _default_seed()
    spec = StudySpec(
        source=_STUDY_SOURCES[args.study],
        pi1_grid=grid,
        replications=args.reps,
        level=level,
        methods=tuple(methods),
        B=args.B,
        num_scenarios=args.num_scenarios,
        master_seed=seed,
    )
    rows = run_sweep(spec)
    _atomic_write(args.out, rows_to_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        return _cmd_study(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except InvalidDataError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return _EXIT_INTERNAL


def entry_point() -> None:
    sys.exit(main())
