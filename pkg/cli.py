"""Command-line interface: estimate, weights, simulate.

Exit codes: 0 success, 1 usage error, 2 data or convergence error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from averaging import (
    DEFAULT_K_MAX, DEFAULT_K_MIN, DEFAULT_STRIDE, Estimation, build_grid, estimate,
)
from errors import TailAvgError
from models import DistributionSpec, Family, Method, Sample, StudyConfig, ThresholdGrid
from parsers import ingest
from report import (
    VERSION, build_report, emit_report, histogram_csv, plot_csv, plot_qq,
    plot_survival_fit, render_summary, study_json, study_table,
)
from study import histogram_data, run_methods

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "TAILAVG_SEED"
DEFAULT_SEED = 20240101

_FAMILIES = {"stable": Family.STABLE, "t": Family.STUDENT_T, "student_t": Family.STUDENT_T, "gpd": Family.GPD}
_SHAPE_FLAGS = {Family.STABLE: "alpha", Family.STUDENT_T: "nu", Family.GPD: "xi"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _column(value: str) -> str | int:
    return int(value) if value.isdigit() else value


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="one value per line, or a delimited table")
    p.add_argument("--column", type=_column, default=None, help="column name or 0-based index")
    p.add_argument("--abs", action="store_true", help="use absolute values")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.PARETO.value)
    _add_grid_args(p)


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kmin", type=int, default=DEFAULT_K_MIN)
    p.add_argument("--kmax", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--stride", type=int, default=DEFAULT_STRIDE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailavg", description="Model-averaged tail index estimation")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="weighted estimate for a data file")
    _add_input_args(p)
    p.add_argument("--report", type=Path, help="write the report here")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--plots", type=Path, help="directory for survival_fit.csv and qq.csv")

    p = sub.add_parser("weights", help="print the weight table for a data file")
    _add_input_args(p)

    p = sub.add_parser("simulate", help="replicated Monte Carlo study")
    p.add_argument("--family", choices=sorted(_FAMILIES), required=True)
    p.add_argument("--alpha", type=float, help="stable index")
    p.add_argument("--nu", type=float, help="t degrees of freedom")
    p.add_argument("--xi", type=float, help="GPD shape")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV_VAR}")
    p.add_argument("--method", action="append", choices=[m.value for m in Method],
                   help="repeat to compare methods on the same samples")
    _add_grid_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--table", type=Path, help="write the CSV table here instead of stdout")
    p.add_argument("--json", type=Path, help="write the full study record here")
    p.add_argument("--hist", type=Path, help="write histogram data here")
    p.add_argument("--bins", type=int, default=30)
    return parser


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV_VAR)
    if env is None or not env.strip():
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None


def _write(path: Path | None, data: bytes) -> None:
    if path is None:
        sys.stdout.write(data.decode("utf-8"))
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info("wrote %s", path)


# --- Commands ---

def _estimate(args: argparse.Namespace) -> tuple[Sample, ThresholdGrid, Estimation]:
    sample = ingest(args.input, column=args.column, take_abs=args.abs)
    grid = build_grid(sample.n, args.kmin, args.kmax, args.stride)
    estimation = estimate(sample, grid, Method(args.method))
    return sample, grid, estimation


def cmd_estimate(args: argparse.Namespace) -> int:
    sample, grid, estimation = _estimate(args)
    report = build_report(sample, estimation, Method(args.method), grid, source=Path(args.input).name)

    if args.report is not None:
        _write(args.report, emit_report(report, args.format))
    if args.plots is not None:
        _write(args.plots / "survival_fit.csv", plot_csv(plot_survival_fit(sample, estimation.estimate)))
        _write(args.plots / "qq.csv", plot_csv(plot_qq(sample, estimation.estimate)))

    print(render_summary(report))
    return 0


def cmd_weights(args: argparse.Namespace) -> int:
    _, _, estimation = _estimate(args)
    table = estimation.weights
    print("m,criterion,weight,reason")
    for e in table.entries:
        print(f"{e.m},{e.criterion:.17g},{e.weight:.17g},")
    for s in table.skipped:
        print(f"{s.m},,,{s.reason}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    family = _FAMILIES[args.family]
    flag = _SHAPE_FLAGS[family]
    if getattr(args, flag) is None:
        raise UsageError(f"--family {args.family} requires --{flag}")
    spec = DistributionSpec(
        family=family, alpha=args.alpha, nu=args.nu, xi=args.xi, mu=args.mu, sigma=args.sigma,
    )
    grid = build_grid(args.n, args.kmin, args.kmax, args.stride)
    methods = [Method(m) for m in (args.method or [Method.PARETO.value])]
    cfg = StudyConfig(
        spec=spec, n=args.n, replicates=args.reps, grid=grid,
        method=methods[0], master_seed=resolve_seed(args.seed),
    )
    logger.info("simulating %s (%s), n=%d, %d replicates, seed %d",
                family.value, spec.label(), args.n, args.reps, cfg.master_seed)

    rows = run_methods(cfg, methods, workers=args.workers)
    _write(args.table, study_table(rows))
    if args.json is not None:
        _write(args.json, study_json(rows))
    if args.hist is not None:
        _write(args.hist, histogram_csv((c.method, histogram_data(r, args.bins)) for c, r in rows))
    return 0


COMMANDS = {
    "estimate": cmd_estimate,
    "weights": cmd_weights,
    "simulate": cmd_simulate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (TailAvgError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
