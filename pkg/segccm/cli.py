#!/usr/bin/env python
"""
Command line tool to simulate benchmark systems, reconstruct shadow
manifolds and test causality between two series with CCM and segment
CCM, and to reproduce the published result tables.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

import segccm
from segccm import bench
from segccm.catalogue import available_systems, catalogue_system
from segccm.colorprint import FAIL, WARNING, colorprint, row_color, verdict_color
from segccm.crossmap import SweepConfig, write_curves
from segccm.diagnostics import distance_matrix, observability_matrix, recurrence_check
from segccm.dynsys import TimeSeries, add_noise, derive_seed, observe, simulate
from segccm.embedding import (
    EmbeddingParams,
    delay_embed,
    select_dim_fnn,
    select_lag_mutual_info,
)
from segccm.exceptions import ArgumentError, SegccmError
from segccm.symmetry import SegmentConfig, ccm_report, describe, segment_ccm, series_pair

logger = logging.getLogger(__name__)

# environment variable naming the directory for relative --out paths
OUTPUT_DIR_ENV = "SEGCCM_OUTPUT_DIR"

LOG_FORMAT = "%(levelname)s - %(module)s - %(message)s"


def exit_with_error(code, *objs):
    """Produces the error message and exits

    Args:
        code: Error code
        *objs: Exception encountered

    """
    print("ERROR %s:" % code, *objs, file=sys.stderr)
    sys.exit(code)


# Error Status Codes
ERROR_PIPELINE = 1
ERROR_ROWS_FAILED = 3


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters shared by every subcommand.

    tau and m resolve from the catalogue reference configuration when a
    system is named and they are not given on the command line.
    """

    command: str
    seed: int = 0
    out: Optional[str] = None
    fmt: str = "csv"
    system: Optional[str] = None
    tau: Optional[int] = None
    m: Optional[int] = None
    burn_in: int = 0
    noise: float = 0.0

    @classmethod
    def from_args(cls, args):
        system = getattr(args, "system", None)
        tau, m = getattr(args, "tau", None), getattr(args, "m", None)
        if system is not None:
            reference = catalogue_system(system).default_config
            tau = reference.tau if tau is None else tau
            m = reference.m if m is None else m
        out = resolve_output(args.out)
        fmt = args.format or (
            "json" if out and out.lower().endswith(".json") else "csv"
        )
        return cls(
            command=args.command,
            seed=args.seed,
            out=out,
            fmt=fmt,
            system=system,
            tau=tau,
            m=m,
            burn_in=getattr(args, "burn_in", 0),
            noise=getattr(args, "noise", 0.0),
        )

    @property
    def params(self):
        if self.tau is None or self.m is None:
            raise ArgumentError("--tau and --m are required without --system")
        return EmbeddingParams(self.tau, self.m)


def resolve_output(path):
    """ Relative output paths land in $SEGCCM_OUTPUT_DIR when it is set """
    if not path:
        return path
    directory = os.environ.get(OUTPUT_DIR_ENV)
    if directory and not os.path.isabs(path):
        os.makedirs(directory, exist_ok=True)
        return os.path.join(directory, path)
    return path


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-s", "--seed", type=int, default=0,
        help="Global seed; every randomized step derives its own sub-seed from it",
    )
    common.add_argument(
        "-o", "--out", help="Output file (relative paths go to $%s if set)" % OUTPUT_DIR_ENV
    )
    common.add_argument(
        "-f", "--format", choices=("csv", "json"),
        help="Output format (default: from the --out extension, else csv)",
    )
    common.add_argument("--debug", action="store_true", help="Output debug infos")
    return common


def _source_parser():
    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group(required=True)
    group.add_argument("--system", help="Catalogue system to simulate")
    group.add_argument(
        "--input", metavar="CSV", help="Series file with a leading 't' column"
    )
    source.add_argument(
        "--burn-in", type=int, default=0, help="Samples dropped from a simulation"
    )
    source.add_argument(
        "--noise", type=float, default=0.0,
        help="Standard deviation of added observation noise",
    )
    source.add_argument("--tau", type=int, help="Embedding lag (default: catalogue)")
    source.add_argument("--m", type=int, help="Embedding dimension (default: catalogue)")
    return source


def create_parser():
    """Creates the Argument Parser Object and\
    adds all the subcommands and their arguments to it.

    Returns:
        ArgumentParser

    """
    parser = argparse.ArgumentParser(
        description="Convergent cross mapping and segment CCM for causality "
        "between chaotic time series.",
        epilog="Systems: %s" % ", ".join(available_systems()),
    )
    parser.add_argument(
        "--version",
        action="version",
        version="%(prog)s v{version}".format(version=segccm.__version__),
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    common, source = _common_parser(), _source_parser()

    p = subparsers.add_parser(
        "simulate", parents=[common], help="Integrate a catalogue system"
    )
    p.add_argument("--system", required=True, help="Catalogue system to simulate")
    p.add_argument("--steps", type=int, help="Number of RK4 steps (default: catalogue span)")
    p.add_argument("--burn-in", type=int, default=0, help="Samples dropped from the front")
    p.set_defaults(func=cmd_simulate)

    p = subparsers.add_parser(
        "embed", parents=[common, source], help="Delay-embed one series"
    )
    p.add_argument("--var", help="Measured variable or input column")
    p.set_defaults(func=cmd_embed)

    p = subparsers.add_parser(
        "select-params", parents=[common, source],
        help="Choose tau by mutual information and m by false nearest neighbours",
    )
    p.add_argument("--var", help="Measured variable or input column")
    p.add_argument("--max-lag", type=int, default=60, help="Largest lag tried")
    p.add_argument("--max-dim", type=int, default=10, help="Largest dimension tried")
    p.set_defaults(func=cmd_select_params)

    for name, func, text in (
        ("ccm", cmd_ccm, "Plain convergent cross mapping between two series"),
        ("sccm", cmd_sccm, "Segment CCM between two series"),
    ):
        p = subparsers.add_parser(name, parents=[common, source], help=text)
        p.add_argument(
            "--pair", required=True, help="Two variables or input columns, e.g. x,z"
        )
        p.add_argument(
            "--library-mode", choices=("prefix", "random"), default="random",
            help="How libraries are drawn",
        )
        p.add_argument(
            "--exclusion-radius", type=int, default=0,
            help="Neighbours closer in time than this are excluded",
        )
        p.add_argument(
            "--epsilon-quantile", type=float, default=0.10,
            help="Recurrence threshold quantile",
        )
        p.set_defaults(func=func)

    p = subparsers.add_parser(
        "diagnose", parents=[common, source], help="Recurrence and observability checks"
    )
    p.add_argument("check", choices=("recurrence", "distance", "observability"))
    p.add_argument("--var", help="Measured variable or input column")
    p.add_argument(
        "--epsilon-quantile", type=float, default=0.10,
        help="Recurrence threshold quantile",
    )
    p.add_argument("--state", help="Comma separated state for the observability matrix")
    p.add_argument("--order", type=int, help="Number of Lie derivatives")
    p.set_defaults(func=cmd_diagnose)

    p = subparsers.add_parser(
        "bench", parents=[common], help="Reproduce a published result table"
    )
    p.add_argument(
        "--table",
        choices=bench.TABLES + tuple(bench.TABLE_ALIASES) + ("all",),
        default="all",
        help="Table to run (t2..t5 name the same tables)",
    )
    p.add_argument("--extended", action="store_true", help="Also run extended rows")
    p.add_argument("--threads", type=int, default=1, help="Worker threads")
    p.add_argument("--repeats", type=int, default=1, help="Seeds averaged per row")
    p.add_argument("--burn-in", type=int, default=0, help="Samples dropped from simulations")
    p.set_defaults(func=cmd_bench)

    p = subparsers.add_parser(
        "sweep", parents=[common], help="Plain CCM over a range of tau and m"
    )
    p.add_argument("--system", required=True, help="Catalogue system to simulate")
    p.add_argument("--pair", required=True, help="Two variables, e.g. x,z")
    p.add_argument("--tau-range", default="", help="Lags as a:b (inclusive) or a,b,c")
    p.add_argument("--m-range", default="", help="Dimensions as a:b (inclusive) or a,b,c")
    p.add_argument("--threads", type=int, default=1, help="Worker threads")
    p.add_argument("--burn-in", type=int, default=0, help="Samples dropped from the front")
    p.set_defaults(func=cmd_sweep)
    return parser


def print_to_console(text):
    # Prints a (unicode) string to the console, encoded depending on the stdout
    # encoding (eg. cp437 on Windows).
    try:
        sys.stdout.write(text)
    except UnicodeEncodeError:
        bytes_string = text.encode(sys.stdout.encoding, "backslashreplace")
        if hasattr(sys.stdout, "buffer"):
            sys.stdout.buffer.write(bytes_string)
        else:
            text = bytes_string.decode(sys.stdout.encoding, "strict")
            sys.stdout.write(text)
    sys.stdout.write("\n")


def write_json(path, data):
    text = json.dumps(data, indent=4)
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print_to_console(text)


def parse_pair(text):
    names = [name.strip() for name in text.split(",") if name.strip()]
    if len(names) != 2:
        raise ArgumentError("A pair needs two names, got '%s'" % text)
    return tuple(names)


def parse_range(text):
    """ "a:b" (inclusive) or "a,b,c" as a list of ints """
    if not text:
        return []
    try:
        if ":" in text:
            start, stop = text.split(":")
            return list(range(int(start), int(stop) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ArgumentError("Bad range '%s'" % text) from None


def load_series(args, config):
    """ The one series a command works on, simulated or read """
    if args.input:
        return TimeSeries.from_csv(args.input, args.var)
    spec = catalogue_system(args.system)
    traj = simulate(spec, config.burn_in)
    name = args.var or spec.variables[0]
    series = observe(traj, name)
    return add_noise(series, config.noise, derive_seed(config.seed, "noise", series.name))


def load_pair(args, config):
    pair = parse_pair(args.pair)
    if args.input:
        return tuple(TimeSeries.from_csv(args.input, name) for name in pair)
    traj = simulate(catalogue_system(args.system), config.burn_in)
    return series_pair(traj, pair, config.noise, config.seed)


def cmd_simulate(args, config):
    spec = catalogue_system(args.system)
    t_end = None
    if args.steps is not None:
        reference = spec.default_config
        t_end = reference.t_span[0] + args.steps * reference.dt
    traj = simulate(spec, args.burn_in, t_end=t_end)
    if config.fmt == "json":
        write_json(config.out, {
            "system": spec.name,
            "dt": traj.dt,
            "t0": traj.t0,
            "variables": list(traj.variables),
            "states": traj.states.tolist(),
        })
    else:
        traj.to_csv(config.out or sys.stdout)


def cmd_embed(args, config):
    series = load_series(args, config)
    manifold = delay_embed(series, config.params, series.name)
    if config.fmt == "json":
        write_json(config.out, {
            "tau": config.tau,
            "m": config.m,
            "time_index": manifold.time_index.tolist(),
            "points": manifold.points.tolist(),
        })
    else:
        manifold.to_csv(config.out or sys.stdout)


def cmd_select_params(args, config):
    series = load_series(args, config)
    lag = select_lag_mutual_info(series, args.max_lag)
    tau = lag.lag
    if tau is None:
        if config.tau is None:
            raise ArgumentError(
                "Mutual information has no minimum up to lag %s; pass --tau" % args.max_lag
            )
        tau = config.tau
        colorprint(
            WARNING, "No mutual information minimum; using tau=%s instead" % tau
        )
    dim = select_dim_fnn(series, tau, args.max_dim)
    print_to_console("tau=%s m=%s (%s, %s)" % (tau, dim.dimension, lag.status, dim.status))
    if config.fmt == "json":
        write_json(config.out, {
            "tau": tau,
            "m": dim.dimension,
            "lag_status": lag.status,
            "dim_status": dim.status,
            "mutual_information": lag.curve.tolist(),
            "false_neighbours": dim.curve.tolist(),
        })
    elif config.out:
        lag.to_csv(config.out)
        root, ext = os.path.splitext(config.out)
        dim.to_csv(root + "_fnn" + (ext or ".csv"))


def _segment_config(args):
    return SegmentConfig(
        sweep=SweepConfig(
            library_mode=args.library_mode, exclusion_radius=args.exclusion_radius
        ),
        epsilon_quantile=args.epsilon_quantile,
    )


def _report(report, config):
    colorprint(verdict_color(report.verdict.verdict), describe(report))
    for warning in report.warnings:
        colorprint(WARNING, "warning: %s" % warning)
    if config.fmt == "json":
        if config.out:
            write_json(config.out, report.to_dict())
    elif config.out:
        write_curves(config.out, report.curve_xy, report.curve_yx)


def cmd_ccm(args, config):
    series_a, series_b = load_pair(args, config)
    report = ccm_report(
        series_a, series_b, config.params, config=_segment_config(args), seed=config.seed
    )
    _report(report, config)


def cmd_sccm(args, config):
    series_a, series_b = load_pair(args, config)
    report = segment_ccm(
        series_a, series_b, config.params, config=_segment_config(args), seed=config.seed
    )
    _report(report, config)


def cmd_diagnose(args, config):
    if args.check == "observability":
        if not args.system:
            raise ArgumentError("Observability needs --system")
        spec = catalogue_system(args.system)
        if args.state:
            state = np.array([float(v) for v in args.state.split(",")])
        else:
            traj = simulate(spec, config.burn_in)
            state = traj.states[len(traj) // 2]
        report = observability_matrix(
            spec, args.var or spec.variables[0], state, order=args.order
        )
        print_to_console(
            "rank=%s of %s (singular values %s)"
            % (report.numerical_rank, spec.dim, np.array2string(report.singular_values))
        )
        if config.out:
            write_json(config.out, report.to_dict())
        return

    series = load_series(args, config)
    manifold = delay_embed(series, config.params, series.name)
    if args.check == "distance":
        if not config.out:
            raise ArgumentError("The distance matrix needs --out")
        distance_matrix(manifold, seed=config.seed).to_csv(config.out)
        return

    result = recurrence_check(manifold, args.epsilon_quantile, seed=config.seed)
    line = "recurrent=%s fraction=%.3f" % (str(result.recurrent).lower(), result.fraction)
    if result.recurrent:
        print_to_console(line)
    else:
        colorprint(FAIL, line)
        colorprint(WARNING, "warning: data is not recurrent; CCM prerequisites fail")
    if config.out:
        write_json(config.out, result.to_dict())


def cmd_bench(args, config):
    tables = bench.TABLES if args.table == "all" else (bench.resolve_table(args.table),)
    rows = []
    for table in tables:
        rows += bench.reproduce_table(
            table,
            seed=config.seed,
            extended=args.extended,
            num_threads=args.threads,
            repeats=args.repeats,
            burn_in=args.burn_in,
        )
    for row in rows:
        record = row.to_dict()
        colorprint(
            row_color(row.verdict_match),
            "%-45s ccm %.3f/%.3f %-8s sccm %.3f/%.3f %-8s %s"
            % (
                row.row_id,
                record["measured_ccm_xy"],
                record["measured_ccm_yx"],
                record["verdict_ccm"],
                record["measured_sccm_xy"],
                record["measured_sccm_yx"],
                record["verdict_sccm"],
                "ok" if row.verdict_match else ("FAIL" if row.gating else "fail (extended)"),
            ),
        )
    if config.out:
        bench.write_report(rows, config.out, config.fmt)
    failed = bench.gating_failures(rows)
    if failed:
        exit_with_error(
            ERROR_ROWS_FAILED,
            "%s gating rows failed: %s" % (len(failed), ", ".join(r.row_id for r in failed)),
        )


def cmd_sweep(args, config):
    cells = bench.parameter_sweep(
        args.system,
        parse_pair(args.pair),
        parse_range(args.tau_range),
        parse_range(args.m_range),
        seed=config.seed,
        num_threads=args.threads,
        burn_in=args.burn_in,
    )
    for cell in cells:
        print_to_console(
            "%s tau=%s m=%s rho_xy=%.3f rho_yx=%.3f %s"
            % (cell.axis, cell.tau, cell.m, cell.rho_xy, cell.rho_yx, cell.verdict)
        )
    if config.out:
        bench.write_report(cells, config.out, config.fmt)


def main(argv=None):

    # Creating the parser and parsing the arguments
    parser = create_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.WARNING, format=LOG_FORMAT
    )

    try:
        config = RunConfig.from_args(args)
        logger.debug("Running %s" % (config,))
        args.func(args, config)
    except (SegccmError, OSError) as e:
        exit_with_error(ERROR_PIPELINE, str(e))


if __name__ == "__main__":
    main()
