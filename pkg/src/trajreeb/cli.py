"""Command-line interface.

Commands: build, metrics, sweep, compare, export-schedule.  Everything is
configured with explicit flags (no environment variables, no config files)
and outputs carry an input content hash instead of timestamps, so identical
invocations produce identical bytes.

Exit codes: 0 success, 1 input error, 2 internal contract violation.
"""

from __future__ import annotations

import argparse
import hashlib
import sys

from .errors import ContractError, TrajreebError
from .events import detect_all_events
from .geometry import Config, TrajectorySet
from .io import FileFormat, format_from_path, parse, prepare
from .metrics import (
    compare_cohorts,
    comparison_to_json,
    compute_metrics,
    report_to_json,
    reports_from_csv,
    reports_to_csv,
    sweep,
)
from .reeb import build_reeb
from .serialize import serialize_graph


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="trajreeb", description="Reeb graphs of trajectory grouping structure")
    sub = p.add_subparsers(dest="command", required=True)

    def add_input(sp, with_epsilon=True):
        sp.add_argument("--input", required=True, help="trajectory file (tck, csv, json)")
        sp.add_argument("--format", choices=[f.value for f in FileFormat],
                        help="input format (default: by file extension)")
        if with_epsilon:
            sp.add_argument("--epsilon", type=float, required=True,
                            help="grouping radius, millimeters")
        sp.add_argument("--resample", type=float, metavar="DELTA",
                        help="resample to uniform arc-length spacing before analysis")
        sp.add_argument("--orient-align", action="store_true",
                        help="flip streamlines to match trajectory 0's orientation")

    sp = sub.add_parser("build", help="construct the Reeb graph")
    add_input(sp)
    sp.add_argument("--output", help="output path (default: stdout)")
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--graphml", action="store_true", help="write GraphML instead of JSON")
    grp.add_argument("--dot", action="store_true", help="write DOT instead of JSON")

    sp = sub.add_parser("metrics", help="compute the feature report of one graph")
    add_input(sp)
    sp.add_argument("--output", help="output path; .csv for a CSV row, else JSON")

    sp = sub.add_parser("sweep", help="feature reports across a range of epsilons")
    add_input(sp, with_epsilon=False)
    sp.add_argument("--epsilon-range", required=True, metavar="A:B:STEP",
                    help="inclusive range of epsilons, e.g. 0.5:3.0:0.5")
    sp.add_argument("--output", help="output CSV path (default: stdout)")

    sp = sub.add_parser("compare", help="compare two cohorts of report CSVs")
    sp.add_argument("--cohort-a", required=True, help="report CSV, one row per subject")
    sp.add_argument("--cohort-b", required=True, help="report CSV, one row per subject")
    sp.add_argument("--output", help="output JSON path (default: stdout)")

    sp = sub.add_parser("export-schedule", help="dump the event schedule as JSON lines")
    add_input(sp)
    sp.add_argument("--output", help="output path (default: stdout)")
    return p


def _check_epsilon(value: float) -> float:
    if not (value > 0):
        raise ValueError("epsilon must be positive")
    return float(value)


def _parse_range(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"epsilon range must be A:B:STEP, got {spec!r}")
    try:
        a, b, step = (float(x) for x in parts)
    except ValueError:
        raise ValueError(f"epsilon range must be numeric, got {spec!r}") from None
    if a <= 0 or step <= 0 or b < a:
        raise ValueError("epsilon range needs 0 < A <= B and STEP > 0")
    count = int((b - a) / step + 1e-9) + 1
    return [a + i * step for i in range(count)]


def _load(args) -> TrajectorySet:
    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise TrajreebError(f"cannot read {args.input}: {exc.strerror}") from None
    fmt = FileFormat(args.format) if args.format else format_from_path(args.input)
    s = parse(data, fmt)
    if len(s) == 0:
        raise TrajreebError(f"{args.input}: no usable trajectories")
    config = Config(
        epsilon=getattr(args, "epsilon", None) or 1.0,
        resample_delta=args.resample,
        orient_align=args.orient_align,
    )
    s = prepare(s, config)
    meta = dict(s.metadata)
    meta["input"] = args.input
    meta["input_sha256"] = hashlib.sha256(data).hexdigest()
    if args.resample is not None:
        meta["resample_delta"] = repr(float(args.resample))
    if args.orient_align:
        meta["orient_align"] = "true"
    return TrajectorySet(s.trajectories, meta)


def _emit(payload: bytes, output: str | None) -> None:
    if output is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        with open(output, "wb") as fh:
            fh.write(payload)


def _run(args) -> int:
    if args.command == "build":
        epsilon = _check_epsilon(args.epsilon)
        s = _load(args)
        r = build_reeb(s, epsilon)
        fmt = "graphml" if args.graphml else "dot" if args.dot else "json"
        _emit(serialize_graph(r, fmt), args.output)
        return 0

    if args.command == "metrics":
        epsilon = _check_epsilon(args.epsilon)
        s = _load(args)
        report = compute_metrics(build_reeb(s, epsilon))
        if args.output and args.output.lower().endswith(".csv"):
            payload = reports_to_csv([report]).encode("utf-8")
        else:
            payload = report_to_json(report).encode("utf-8")
        _emit(payload, args.output)
        return 0

    if args.command == "sweep":
        epsilons = _parse_range(args.epsilon_range)
        s = _load(args)
        reports = sweep(s, epsilons)
        _emit(reports_to_csv(reports).encode("utf-8"), args.output)
        return 0

    if args.command == "compare":
        cohorts = []
        for path in (args.cohort_a, args.cohort_b):
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    cohorts.append(reports_from_csv(fh.read()))
            except OSError as exc:
                raise TrajreebError(f"cannot read {path}: {exc.strerror}") from None
        comparison = compare_cohorts(cohorts[0], cohorts[1])
        _emit(comparison_to_json(comparison).encode("utf-8"), args.output)
        return 0

    if args.command == "export-schedule":
        epsilon = _check_epsilon(args.epsilon)
        s = _load(args)
        schedule = detect_all_events(s, epsilon)
        _emit(schedule.to_jsonl().encode("utf-8"), args.output)
        return 0

    raise ContractError(f"unhandled command {args.command!r}")


def run(argv) -> int:
    """Run one CLI invocation; returns the process exit code."""
    try:
        args = _build_parser().parse_args(argv)
        return _run(args)
    except _CliError as exc:
        print(f"trajreeb: {exc}", file=sys.stderr)
        return 1
    except ContractError as exc:
        print(f"trajreeb: internal error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"trajreeb: internal error: {exc}", file=sys.stderr)
        return 2
    except (TrajreebError, ValueError, OSError) as exc:
        print(f"trajreeb: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
