# src/harness/cli.py
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from typing import Sequence

from core.config import Config, load_config
from core.errors import InvalidInput
from core.utils import format_vec, parse_rat
from learning.algorithms import parse_algorithm
from learning.criteria import sat_region
from learning.tasks import Criterion, CriterionKind, EmpiricalTask
from memory.cells import Arrangement, enumerate_cells_with_stats, sample_cells
from memory.oracle import perfect_memory_check
from harness.experiments import memory_csv_path, run_experiment, scaling_experiment
from harness.streams import StreamKind, StreamSpec, generate
from harness.taskfile import load_tasks, save_tasks

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTERNAL = 2

DEFAULT_TASKS = 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; we report bad usage as invalid input."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _rat(text: str):
    try:
        return parse_rat(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _criterion(text: str) -> CriterionKind:
    try:
        return CriterionKind.parse(text)
    except InvalidInput as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _stream_kind(text: str) -> StreamKind:
    try:
        return StreamKind.parse(text)
    except InvalidInput as e:
        raise argparse.ArgumentTypeError(str(e)) from None


# -------------------------------
# Parser
# -------------------------------

def build_parser(config: Config) -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=config.seed, help="RNG seed (default: $SATCL_SEED or 0)")
    common.add_argument("--dim", type=int, default=2, help="parameter dimension for generated streams")
    common.add_argument("--workers", type=int, default=None, help="thread pool size")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    stream = _Parser(add_help=False)
    stream.add_argument("--spec", type=_stream_kind, help="generate a stream: planted, adversarial, singleton, ball")
    stream.add_argument("--tasks", help="task file, or the number of tasks with --spec")
    stream.add_argument("--n-per-task", type=int, default=2)
    stream.add_argument("--margin", type=_rat, default=None)
    stream.add_argument("--anchor", type=_rat, default=None)
    stream.add_argument("--criterion", type=_criterion, default=None)
    stream.add_argument("--epsilon", type=_rat, default=None)

    parser = _Parser(prog="satcl", description="Set-theoretic continual learning testbed")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common, stream], help="write a generated stream as a task file")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser(
        "run",
        parents=[common, stream],
        help="compare algorithms on one stream",
        description="Compare algorithms on one stream. Wall times differ between runs;"
        " pass --no-timing for byte-identical CSV files.",
    )
    p.add_argument("--alg", action="append", required=True, help="exact | replay[:k=N] | reg:lambda=R (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--probes", type=int, default=100)
    p.add_argument("--no-memory-check", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="write 0 for wall times (byte-identical reruns)")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("cells", parents=[common, stream], help="enumerate the cells of the tasks' Sat regions")
    p.add_argument("--out")
    p.add_argument("--samples", type=int, default=1000, help="sample count for ball regions")
    p.set_defaults(handler=cmd_cells)

    p = sub.add_parser("check-memory", parents=[common, stream], help="perfect-memory verdict for one algorithm")
    p.add_argument("--alg", required=True)
    p.add_argument("--probes", type=int, default=100)
    p.set_defaults(handler=cmd_check_memory)

    p = sub.add_parser("scaling", parents=[common], help="cell-enumeration cost against q")
    p.add_argument("--qmin", type=int, default=1)
    p.add_argument("--qmax", type=int, required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timing", action="store_true", help="write 0 for wall times (byte-identical reruns)")
    p.set_defaults(handler=cmd_scaling)

    return parser


# -------------------------------
# Stream resolution
# -------------------------------

def _spec_from_args(args, config: Config) -> StreamSpec:
    count = DEFAULT_TASKS
    if args.tasks is not None:
        if not args.tasks.strip().isdigit():
            raise InvalidInput(f"with --spec, --tasks is a task count, got {args.tasks!r}")
        count = int(args.tasks)
    fields = dict(
        kind=args.spec,
        seed=args.seed,
        dim=args.dim,
        T=count,
        n_per_task=args.n_per_task,
        epsilon=args.epsilon if args.epsilon is not None else config.epsilon,
        anchor=args.anchor,
        grid_bits=config.grid_bits,
    )
    if args.margin is not None:
        fields["margin"] = args.margin
    if args.criterion is not None:
        fields["criterion"] = args.criterion
    return StreamSpec(**fields)


def resolve_stream(args, config: Config) -> tuple[list[EmpiricalTask], Criterion]:
    """Tasks and criterion from --spec or --tasks FILE; flags win over file fields."""
    if args.spec is not None:
        spec = _spec_from_args(args, config)
        return generate(spec), spec.make_criterion(config.sign_cap)
    if args.tasks is None:
        raise InvalidInput("give --tasks FILE or --spec KIND")
    tf = load_tasks(args.tasks)
    kind = args.criterion or tf.criterion or CriterionKind.PER_SAMPLE_ABS
    if args.epsilon is not None:
        epsilon = args.epsilon
    elif tf.epsilon is not None:
        epsilon = tf.epsilon
    else:
        epsilon = config.epsilon
    return list(tf.tasks), Criterion(kind, epsilon, config.sign_cap)


# -------------------------------
# Subcommands
# -------------------------------

def cmd_gen(args, config: Config) -> int:
    if args.spec is None:
        raise InvalidInput("gen needs --spec KIND")
    spec = _spec_from_args(args, config)
    tasks = generate(spec)
    save_tasks(args.out, tasks, spec.criterion_kind, spec.epsilon)
    print(f"wrote {len(tasks)} tasks to {args.out}")
    return EXIT_OK


def cmd_run(args, config: Config) -> int:
    if args.no_timing:
        config = replace(config, record_timings=False)
    tasks, criterion = resolve_stream(args, config)
    result = run_experiment(
        tasks,
        args.alg,
        criterion,
        args.out,
        config=config,
        probe_budget=args.probes,
        check_memory=not args.no_memory_check,
    )
    for trace in result.traces:
        last = trace.records[-1] if trace.records else None
        status = "complete" if trace.complete else f"infeasible at t={trace.infeasible_at}"
        forgetting = last.forgetting_count if last else "-"
        print(f"{trace.algorithm}: {status}, final forgetting_count={forgetting}")
    for name, verdict in result.verdicts:
        print(f"{name}: {verdict}")
    print(f"wrote {len(result.rows)} rows to {args.out}")
    if result.verdicts:
        print(f"wrote verdicts to {memory_csv_path(args.out)}")
    return EXIT_OK


def cmd_cells(args, config: Config) -> int:
    tasks, criterion = resolve_stream(args, config)
    arr = Arrangement(tuple(sat_region(criterion, task) for task in tasks))
    if arr.is_polytope:
        stats = enumerate_cells_with_stats(
            arr,
            slack=config.cell_slack,
            max_regions=config.max_regions,
            max_constraints=config.max_constraints,
            bound=config.bound,
            workers=config.workers,
        )
        cells = list(stats.cells)
        print(f"{len(cells)} cells ({stats.lp_calls} LP calls, budget {stats.lp_budget})")
    else:
        cells = sample_cells(arr, args.samples, args.seed, config.probe_radius, config.grid_bits)
        print(f"{len(cells)} cells found by {args.samples} samples")

    rows = [[str(cell.sign), format_vec(cell.witness)] for cell in cells]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("sign", "witness"))
            writer.writerows(rows)
    else:
        for sign, witness in rows:
            print(f"{sign}\t{witness}")
    return EXIT_OK


def cmd_check_memory(args, config: Config) -> int:
    tasks, criterion = resolve_stream(args, config)
    alg = parse_algorithm(args.alg, config)
    verdict = perfect_memory_check(alg, tasks, criterion, args.probes, seed=args.seed, config=config)
    print(f"{alg.name}: {verdict}")
    return EXIT_OK


def cmd_scaling(args, config: Config) -> int:
    if args.no_timing:
        config = replace(config, record_timings=False)
    if not 1 <= args.qmin <= args.qmax:
        raise InvalidInput(f"need 1 <= qmin <= qmax (got {args.qmin}, {args.qmax})")
    rows = scaling_experiment(
        range(args.qmin, args.qmax + 1), args.dim, args.seed, args.out, repeats=args.repeats, config=config
    )
    skipped = sum(1 for r in rows if r.status == "skipped")
    print(f"wrote {len(rows)} rows to {args.out} ({skipped} skipped)")
    return EXIT_OK


# -------------------------------
# Entry point
# -------------------------------

def main(argv: Sequence[str] | None = None) -> int:
    config = load_config()
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_INVALID

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    config = replace(config, seed=args.seed)
    if args.workers is not None:
        config = replace(config, workers=max(1, args.workers))

    try:
        return args.handler(args, config)
    except InvalidInput as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as e:
        print(f"error: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:
        logger.debug("internal error", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
