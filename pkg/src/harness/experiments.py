# src/harness/experiments.py
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from core.config import DEFAULT_CONFIG, Config
from core.errors import InvalidInput
from core.utils import Vec, format_vec
from geometry.regions import ConvexRegion, Halfspace
from learning.algorithms import parse_algorithm
from learning.engine import CLAlgorithm, Trace, regions_of, run
from learning.tasks import Criterion, EmpiricalTask
from memory.cells import Arrangement, enumerate_cells_with_stats
from memory.oracle import Verdict, arrangement_cells, perfect_memory_check
from harness.streams import StreamSpec, generate

logger = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "algorithm", "t", "theta", "memory_size", "satisfied",
    "forgetting_count", "step_time_us", "infeasible",
)
MEMORY_COLUMNS = ("algorithm", "verdict", "t", "condition", "witness")
SCALING_COLUMNS = ("q", "seed", "lp_calls", "lp_budget", "cells", "time_us", "status")


# -------------------------------
# Result rows
# -------------------------------

@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    t: int
    theta: Vec | None
    memory_size: int | None
    satisfied: str
    forgetting_count: int | None
    step_time_us: int | None
    infeasible: bool = False

    def as_csv(self) -> list:
        blank = lambda v: "" if v is None else v
        return [
            self.algorithm,
            self.t,
            "" if self.theta is None else format_vec(self.theta),
            blank(self.memory_size),
            self.satisfied,
            blank(self.forgetting_count),
            blank(self.step_time_us),
            int(self.infeasible),
        ]


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ResultRow, ...]
    traces: tuple[Trace, ...]
    verdicts: tuple[tuple[str, Verdict], ...] = ()

    def rows_for(self, algorithm: str) -> list[ResultRow]:
        return [r for r in self.rows if r.algorithm == algorithm]

    def forgetting(self, algorithm: str, t: int) -> int | None:
        for r in self.rows_for(algorithm):
            if r.t == t:
                return r.forgetting_count
        return None

    def verdict(self, algorithm: str) -> Verdict | None:
        return dict(self.verdicts).get(algorithm)


def rows_of(trace: Trace) -> list[ResultRow]:
    rows = [
        ResultRow(trace.algorithm, r.t, r.theta, r.memory_size, r.bitstring, r.forgetting_count, r.wall_time_us)
        for r in trace.records
    ]
    if trace.infeasible_at is not None:
        rows.append(ResultRow(trace.algorithm, trace.infeasible_at, None, None, "", None, None, True))
    return rows


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def memory_csv_path(out_path: str | Path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(f"{out_path.stem}_memory.csv")


# -------------------------------
# Algorithm comparison
# -------------------------------

def run_experiment(
    spec: StreamSpec | Sequence[EmpiricalTask],
    algorithms: Sequence[str | CLAlgorithm],
    c: Criterion,
    out_path: str | Path | None = None,
    *,
    config: Config = DEFAULT_CONFIG,
    probe_budget: int = 100,
    check_memory: bool = True,
) -> ExperimentResult:
    """
    Run every algorithm on the same stream. Writes `out_path` (and
    `<stem>_memory.csv` when perfect-memory verdicts were computed).
    """
    stream = generate(spec) if isinstance(spec, StreamSpec) else list(spec)
    algs = [a if isinstance(a, CLAlgorithm) else parse_algorithm(a, config) for a in algorithms]
    if not algs:
        raise InvalidInput("no algorithms given")
    names = [a.name for a in algs]
    if len(set(names)) != len(names):
        raise InvalidInput(f"duplicate algorithms: {names}")

    def one(alg: CLAlgorithm) -> Trace:
        return run(alg, stream, c, record_timings=config.record_timings)

    if config.workers > 1 and len(algs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            futures = {executor.submit(one, alg): alg.name for alg in algs}
            traces = [future.result() for future in as_completed(futures)]
    else:
        traces = [one(alg) for alg in algs]
    traces.sort(key=lambda tr: tr.algorithm)

    rows = [row for trace in traces for row in rows_of(trace)]
    rows.sort(key=lambda r: (r.algorithm, r.t))

    verdicts: list[tuple[str, Verdict]] = []
    if check_memory:
        try:
            arr = Arrangement(tuple(regions_of(stream, c)))
            cells = arrangement_cells(arr, probe_budget, config.seed, config)
        except InvalidInput as e:
            logger.warning("skipping perfect-memory checks: %s", e)
        else:
            for alg in sorted(algs, key=lambda a: a.name):
                verdict = perfect_memory_check(
                    alg, stream, c, probe_budget, seed=config.seed, config=config, cells=cells
                )
                verdicts.append((alg.name, verdict))

    if out_path is not None:
        _write_csv(Path(out_path), RESULT_COLUMNS, (r.as_csv() for r in rows))
        if verdicts:
            _write_csv(
                memory_csv_path(out_path),
                MEMORY_COLUMNS,
                (
                    [name, v.kind.value, "" if v.t is None else v.t, v.condition or "",
                     "" if v.witness is None else format_vec(v.witness)]
                    for name, v in verdicts
                ),
            )
        logger.debug("wrote %d result rows to %s", len(rows), out_path)

    return ExperimentResult(tuple(rows), tuple(traces), tuple(verdicts))


# -------------------------------
# Cell-enumeration scaling
# -------------------------------

@dataclass(frozen=True)
class ScalingRow:
    q: int
    seed: int
    lp_calls: int | None
    lp_budget: int | None
    cells: int | None
    time_us: int | None
    status: str

    def as_csv(self) -> list:
        blank = lambda v: "" if v is None else v
        return [self.q, self.seed, blank(self.lp_calls), blank(self.lp_budget),
                blank(self.cells), blank(self.time_us), self.status]


def random_slabs(q: int, dim: int, seed: int, grid_bits: int = DEFAULT_CONFIG.grid_bits) -> list[ConvexRegion]:
    """
    q slabs lo <= a·θ <= hi with integer normals in [-4, 4]^d, centered on a
    grid point of [-2, 2]^d with half-width in [1/4, 1].
    """
    rng = np.random.default_rng([seed, q])
    scale = 1 << grid_bits
    regions = []
    while len(regions) < q:
        a = tuple(Fraction(int(k)) for k in rng.integers(-4, 4, size=dim, endpoint=True))
        if not any(a):
            continue
        p = tuple(Fraction(int(k), scale) for k in rng.integers(-2 * scale, 2 * scale, size=dim, endpoint=True))
        w = Fraction(int(rng.integers(scale // 4, scale, endpoint=True)), scale)
        mid = sum((x * y for x, y in zip(a, p)), Fraction(0))
        regions.append(ConvexRegion(dim, (Halfspace(a, mid + w), Halfspace(tuple(-x for x in a), w - mid))))
    return regions


def scaling_experiment(
    q_range: Iterable[int],
    d: int,
    seed: int,
    out_path: str | Path | None = None,
    *,
    repeats: int = 5,
    config: Config = DEFAULT_CONFIG,
) -> list[ScalingRow]:
    rows = []
    for q in q_range:
        for s in range(seed, seed + repeats):
            if q < 1:
                raise InvalidInput(f"q must be >= 1, got {q}")
            arr = Arrangement(tuple(random_slabs(q, d, s, config.grid_bits)))
            if q > config.max_regions or arr.constraint_count > config.max_constraints:
                rows.append(ScalingRow(q, s, None, None, None, None, "skipped"))
                continue
            started = time.monotonic_ns()
            stats = enumerate_cells_with_stats(
                arr,
                slack=config.cell_slack,
                max_regions=config.max_regions,
                max_constraints=config.max_constraints,
                bound=config.bound,
                workers=config.workers,
            )
            elapsed = (time.monotonic_ns() - started) // 1000 if config.record_timings else 0
            rows.append(ScalingRow(q, s, stats.lp_calls, stats.lp_budget, len(stats.cells), elapsed, "ok"))
            logger.debug("q=%d seed=%d: %d cells, %d LP calls", q, s, len(stats.cells), stats.lp_calls)

    if out_path is not None:
        _write_csv(Path(out_path), SCALING_COLUMNS, (r.as_csv() for r in rows))
    return rows


def median_times(rows: Sequence[ScalingRow]) -> dict[int, float]:
    by_q: dict[int, list[int]] = {}
    for r in rows:
        if r.status == "ok":
            by_q.setdefault(r.q, []).append(r.time_us)
    return {q: float(np.median(times)) for q, times in sorted(by_q.items())}
