# src/learning/engine.py
from __future__ import annotations

import csv
import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from core.errors import InfeasibleStep, InvalidInput, NotLiftable
from core.utils import Vec, format_vec, zeros
from geometry.feasibility import same_point_set
from geometry.regions import ConvexRegion
from learning.criteria import evaluate_criterion, sat_region, task_dim
from learning.tasks import Criterion, EmpiricalTask

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("t", "theta", "memory_size", "satisfied", "wall_time_us")


# -------------------------------
# State and algorithm interfaces
# -------------------------------

class Memory(ABC):
    """I_t: whatever an algorithm carries forward besides θ_t."""

    @property
    @abstractmethod
    def size(self) -> int:
        """Stored constraints or atoms; the memory metric of a trace."""

    @abstractmethod
    def oracle_set(self, theta: Vec) -> ConvexRegion:
        """h(θ_t, I_t): the algorithm's best reconstruction of Sat_{1:t}."""


@dataclass(frozen=True)
class CLState:
    theta: Vec
    memory: Memory
    t: int = 0


class CLAlgorithm(ABC):
    """
    One step realizes A_θ then A_I: θ_t from (θ_{t-1}, I_{t-1}, P̂_t), then I_t
    from (θ_t, I_{t-1}, P̂_t).
    """
    name: str = "algorithm"
    # True when `step` consumes a task only through sat_region(c, task)
    liftable: bool = False

    def init(self, dim: int) -> CLState:
        return CLState(zeros(dim), self.initial_memory(dim), 0)

    @abstractmethod
    def initial_memory(self, dim: int) -> Memory:
        ...

    @abstractmethod
    def step(self, state: CLState, task: EmpiricalTask, criterion: Criterion) -> CLState:
        ...

    def step_region(self, state: CLState, region: ConvexRegion) -> CLState:
        raise NotLiftable(f"{self.name} reads raw atoms, not Sat regions")


class IdealizedCLAlgorithm(ABC):
    name: str = "idealized"

    @abstractmethod
    def init(self, dim: int) -> CLState:
        ...

    @abstractmethod
    def step(self, state: CLState, region: ConvexRegion) -> CLState:
        ...


def reconstruct_oracle_set(state: CLState) -> ConvexRegion:
    return state.memory.oracle_set(state.theta)


# -------------------------------
# Traces
# -------------------------------

@dataclass(frozen=True)
class TraceRecord:
    t: int
    theta: Vec
    memory_size: int
    satisfied: tuple[int, ...]
    wall_time_us: int = 0

    @property
    def forgetting_count(self) -> int:
        return sum(1 - bit for bit in self.satisfied)

    @property
    def bitstring(self) -> str:
        return "".join(str(bit) for bit in self.satisfied)


@dataclass(frozen=True)
class Trace:
    algorithm: str
    records: tuple[TraceRecord, ...]
    infeasible_at: int | None = None

    @property
    def complete(self) -> bool:
        return self.infeasible_at is None

    @property
    def thetas(self) -> list[Vec]:
        return [r.theta for r in self.records]


def _stream_dim(stream: Sequence[EmpiricalTask], c: Criterion) -> int:
    if not stream:
        raise InvalidInput("task stream is empty")
    dims = {task_dim(c, task) for task in stream}
    if len(dims) != 1:
        raise InvalidInput(f"stream mixes parameter dimensions {sorted(dims)}")
    return dims.pop()


def run(
    alg: CLAlgorithm,
    stream: Sequence[EmpiricalTask],
    c: Criterion,
    *,
    record_timings: bool = True,
) -> Trace:
    """Apply init, then one step per task; record C(θ_t, P̂_i) for every i <= t."""
    dim = _stream_dim(stream, c)
    state = alg.init(dim)
    records: list[TraceRecord] = []
    infeasible_at = None

    for t, task in enumerate(stream, start=1):
        started = time.monotonic_ns()
        try:
            state = alg.step(state, task, c)
        except InfeasibleStep as e:
            logger.info("%s: %s", alg.name, e)
            infeasible_at = t
            break
        elapsed_us = (time.monotonic_ns() - started) // 1000 if record_timings else 0
        bits = tuple(evaluate_criterion(c, state.theta, seen) for seen in stream[:t])
        records.append(TraceRecord(t, state.theta, state.memory.size, bits, elapsed_us))

    return Trace(alg.name, tuple(records), infeasible_at)


def check_optimality(trace: Trace) -> bool:
    if not trace.complete:
        logger.warning("optimality asked of a trace truncated at t=%s", trace.infeasible_at)
        return False
    return all(all(r.satisfied) for r in trace.records)


def check_sat_invariance(
    alg: CLAlgorithm,
    c: Criterion,
    task_pairs: Iterable[tuple[EmpiricalTask, EmpiricalTask]],
    states: Sequence[CLState] | None = None,
) -> bool:
    """
    For pairs with equal Sat sets, a step from the same state must give the same θ
    and a reconstructed oracle set with the same points (constraint lists may
    differ). `states` defaults to alg.init.
    """
    for p, q in task_pairs:
        dim = task_dim(c, p)
        for base in states or [alg.init(dim)]:
            outcomes = []
            for task in (p, q):
                try:
                    nxt = alg.step(base, task, c)
                    outcomes.append((nxt.theta, reconstruct_oracle_set(nxt)))
                except InfeasibleStep:
                    outcomes.append(None)
            first, second = outcomes
            if first is None or second is None:
                same = first is second
            else:
                same = first[0] == second[0] and same_point_set(first[1], second[1])
            if not same:
                logger.info("%s differs on Sat-equal tasks %d/%d", alg.name, p.task_id, q.task_id)
                return False
    return True


# -------------------------------
# Idealized CL
# -------------------------------

class LiftedAlgorithm(IdealizedCLAlgorithm):
    def __init__(self, alg: CLAlgorithm):
        self.alg = alg
        self.name = f"idealized[{alg.name}]"

    def init(self, dim: int) -> CLState:
        return self.alg.init(dim)

    def step(self, state: CLState, region: ConvexRegion) -> CLState:
        return self.alg.step_region(state, region)


def lift_to_idealized(alg: CLAlgorithm, c: Criterion) -> IdealizedCLAlgorithm:
    """A_θ(θ, I, Sat(P̂)) := Â_θ(θ, I, P̂) for algorithms that only see Sat(P̂)."""
    if not alg.liftable:
        raise NotLiftable(f"{alg.name} depends on atoms beyond Sat regions under {c.kind.value}")
    return LiftedAlgorithm(alg)


def run_idealized(ialg: IdealizedCLAlgorithm, regions: Sequence[ConvexRegion]) -> list[Vec]:
    if not regions:
        raise InvalidInput("region stream is empty")
    state = ialg.init(regions[0].dim)
    thetas: list[Vec] = []
    for region in regions:
        try:
            state = ialg.step(state, region)
        except InfeasibleStep:
            break
        thetas.append(state.theta)
    return thetas


def decide_with_algorithm(ialg: IdealizedCLAlgorithm, state: CLState, region: ConvexRegion) -> bool:
    """Sat_{1:t} ∩ region ≠ ∅, answered by one optimal idealized step."""
    try:
        ialg.step(state, region)
    except InfeasibleStep:
        return False
    return True


def regions_of(stream: Sequence[EmpiricalTask], c: Criterion) -> list[ConvexRegion]:
    return [sat_region(c, task) for task in stream]


# -------------------------------
# CSV
# -------------------------------

def write_trace_csv(trace: Trace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in trace.records:
            writer.writerow([r.t, format_vec(r.theta), r.memory_size, r.bitstring, r.wall_time_us])
        if trace.infeasible_at is not None:
            writer.writerow([trace.infeasible_at, "", "", "infeasible", ""])
