# src/memory/oracle.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from core.config import DEFAULT_CONFIG, Config
from core.errors import InfeasibleRegion, InfeasibleStep
from core.utils import Vec, format_vec
from geometry.feasibility import (
    FeasibilityStatus,
    chebyshev_center,
    contains,
    identify_point,
    intersect,
    intersect_all,
    region_feasible,
)
from geometry.regions import ConvexRegion
from learning.criteria import sat_region
from learning.engine import CLAlgorithm, CLState, reconstruct_oracle_set, regions_of
from learning.tasks import Criterion, EmpiricalTask
from memory.cells import (
    Arrangement,
    Cell,
    enumerate_cells,
    minimal_representation,
    random_points,
    sample_cells,
)

logger = logging.getLogger(__name__)

STORAGE_EFFICIENCY = "storage_efficiency"
INFORMATION_EFFICIENCY = "information_efficiency"
CELL_COVERAGE = "cell_coverage"


# -------------------------------
# Decision Problem Oracle sets
# -------------------------------

@dataclass(frozen=True)
class OracleReport:
    agreements: int
    total: int
    counterexample: int | None = None
    probe: ConvexRegion | None = None
    oracle_nonempty: bool | None = None
    truth_nonempty: bool | None = None

    @property
    def all_agree(self) -> bool:
        return self.counterexample is None


def _nonempty(region: ConvexRegion) -> bool | None:
    decision = region_feasible(region)
    if decision.status is FeasibilityStatus.UNKNOWN:
        return None
    return decision.is_feasible


def oracle_set_check(state: CLState, probes: Sequence[ConvexRegion], truth_region: ConvexRegion) -> OracleReport:
    """
    For every probe A compare  C_t ∩ A = ∅  with  Sat_{1:t} ∩ A = ∅, where
    C_t = reconstruct_oracle_set(state) and truth_region = Sat_{1:t}.
    """
    oracle = reconstruct_oracle_set(state)
    agreements = 0
    first = None
    for i, probe in enumerate(probes):
        c_side = _nonempty(intersect(oracle, probe))
        sat_side = _nonempty(intersect(truth_region, probe))
        if c_side is not None and c_side == sat_side:
            agreements += 1
        elif first is None:
            first = (i, probe, c_side, sat_side)
    if first is None:
        return OracleReport(agreements, len(probes))
    i, probe, c_side, sat_side = first
    logger.info("oracle set disagrees on probe %d (C_t∩A nonempty=%s, Sat∩A nonempty=%s)", i, c_side, sat_side)
    return OracleReport(agreements, len(probes), i, probe, c_side, sat_side)


# -------------------------------
# Perfect memory
# -------------------------------

class VerdictKind(Enum):
    PERFECT_MEMORY = "PerfectMemory"
    VIOLATION = "Violation"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    t: int | None = None
    condition: str | None = None
    witness: Vec | None = None
    steps_checked: int = 0

    @property
    def perfect(self) -> bool:
        return self.kind is VerdictKind.PERFECT_MEMORY

    def __str__(self) -> str:
        if self.perfect:
            return f"PerfectMemory(steps={self.steps_checked})"
        return f"Violation(t={self.t}, {self.condition}, witness={format_vec(self.witness)})"


def arrangement_cells(arr: Arrangement, probe_budget: int, seed: int, config: Config) -> list[Cell]:
    if arr.is_polytope:
        return enumerate_cells(
            arr,
            slack=config.cell_slack,
            max_regions=config.max_regions,
            max_constraints=config.max_constraints,
            bound=config.bound,
            workers=config.workers,
        )
    return sample_cells(arr, max(probe_budget, 1) * 10, seed, config.probe_radius, config.grid_bits)


def _interior_points(region: ConvexRegion, bound: Fraction) -> list[Vec]:
    if region.is_empty:
        return []
    if not region.is_polytope:
        return [ball.center for ball in region.balls]
    if not region.halfspaces:
        return []
    try:
        return [chebyshev_center(region, bound)]
    except InfeasibleRegion:
        return []


def perfect_memory_check(
    alg: CLAlgorithm,
    stream: Sequence[EmpiricalTask],
    c: Criterion,
    probe_budget: int = 100,
    *,
    seed: int = 0,
    config: Config = DEFAULT_CONFIG,
    cells: Sequence[Cell] | None = None,
) -> Verdict:
    """
    Run `alg` and at every t check, on the reconstructed C_t:
      storage_efficiency      C_t ⊆ Sat_{1:t}        (probe membership)
      information_efficiency  C_t ⊆ C_{t-1}           (probe membership)
      cell_coverage           C_t holds the minimal-representation witness of
                              every cell of the task arrangement inside Sat_{1:t}
    Probes are `probe_budget` random grid points plus every cell witness, θ_t and
    an interior point of C_t. `cells` skips the enumeration when the caller
    already has the arrangement's cells.
    """
    regions = regions_of(stream, c)
    arr = Arrangement(tuple(regions))
    if cells is None:
        cells = arrangement_cells(arr, probe_budget, seed, config)
    representation = minimal_representation(cells)
    random_probes = random_points(probe_budget, arr.dim, seed, config.probe_radius, config.grid_bits)

    state = alg.init(arr.dim)
    previous = ConvexRegion.whole(arr.dim)
    steps = 0
    for t, task in enumerate(stream, start=1):
        try:
            state = alg.step(state, task, c)
        except InfeasibleStep as e:
            logger.info("perfect_memory_check stops at t=%d: %s", t, e)
            break
        steps = t
        truth = intersect_all(regions[:t], arr.dim)
        oracle = reconstruct_oracle_set(state)

        probes = random_probes + list(representation.witnesses) + [state.theta]
        probes += _interior_points(oracle, config.bound)
        for p in probes:
            if not contains(oracle, p):
                continue
            if not contains(truth, p):
                return Verdict(VerdictKind.VIOLATION, t, STORAGE_EFFICIENCY, p, steps)
            if not contains(previous, p):
                return Verdict(VerdictKind.VIOLATION, t, INFORMATION_EFFICIENCY, p, steps)

        for witness, sign in zip(representation.witnesses, representation.signs):
            if all(sign.bits[:t]) and not contains(oracle, witness):
                return Verdict(VerdictKind.VIOLATION, t, CELL_COVERAGE, witness, steps)

        previous = oracle

    return Verdict(VerdictKind.PERFECT_MEMORY, steps_checked=steps)


def check_finite_identifiability(tasks: Sequence[EmpiricalTask], c: Criterion) -> Vec | None:
    """θ when the tasks jointly pin the parameter down to the single point {θ}."""
    regions = [sat_region(c, task) for task in tasks]
    joint = intersect_all(regions, regions[0].dim)
    if not joint.is_polytope:
        for ball in joint.balls:
            if ball.is_point and contains(joint, ball.center):
                return ball.center
        return None
    return identify_point(joint)
