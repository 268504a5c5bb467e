# src/memory/cells.py
"""
Equivalence sets of a finite family of regions, realized as sign-vector cells:
all points with the same In/Out membership pattern across the family.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from core.config import DEFAULT_CONFIG
from core.errors import InfeasibleRegion, InstanceTooLarge, InvalidRegion
from core.utils import Vec
from geometry.feasibility import chebyshev_center, contains, intersect_all, lp_feasible
from geometry.regions import ConvexRegion, Halfspace, RegionTag

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class SignVector:
    bits: tuple[bool, ...]

    @classmethod
    def parse(cls, text: str) -> SignVector:
        return cls(tuple(ch == "1" for ch in text))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @property
    def ins(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if b]

    @property
    def outs(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if not b]

    def covers(self, other: SignVector) -> bool:
        """Every In bit of `other` is In here."""
        return all(a or not b for a, b in zip(self.bits, other.bits))


@dataclass(frozen=True)
class Arrangement:
    regions: tuple[ConvexRegion, ...]

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if not self.regions:
            raise InvalidRegion("an arrangement needs at least one region")
        dims = {r.dim for r in self.regions}
        if len(dims) != 1:
            raise InvalidRegion(f"arrangement mixes dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.regions[0].dim

    @property
    def q(self) -> int:
        return len(self.regions)

    @property
    def constraint_count(self) -> int:
        return sum(r.constraint_count for r in self.regions)

    @property
    def is_polytope(self) -> bool:
        return all(r.is_polytope for r in self.regions)


@dataclass(frozen=True)
class Cell:
    sign: SignVector
    witness: Vec

    def __post_init__(self):
        if not any(self.sign.bits):
            raise InvalidRegion("a cell lies inside at least one region")


@dataclass(frozen=True)
class MinimalRepresentation:
    witnesses: tuple[Vec, ...]
    signs: tuple[SignVector, ...]


@dataclass(frozen=True)
class CellEnumeration:
    cells: tuple[Cell, ...]
    lp_calls: int
    lp_budget: int


def sign_of(theta: Sequence[Fraction], arr: Arrangement) -> SignVector:
    return SignVector(tuple(contains(region, theta) for region in arr.regions))


def literal_equivalence_region(theta: Sequence[Fraction], arr: Arrangement) -> ConvexRegion:
    """∩ of every region containing θ (the whole space when none does)."""
    return intersect_all([r for r in arr.regions if contains(r, theta)], arr.dim)


# -------------------------------
# Exact enumeration
# -------------------------------

def _strict_exterior(h: Halfspace, slack: Fraction) -> Halfspace:
    """a·θ >= b + slack, written as -a·θ <= -(b + slack)."""
    return Halfspace(tuple(-a for a in h.normal), -(h.offset + slack))


def _sign_budget(arr: Arrangement, sign: SignVector) -> int:
    """LP calls a single sign may use: base LP, one LP per DFS node, one center LP."""
    total, width = 2, 1
    for j in sign.outs:
        region = arr.regions[j]
        if region.is_empty:
            continue
        width *= len(region.halfspaces)
        total += width
    return total


def branching_bound(arr: Arrangement) -> int:
    return max(
        _sign_budget(arr, SignVector(bits))
        for bits in itertools.product((True, False), repeat=arr.q)
        if any(bits)
    )


def _decide_sign(arr: Arrangement, sign: SignVector, slack: Fraction, bound: Fraction) -> tuple[Cell | None, int]:
    dim = arr.dim
    ins = [arr.regions[i] for i in sign.ins]
    if any(r.is_empty for r in ins):
        return None, 0
    outs = [arr.regions[j] for j in sign.outs if not arr.regions[j].is_empty]
    if any(r.tag is RegionTag.WHOLE for r in outs):
        return None, 0

    calls = 0
    base = [h for r in ins for h in r.halfspaces]
    calls += 1
    first = lp_feasible(ConvexRegion(dim, tuple(base)))
    if first.is_empty:
        return None, calls

    def search(level: int, constraints: list[Halfspace], witness: Vec):
        nonlocal calls
        if level == len(outs):
            return constraints, witness
        for h in outs[level].halfspaces:
            trial = constraints + [_strict_exterior(h, slack)]
            calls += 1
            decision = lp_feasible(ConvexRegion(dim, tuple(trial)))
            if decision.is_feasible:
                found = search(level + 1, trial, decision.witness)
                if found is not None:
                    return found
        return None

    found = search(0, base, first.witness)
    if found is None:
        return None, calls

    constraints, witness = found
    calls += 1
    try:
        witness = chebyshev_center(ConvexRegion(dim, tuple(constraints)), bound)
    except InfeasibleRegion:
        pass
    if sign_of(witness, arr) != sign:
        logger.warning("cell %s: witness %s classified differently", sign, witness)
        return None, calls
    return Cell(sign, witness), calls


def enumerate_cells_with_stats(
    arr: Arrangement,
    *,
    slack: Fraction = DEFAULT_CONFIG.cell_slack,
    max_regions: int = DEFAULT_CONFIG.max_regions,
    max_constraints: int = DEFAULT_CONFIG.max_constraints,
    bound: Fraction = DEFAULT_CONFIG.bound,
    workers: int = DEFAULT_CONFIG.workers,
) -> CellEnumeration:
    """
    Every nonempty sign class with at least one In bit, decided by exact LPs:
    In regions enter with all their halfspaces, each Out region contributes one
    halfspace violated by `slack` (depth-first over the choices, pruning
    infeasible prefixes). Cells come back sorted by sign bitstring.
    """
    if not arr.is_polytope:
        raise InvalidRegion("exact enumeration takes polytopes only; use sample_cells for balls")
    if arr.q > max_regions or arr.constraint_count > max_constraints:
        raise InstanceTooLarge(
            f"{arr.q} regions / {arr.constraint_count} constraints exceed caps {max_regions}/{max_constraints}"
        )

    signs = [SignVector(bits) for bits in itertools.product((True, False), repeat=arr.q) if any(bits)]
    decide = lambda sign: _decide_sign(arr, sign, Fraction(slack), Fraction(bound))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(decide, signs))
    else:
        outcomes = [decide(sign) for sign in signs]

    cells = sorted((cell for cell, _ in outcomes if cell is not None), key=lambda c: str(c.sign))
    lp_calls = sum(calls for _, calls in outcomes)
    budget = len(signs) * branching_bound(arr)
    logger.debug("enumerated %d cells of %d regions with %d LP calls", len(cells), arr.q, lp_calls)
    return CellEnumeration(tuple(cells), lp_calls, budget)


def enumerate_cells(arr: Arrangement, **kwargs) -> list[Cell]:
    return list(enumerate_cells_with_stats(arr, **kwargs).cells)


def minimal_representation(cells: Sequence[Cell]) -> MinimalRepresentation:
    seen: dict[SignVector, Vec] = {}
    for cell in cells:
        seen.setdefault(cell.sign, cell.witness)
    return MinimalRepresentation(tuple(seen.values()), tuple(seen.keys()))


# -------------------------------
# Sampling mode
# -------------------------------

def random_points(
    n: int,
    dim: int,
    seed: int,
    radius: Fraction = DEFAULT_CONFIG.probe_radius,
    grid_bits: int = DEFAULT_CONFIG.grid_bits,
) -> list[Vec]:
    """n points k/2^grid_bits drawn uniformly from [-radius, radius]^dim (PCG64)."""
    scale = 1 << grid_bits
    limit = int(Fraction(radius) * scale)
    rng = np.random.default_rng(seed)
    grid = rng.integers(-limit, limit, size=(n, dim), endpoint=True)
    return [tuple(Fraction(int(k), scale) for k in row) for row in grid]


def sample_cells(
    arr: Arrangement,
    n_samples: int,
    seed: int,
    radius: Fraction = DEFAULT_CONFIG.probe_radius,
    grid_bits: int = DEFAULT_CONFIG.grid_bits,
) -> list[Cell]:
    """Cells met by random grid points; works for ball regions too, may miss thin cells."""
    found: dict[SignVector, Vec] = {}
    for point in random_points(n_samples, arr.dim, seed, radius, grid_bits):
        sign = sign_of(point, arr)
        if any(sign.bits):
            found.setdefault(sign, point)
    return sorted((Cell(s, w) for s, w in found.items()), key=lambda c: str(c.sign))
