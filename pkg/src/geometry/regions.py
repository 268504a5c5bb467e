# src/geometry/regions.py
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from core.errors import InvalidRegion
from core.utils import Vec, dot, sq_norm, sub


class RegionTag(Enum):
    NON_TRIVIAL = "non_trivial"
    EMPTY = "empty"
    WHOLE = "whole"


@dataclass(frozen=True, order=True)
class Halfspace:
    """{θ : normal·θ <= offset}"""
    normal: Vec
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(Fraction(a) for a in self.normal))
        object.__setattr__(self, "offset", Fraction(self.offset))
        if not self.normal:
            raise InvalidRegion("halfspace needs dimension >= 1")
        if all(a == 0 for a in self.normal):
            raise InvalidRegion("halfspace normal is the zero vector")

    @property
    def dim(self) -> int:
        return len(self.normal)

    def violation(self, theta: Sequence[Fraction]) -> Fraction:
        return dot(self.normal, theta) - self.offset

    def contains(self, theta: Sequence[Fraction]) -> bool:
        return self.violation(theta) <= 0


@dataclass(frozen=True, order=True)
class Ball:
    """{θ : ||θ - center||² <= radius_sq}"""
    center: Vec
    radius_sq: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(Fraction(c) for c in self.center))
        object.__setattr__(self, "radius_sq", Fraction(self.radius_sq))
        if not self.center:
            raise InvalidRegion("ball needs dimension >= 1")
        if self.radius_sq < 0:
            raise InvalidRegion("negative squared radius; use ConvexRegion.empty()")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def is_point(self) -> bool:
        return self.radius_sq == 0

    def violation(self, theta: Sequence[Fraction]) -> Fraction:
        return sq_norm(sub(theta, self.center)) - self.radius_sq

    def contains(self, theta: Sequence[Fraction]) -> bool:
        return self.violation(theta) <= 0


@dataclass(frozen=True)
class ConvexRegion:
    """
    Conjunction of halfspace and ball constraints in R^dim.

    An empty region carries no constraints and `is_empty=True`; a region with no
    constraints and `is_empty=False` is the whole space.
    """
    dim: int
    halfspaces: tuple[Halfspace, ...] = ()
    balls: tuple[Ball, ...] = ()
    is_empty: bool = False

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        object.__setattr__(self, "balls", tuple(self.balls))
        if self.dim < 1:
            raise InvalidRegion(f"dimension must be >= 1, got {self.dim}")
        for h in self.halfspaces:
            if h.dim != self.dim:
                raise InvalidRegion(f"halfspace of dim {h.dim} in a dim-{self.dim} region")
        for ball in self.balls:
            if ball.dim != self.dim:
                raise InvalidRegion(f"ball of dim {ball.dim} in a dim-{self.dim} region")
        if self.is_empty and (self.halfspaces or self.balls):
            raise InvalidRegion("the empty region carries no constraints")

    @classmethod
    def whole(cls, dim: int) -> ConvexRegion:
        return cls(dim)

    @classmethod
    def empty(cls, dim: int) -> ConvexRegion:
        return cls(dim, is_empty=True)

    @classmethod
    def point(cls, theta: Sequence[Fraction]) -> ConvexRegion:
        return cls(len(theta), balls=(Ball(tuple(theta), Fraction(0)),))

    @property
    def tag(self) -> RegionTag:
        if self.is_empty:
            return RegionTag.EMPTY
        if not self.halfspaces and not self.balls:
            return RegionTag.WHOLE
        return RegionTag.NON_TRIVIAL

    @property
    def is_polytope(self) -> bool:
        return not self.balls

    @property
    def constraint_count(self) -> int:
        return len(self.halfspaces) + len(self.balls)

    def canonical(self) -> ConvexRegion:
        """Same point set, duplicate constraints removed, constraints sorted."""
        if self.is_empty:
            return self
        return ConvexRegion(
            self.dim,
            tuple(sorted(set(self.halfspaces))),
            tuple(sorted(set(self.balls))),
        )

    def same_constraints(self, other: ConvexRegion) -> bool:
        return self.canonical() == other.canonical()


def interval(lo: Fraction | int, hi: Fraction | int) -> ConvexRegion:
    """[lo, hi] in dimension 1."""
    return box((lo,), (hi,))


def box(lows: Sequence[Fraction | int], highs: Sequence[Fraction | int]) -> ConvexRegion:
    if len(lows) != len(highs):
        raise InvalidRegion("box bounds of different lengths")
    dim = len(lows)
    halfspaces: list[Halfspace] = []
    for i, (lo, hi) in enumerate(zip(lows, highs)):
        e = tuple(Fraction(1 if k == i else 0) for k in range(dim))
        halfspaces.append(Halfspace(tuple(-c for c in e), -Fraction(lo)))
        halfspaces.append(Halfspace(e, Fraction(hi)))
    return ConvexRegion(dim, tuple(halfspaces))
