# src/geometry/feasibility.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from core.config import DEFAULT_CONFIG
from core.errors import InfeasibleRegion, InvalidRegion
from core.utils import Vec, dot, snap_vec, sq_norm, sqrt_upper, sub, zeros
from geometry.regions import Ball, ConvexRegion, Halfspace, RegionTag
from geometry.simplex import LPStatus, solve_lp

logger = logging.getLogger(__name__)


class FeasibilityStatus(Enum):
    FEASIBLE = "feasible"
    EMPTY = "empty"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Feasibility:
    status: FeasibilityStatus
    witness: Vec | None = None

    @classmethod
    def feasible(cls, witness: Vec) -> Feasibility:
        return cls(FeasibilityStatus.FEASIBLE, tuple(witness))

    @classmethod
    def empty(cls) -> Feasibility:
        return cls(FeasibilityStatus.EMPTY)

    @classmethod
    def unknown(cls) -> Feasibility:
        return cls(FeasibilityStatus.UNKNOWN)

    @property
    def is_feasible(self) -> bool:
        return self.status is FeasibilityStatus.FEASIBLE

    @property
    def is_empty(self) -> bool:
        return self.status is FeasibilityStatus.EMPTY


@dataclass(frozen=True)
class ChebyshevBall:
    center: Vec
    radius: Fraction


# -------------------------------
# Membership and algebra
# -------------------------------

def contains(region: ConvexRegion, point: Sequence[Fraction]) -> bool:
    if len(point) != region.dim:
        raise InvalidRegion(f"point of dim {len(point)} tested against a dim-{region.dim} region")
    if region.is_empty:
        return False
    return all(h.contains(point) for h in region.halfspaces) and all(
        ball.contains(point) for ball in region.balls
    )


def max_violation(region: ConvexRegion, point: Sequence[Fraction]) -> Fraction:
    """max over constraints of a·θ-b / ||θ-c||²-r²; <= 0 exactly on the region."""
    values = [h.violation(point) for h in region.halfspaces]
    values += [ball.violation(point) for ball in region.balls]
    return max(values, default=Fraction(0))


def intersect(r1: ConvexRegion, r2: ConvexRegion) -> ConvexRegion:
    if r1.dim != r2.dim:
        raise InvalidRegion(f"cannot intersect dim {r1.dim} with dim {r2.dim}")
    if r1.is_empty or r2.is_empty:
        return ConvexRegion.empty(r1.dim)
    if r2.tag is RegionTag.WHOLE:
        return r1
    if r1.tag is RegionTag.WHOLE:
        return r2
    return ConvexRegion(r1.dim, r1.halfspaces + r2.halfspaces, r1.balls + r2.balls)


def intersect_all(regions: Sequence[ConvexRegion], dim: int) -> ConvexRegion:
    out = ConvexRegion.whole(dim)
    for region in regions:
        out = intersect(out, region)
    return out


# -------------------------------
# Exact polytope decisions
# -------------------------------

def _system(halfspaces: Sequence[Halfspace]) -> tuple[list[Vec], list[Fraction]]:
    return [h.normal for h in halfspaces], [h.offset for h in halfspaces]


def _require_polytope(region: ConvexRegion, op: str) -> None:
    if region.balls:
        raise InvalidRegion(f"{op} needs a polytope; region has {len(region.balls)} ball constraint(s)")


def lp_feasible(region: ConvexRegion) -> Feasibility:
    _require_polytope(region, "lp_feasible")
    if region.is_empty:
        return Feasibility.empty()
    if not region.halfspaces:
        return Feasibility.feasible(zeros(region.dim))

    A, b = _system(region.halfspaces)
    result = solve_lp(A, b)
    if result.status is LPStatus.INFEASIBLE:
        return Feasibility.empty()
    return Feasibility.feasible(result.x)


def _implied(h: Halfspace, region: ConvexRegion) -> bool:
    """max a·θ over the region is <= b (region assumed nonempty)."""
    if not region.halfspaces:
        return False
    A, b = _system(region.halfspaces)
    result = solve_lp(A, b, h.normal)
    return result.is_optimal and result.objective <= h.offset


def same_point_set(r1: ConvexRegion, r2: ConvexRegion) -> bool:
    """
    Equality of the point sets, not of the constraint lists. Polytopes are
    compared by mutual implication of every halfspace (one exact LP each);
    regions with balls fall back to canonical constraint equality.
    """
    if r1.dim != r2.dim:
        return False
    if not (r1.is_polytope and r2.is_polytope):
        if region_feasible(r1).is_empty and region_feasible(r2).is_empty:
            return True
        return r1.canonical() == r2.canonical()

    empty1, empty2 = lp_feasible(r1).is_empty, lp_feasible(r2).is_empty
    if empty1 or empty2:
        return empty1 and empty2
    return all(_implied(h, r2) for h in r1.halfspaces) and all(_implied(h, r1) for h in r2.halfspaces)


def norm_upper(a: Sequence[Fraction]) -> Fraction:
    """
    Rational upper bound on ||a||₂: ceil(sqrt(||a||²) * 2^32) / 2^32 up to the
    denominator of ||a||², exact when ||a||² is a rational square.
    """
    return sqrt_upper(sq_norm(a), bits=32)


def _bounding_box(dim: int, bound: Fraction) -> list[Halfspace]:
    out = []
    for i in range(dim):
        e = tuple(Fraction(1 if k == i else 0) for k in range(dim))
        out.append(Halfspace(e, bound))
        out.append(Halfspace(tuple(-x for x in e), bound))
    return out


def chebyshev_ball(region: ConvexRegion, bound: Fraction = DEFAULT_CONFIG.bound) -> ChebyshevBall:
    """
    Largest inscribed ball of region ∩ [-bound, bound]^d:

        maximize r  s.t.  a_j·θ + r * N_j <= b_j,  r >= 0

    with N_j = norm_upper(a_j) >= ||a_j||₂, so the returned r never overstates
    the true inscribed radius and the center always satisfies every constraint.
    """
    _require_polytope(region, "chebyshev_center")
    if bound <= 0:
        raise InvalidRegion("bounding box half-width must be positive")
    if region.is_empty:
        raise InfeasibleRegion("empty region has no Chebyshev center")

    halfspaces = list(region.halfspaces) + _bounding_box(region.dim, Fraction(bound))
    A = [h.normal + (norm_upper(h.normal),) for h in halfspaces]
    b = [h.offset for h in halfspaces]
    c = (Fraction(0),) * region.dim + (Fraction(1),)
    nonneg = [False] * region.dim + [True]

    result = solve_lp(A, b, c, nonneg=nonneg)
    if result.status is not LPStatus.OPTIMAL:
        raise InfeasibleRegion(f"region is empty inside [-{bound}, {bound}]^{region.dim}")
    center, radius = result.x[:-1], result.x[-1]
    logger.debug("chebyshev center %s radius %s (%d pivots)", center, radius, result.pivots)
    return ChebyshevBall(center, radius)


def chebyshev_center(region: ConvexRegion, bound: Fraction = DEFAULT_CONFIG.bound) -> Vec:
    return chebyshev_ball(region, bound).center


def identify_point(region: ConvexRegion) -> Vec | None:
    """θ if the polytope is exactly {θ}, else None (2d exact LPs)."""
    _require_polytope(region, "identify_point")
    if region.is_empty or not region.halfspaces:
        return None
    A, b = _system(region.halfspaces)
    point: list[Fraction] = []
    for i in range(region.dim):
        hi = solve_lp(A, b, [Fraction(1 if k == i else 0) for k in range(region.dim)])
        lo = solve_lp(A, b, [Fraction(-1 if k == i else 0) for k in range(region.dim)])
        if not (hi.is_optimal and lo.is_optimal) or hi.objective != -lo.objective:
            return None
        point.append(hi.objective)
    return tuple(point)


# -------------------------------
# Ball constraints
# -------------------------------

def _balls_separated(b1: Ball, b2: Ball) -> bool:
    """||c1 - c2|| > r1 + r2, decided exactly by squaring twice."""
    slack = sq_norm(sub(b1.center, b2.center)) - b1.radius_sq - b2.radius_sq
    return slack > 0 and slack * slack > 4 * b1.radius_sq * b2.radius_sq


def _ball_outside(ball: Ball, h: Halfspace) -> bool:
    """Every point of the ball violates h: a·c - b > r ||a||."""
    gap = h.violation(ball.center)
    return gap > 0 and gap * gap > ball.radius_sq * sq_norm(h.normal)


def _certified_empty(region: ConvexRegion) -> bool:
    if region.halfspaces and lp_feasible(ConvexRegion(region.dim, region.halfspaces)).is_empty:
        return True
    balls = region.balls
    for i, b1 in enumerate(balls):
        for b2 in balls[i + 1:]:
            if _balls_separated(b1, b2):
                return True
        if any(_ball_outside(b1, h) for h in region.halfspaces):
            return True
    return False


def ball_feasible(
    region: ConvexRegion,
    tol: Fraction = DEFAULT_CONFIG.ball_tol,
    max_iter: int = DEFAULT_CONFIG.ball_max_iter,
    *,
    bound: Fraction = DEFAULT_CONFIG.bound,
    snap_bits: int = DEFAULT_CONFIG.snap_bits,
) -> Feasibility:
    """
    Decide a mixed halfspace/ball region.

    Empty is only returned on an exact certificate (infeasible halfspace part,
    two separated balls, or a ball entirely outside a halfspace). Otherwise
    f(θ) = max signed violation is minimized by projected subgradient steps
    scale/sqrt(k+1) on [-bound, bound]^d, starting from the mean ball center.
    Iterates with f(θ) <= -tol in floats are snapped to k/2^snap_bits and
    accepted only if the exact violation is <= 0; the final iterate is checked
    the same way. Anything else is Unknown.
    """
    if region.is_empty:
        return Feasibility.empty()
    if not region.balls:
        return lp_feasible(region)
    if _certified_empty(region):
        return Feasibility.empty()

    normals = np.array([[float(a) for a in h.normal] for h in region.halfspaces], dtype=float).reshape(-1, region.dim)
    offsets = np.array([float(h.offset) for h in region.halfspaces], dtype=float)
    centers = np.array([[float(c) for c in ball.center] for ball in region.balls], dtype=float)
    radii_sq = np.array([float(ball.radius_sq) for ball in region.balls], dtype=float)

    scale = max(1.0, float(np.sqrt(radii_sq.max())))
    box = float(bound)
    margin = float(tol)
    theta = centers.mean(axis=0)

    def exact_check(x: np.ndarray) -> Vec | None:
        candidate = snap_vec(x, snap_bits)
        return candidate if max_violation(region, candidate) <= 0 else None

    for k in range(max_iter):
        h_vals = normals @ theta - offsets
        b_vals = ((theta - centers) ** 2).sum(axis=1) - radii_sq
        values = np.concatenate([h_vals, b_vals])
        worst = int(np.argmax(values))
        if values[worst] <= -margin:
            witness = exact_check(theta)
            if witness is not None:
                logger.debug("ball_feasible: witness after %d iterations", k)
                return Feasibility.feasible(witness)

        if worst < len(h_vals):
            g = normals[worst]
        else:
            g = 2.0 * (theta - centers[worst - len(h_vals)])
        g_norm = float(np.linalg.norm(g))
        if g_norm == 0.0:
            # at a zero-radius ball's center; nothing left to improve
            break
        theta = np.clip(theta - (scale / math.sqrt(k + 1)) * g / g_norm, -box, box)

    witness = exact_check(theta)
    if witness is not None:
        return Feasibility.feasible(witness)
    logger.debug("ball_feasible: undecided after %d iterations", max_iter)
    return Feasibility.unknown()


def region_feasible(
    region: ConvexRegion,
    tol: Fraction = DEFAULT_CONFIG.ball_tol,
    max_iter: int = DEFAULT_CONFIG.ball_max_iter,
) -> Feasibility:
    """
    lp_feasible for polytopes; an exact point test when a zero-radius ball pins
    the region to one point; ball_feasible otherwise.
    """
    if region.is_empty:
        return Feasibility.empty()
    if not region.balls:
        return lp_feasible(region)
    for ball in region.balls:
        if ball.is_point:
            if contains(region, ball.center):
                return Feasibility.feasible(ball.center)
            return Feasibility.empty()
    return ball_feasible(region, tol, max_iter)
