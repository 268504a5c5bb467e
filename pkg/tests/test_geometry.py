# tests/test_geometry.py
import math
from fractions import Fraction as F

import numpy as np
import pytest

from core.errors import InfeasibleRegion, InvalidRegion
from core.utils import format_rat, format_vec, parse_rat, sqrt_upper
from geometry.feasibility import (
    FeasibilityStatus,
    ball_feasible,
    chebyshev_ball,
    chebyshev_center,
    contains,
    identify_point,
    intersect,
    intersect_all,
    lp_feasible,
    norm_upper,
    region_feasible,
    same_point_set,
)
from geometry.regions import Ball, ConvexRegion, Halfspace, RegionTag, box, interval
from geometry.simplex import LPStatus, solve_lp


def ball_region(*balls):
    return ConvexRegion(len(balls[0].center), balls=tuple(balls))


# -------------------------------
# Rationals
# -------------------------------

class TestRationals:
    def test_arithmetic_is_exact(self, rat_vec):
        for _ in range(200):
            a, b = rat_vec(2, radius=8, bits=16)
            assert (a + b) - b == a
            if a != 0:
                assert a * (1 / a) == 1

    @pytest.mark.parametrize("text, value", [
        ("3/4", F(3, 4)),
        ("-2", F(-2)),
        ("3/-4", F(-3, 4)),
        (" 6 / 8 ", F(3, 4)),
        ("0", F(0)),
    ])
    def test_parse(self, text, value):
        assert parse_rat(text) == value

    @pytest.mark.parametrize("text", ["1/0", "0.1", "1e3", "", "1/2/3", "abc"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_rat(text)

    def test_format_is_lowest_terms(self):
        assert format_rat(F(6, -8)) == "-3/4"
        assert format_rat(F(4, 2)) == "2"
        assert parse_rat(format_rat(F(-7, 3))) == F(-7, 3)
        assert format_vec((F(1, 2), F(-3))) == "1/2;-3"


# -------------------------------
# Regions
# -------------------------------

class TestRegions:
    def test_zero_normal_rejected(self):
        with pytest.raises(InvalidRegion):
            Halfspace((F(0), F(0)), F(1))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidRegion):
            ConvexRegion(2, (Halfspace((F(1),), F(0)),))

    def test_negative_radius_rejected(self):
        with pytest.raises(InvalidRegion):
            Ball((F(0),), F(-1))

    def test_tags(self):
        assert ConvexRegion.whole(2).tag is RegionTag.WHOLE
        assert ConvexRegion.empty(2).tag is RegionTag.EMPTY
        assert interval(0, 1).tag is RegionTag.NON_TRIVIAL

    def test_canonical_drops_duplicates_and_sorts(self):
        h1 = Halfspace((F(1),), F(2))
        h2 = Halfspace((F(-1),), F(0))
        region = ConvexRegion(1, (h1, h2, h1))
        assert region.canonical().halfspaces == (h2, h1)
        assert region.same_constraints(ConvexRegion(1, (h2, h1)))


class TestContains:
    def test_ball_center_in_own_ball(self):
        region = ball_region(Ball((F(1), F(-2)), F(1)))
        assert contains(region, (F(1), F(-2)))

    def test_point_outside_unit_ball(self):
        region = ball_region(Ball((F(0), F(0)), F(1)))
        assert not contains(region, (F(2), F(0)))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidRegion):
            contains(interval(0, 1), (F(0), F(0)))

    def test_matches_per_constraint_evaluation(self, rng, rat_vec):
        for _ in range(50):
            hs = []
            for _ in range(5):
                normal = tuple(F(int(k)) for k in rng.integers(1, 4, size=2) * rng.choice([-1, 1], size=2))
                hs.append(Halfspace(normal, F(int(rng.integers(-4, 5)))))
            region = ConvexRegion(2, tuple(hs))
            theta = rat_vec(2)
            expected = all(h.normal[0] * theta[0] + h.normal[1] * theta[1] <= h.offset for h in hs)
            assert contains(region, theta) == expected

    def test_empty_contains_nothing(self):
        assert not contains(ConvexRegion.empty(1), (F(0),))


class TestIntersect:
    def test_overlapping_intervals(self):
        both = intersect(interval(0, 2), interval(1, 3))
        decision = lp_feasible(both)
        assert decision.is_feasible
        assert F(1) <= decision.witness[0] <= F(2)

    def test_disjoint_intervals(self):
        assert lp_feasible(intersect(interval(0, 1), interval(2, 3))).is_empty

    def test_empty_absorbs_and_whole_is_identity(self):
        a = interval(0, 1)
        assert intersect(a, ConvexRegion.empty(1)).is_empty
        assert intersect(ConvexRegion.whole(1), a) == a
        assert intersect_all([], 1).tag is RegionTag.WHOLE

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidRegion):
            intersect(interval(0, 1), box((0, 0), (1, 1)))

    def test_commutes_as_point_sets(self, rat_vec):
        a = box((F(-1), F(0)), (F(2), F(1)))
        b = ConvexRegion(2, (Halfspace((F(1), F(1)), F(1)),))
        for _ in range(100):
            p = rat_vec(2)
            assert contains(intersect(a, b), p) == contains(intersect(b, a), p)


class TestSamePointSet:
    def test_scaled_and_redundant_constraints(self):
        plain = interval(F(-1, 2), F(3, 2))
        scaled = ConvexRegion(1, (
            Halfspace((F(-4),), F(2)),
            Halfspace((F(4),), F(6)),
            Halfspace((F(-2),), F(4)),
        ))
        assert plain.canonical() != scaled.canonical()
        assert same_point_set(plain, scaled)
        assert same_point_set(scaled, plain)

    def test_strict_subset(self):
        assert not same_point_set(interval(0, 1), interval(0, 2))
        assert not same_point_set(interval(0, 2), interval(0, 1))

    def test_empty_regions(self):
        disjoint = intersect(interval(0, 1), interval(2, 3))
        assert same_point_set(disjoint, ConvexRegion.empty(1))
        assert not same_point_set(disjoint, interval(0, 1))

    def test_whole_space(self):
        assert same_point_set(ConvexRegion.whole(2), ConvexRegion.whole(2))
        assert not same_point_set(ConvexRegion.whole(1), ConvexRegion(1, (Halfspace((F(1),), F(0)),)))

    def test_balls(self):
        point = ConvexRegion.point((F(1), F(2)))
        assert same_point_set(point, ConvexRegion.point((F(1), F(2))))
        assert not same_point_set(point, ConvexRegion.point((F(2), F(1))))


# -------------------------------
# Exact LP
# -------------------------------

class TestSimplex:
    def test_bounded_optimum(self):
        result = solve_lp([[F(1), F(0)], [F(0), F(1)]], [F(1), F(2)], [F(1), F(1)])
        assert result.status is LPStatus.OPTIMAL
        assert result.objective == 3
        assert result.x == (F(1), F(2))

    def test_unbounded(self):
        assert solve_lp([[F(-1)]], [F(0)], [F(1)]).status is LPStatus.UNBOUNDED

    def test_infeasible(self):
        assert solve_lp([[F(1)], [F(-1)]], [F(-1), F(0)]).status is LPStatus.INFEASIBLE

    def test_degenerate_point(self):
        result = solve_lp([[F(1)], [F(-1)]], [F(0), F(0)])
        assert result.is_optimal
        assert result.x == (F(0),)

    def test_phase_one_needed(self):
        # x >= 2, y >= 3, x + y <= 6
        result = solve_lp([[F(-1), F(0)], [F(0), F(-1)], [F(1), F(1)]], [F(-2), F(-3), F(6)])
        x, y = result.x
        assert x >= 2 and y >= 3 and x + y <= 6


class TestLpFeasible:
    def test_interval(self):
        decision = lp_feasible(interval(F(1, 2), F(3, 2)))
        assert decision.is_feasible
        assert F(1, 2) <= decision.witness[0] <= F(3, 2)

    def test_contradictory_bounds(self):
        region = ConvexRegion(1, (Halfspace((F(-1),), F(-1)), Halfspace((F(1),), F(0))))
        assert lp_feasible(region).is_empty

    def test_whole_space(self):
        assert lp_feasible(ConvexRegion.whole(3)).witness == (F(0),) * 3

    def test_refuses_balls(self):
        with pytest.raises(InvalidRegion):
            lp_feasible(ball_region(Ball((F(0),), F(1))))

    def test_permutation_invariant_status(self, rng):
        hs = [
            Halfspace((F(1), F(1)), F(1)),
            Halfspace((F(-1), F(0)), F(0)),
            Halfspace((F(0), F(-1)), F(0)),
            Halfspace((F(1), F(-1)), F(-3)),
        ]
        expected = lp_feasible(ConvexRegion(2, tuple(hs))).status
        for _ in range(10):
            order = rng.permutation(len(hs))
            shuffled = ConvexRegion(2, tuple(hs[i] for i in order))
            assert lp_feasible(shuffled).status is expected

    def test_agrees_with_grid_oracle(self, rng):
        """Step 1/8 grid over [-4, 4]^2, compared whenever the region holds a radius-1/4 ball."""
        ticks = np.arange(-32, 33)
        grid = np.array([(i, j) for i in ticks for j in ticks], dtype=np.int64)  # units of 1/8
        compared = 0
        for _ in range(100):
            normals = rng.integers(-3, 4, size=(6, 2))
            normals[(normals == 0).all(axis=1)] = (1, 0)
            anchor = rng.integers(-16, 17, size=2)  # eighths in [-2, 2]
            slack = rng.integers(-4, 17, size=6)  # eighths in [-1/2, 2]
            offsets8 = normals @ anchor + slack
            hs = tuple(
                Halfspace(tuple(F(int(a)) for a in normal), F(int(b), 8))
                for normal, b in zip(normals, offsets8)
            )
            region = ConvexRegion(2, hs)

            decision = lp_feasible(region)
            grid_hit = bool(((grid @ normals.T) <= offsets8).all(axis=1).any())
            if grid_hit:
                assert decision.is_feasible
            if decision.is_empty:
                assert not grid_hit
                compared += 1
                continue
            try:
                radius = chebyshev_ball(region, F(4)).radius
            except InfeasibleRegion:
                continue  # nonempty only outside the grid window
            if radius >= F(1, 4):
                assert grid_hit
                compared += 1
        assert compared > 0


# -------------------------------
# Chebyshev center
# -------------------------------

class TestChebyshev:
    def test_interval_center(self):
        assert chebyshev_center(interval(F(1, 2), F(3, 2)), F(4)) == (F(1),)

    def test_unit_square(self):
        assert chebyshev_center(box((0, 0), (1, 1)), F(4)) == (F(1, 2), F(1, 2))

    def test_triangle_incenter(self):
        triangle = ConvexRegion(2, (
            Halfspace((F(-1), F(0)), F(0)),
            Halfspace((F(0), F(-1)), F(0)),
            Halfspace((F(1), F(1)), F(1)),
        ))
        ball = chebyshev_ball(triangle, F(4))
        x, y = (float(v) for v in ball.center)
        distances = [x, y, (1 - x - y) / math.sqrt(2)]
        assert max(distances) - min(distances) < 1e-8
        assert float(ball.radius) == pytest.approx(1 / (2 + math.sqrt(2)), abs=1e-8)
        assert contains(triangle, ball.center)

    def test_singleton_radius_zero(self):
        ball = chebyshev_ball(intersect(interval(F(-1, 2), F(1, 2)), interval(F(1, 2), F(3, 2))))
        assert ball.radius == 0
        assert ball.center == (F(1, 2),)

    def test_unbounded_region_is_clipped(self):
        half_plane = ConvexRegion(2, (Halfspace((F(1), F(0)), F(0)),))
        ball = chebyshev_ball(half_plane, F(4))
        assert ball.radius == 2
        assert ball.center[0] == -2
        assert abs(ball.center[1]) <= 2

    def test_empty_region(self):
        with pytest.raises(InfeasibleRegion):
            chebyshev_center(ConvexRegion.empty(1))
        with pytest.raises(InfeasibleRegion):
            chebyshev_center(intersect(interval(0, 1), interval(2, 3)))

    def test_norm_upper(self):
        assert norm_upper((F(3), F(4))) == 5
        assert norm_upper((F(1), F(1))) >= F(14142, 10000)
        assert sqrt_upper(F(9, 4)) == F(3, 2)

    def test_repeated_calls_agree_exactly(self, rat_vec):
        for _ in range(20):
            lows = rat_vec(2, radius=2)
            normal = rat_vec(2, radius=1)
            if not any(normal):
                continue
            region = intersect(
                box(lows, tuple(v + 1 for v in lows)),
                ConvexRegion(2, (Halfspace(normal, F(1)),)),
            )
            if lp_feasible(region).is_empty:
                continue
            first, second = chebyshev_ball(region), chebyshev_ball(region)
            assert first == second
            assert all(isinstance(c, F) for c in first.center)


def test_identify_point():
    assert identify_point(interval(F(1, 2), F(1, 2))) == (F(1, 2),)
    assert identify_point(box((0, 0), (1, 1))) is None
    assert identify_point(ConvexRegion.whole(1)) is None


# -------------------------------
# Ball regions
# -------------------------------

class TestBallFeasible:
    def test_far_apart_balls_are_empty(self):
        region = ball_region(Ball((F(0), F(0)), F(1)), Ball((F(3), F(0)), F(1)))
        assert ball_feasible(region).is_empty

    def test_coincident_balls(self):
        region = ball_region(Ball((F(1, 2), F(0)), F(1)), Ball((F(1, 2), F(0)), F(1)))
        decision = ball_feasible(region)
        assert decision.is_feasible
        assert decision.witness == (F(1, 2), F(0))

    def test_three_balls_around_common_point(self):
        region = ball_region(
            Ball((F(0), F(1)), F(2)),
            Ball((F(2), F(1)), F(2)),
            Ball((F(1), F(2)), F(2)),
        )
        decision = ball_feasible(region)
        assert decision.is_feasible
        assert contains(region, decision.witness)

    def test_ball_outside_halfspace(self):
        region = ConvexRegion(1, (Halfspace((F(1),), F(0)),), (Ball((F(5),), F(1)),))
        assert ball_feasible(region).is_empty

    def test_ball_and_halfspace_overlap(self):
        region = ConvexRegion(2, (Halfspace((F(1), F(0)), F(0)),), (Ball((F(1), F(0)), F(4)),))
        decision = ball_feasible(region)
        assert decision.status is FeasibilityStatus.FEASIBLE
        assert contains(region, decision.witness)

    def test_region_feasible_point_ball(self):
        point = ConvexRegion.point((F(1), F(1)))
        assert region_feasible(intersect(point, box((0, 0), (2, 2)))).witness == (F(1), F(1))
        assert region_feasible(intersect(point, box((2, 2), (3, 3)))).is_empty
