# tests/test_engine.py
import csv
from fractions import Fraction as F

import pytest

from core.errors import NotLiftable
from harness.streams import StreamKind, StreamSpec, generate
from learning.algorithms import ExactAlgorithm, RegAlgorithm, ReplayAlgorithm
from learning.criteria import sat_region
from learning.engine import (
    TRACE_COLUMNS,
    Trace,
    TraceRecord,
    check_optimality,
    check_sat_invariance,
    decide_with_algorithm,
    lift_to_idealized,
    regions_of,
    run,
    run_idealized,
    write_trace_csv,
)
from geometry.regions import interval
from learning.tasks import Criterion, CriterionKind, EmpiricalTask

PER_SAMPLE = Criterion(CriterionKind.PER_SAMPLE_ABS, F(1, 2))


def one_d(y, task_id=1):
    return EmpiricalTask.scalar([((F(1),), F(y))], task_id)


def planted(seed, T=5, n_per_task=1):
    return generate(StreamSpec(StreamKind.PLANTED, seed=seed, dim=2, T=T, n_per_task=n_per_task))


class TestRun:
    def test_single_task(self):
        trace = run(ExactAlgorithm(), [one_d(1)], PER_SAMPLE)
        assert [r.satisfied for r in trace.records] == [(1,)]
        assert trace.complete

    def test_planted_stream_all_satisfied(self):
        trace = run(ExactAlgorithm(), planted(3, n_per_task=2), PER_SAMPLE)
        assert all(all(r.satisfied) for r in trace.records)
        assert [len(r.satisfied) for r in trace.records] == [1, 2, 3, 4, 5]

    def test_infeasible_truncates(self):
        trace = run(ExactAlgorithm(), [one_d(F(1, 2)), one_d(F(5, 2), 2)], PER_SAMPLE)
        assert trace.infeasible_at == 2
        assert len(trace.records) == 1
        assert not check_optimality(trace)

    def test_deterministic_without_timings(self):
        stream = planted(11)
        first = run(ExactAlgorithm(), stream, PER_SAMPLE, record_timings=False)
        second = run(ExactAlgorithm(), stream, PER_SAMPLE, record_timings=False)
        assert first == second
        assert all(r.wall_time_us == 0 for r in first.records)

    def test_forgetting_count_from_bits(self):
        record = TraceRecord(3, (F(0),), 1, (1, 0, 0))
        assert record.forgetting_count == 2
        assert record.bitstring == "100"


class TestOptimality:
    def test_all_ones(self):
        trace = Trace("x", (TraceRecord(1, (F(0),), 0, (1,)), TraceRecord(2, (F(0),), 0, (1, 1))))
        assert check_optimality(trace)

    def test_any_zero(self):
        trace = Trace("x", (TraceRecord(1, (F(0),), 0, (1,)), TraceRecord(2, (F(0),), 0, (0, 1))))
        assert not check_optimality(trace)

    def test_exact_on_planted_streams(self):
        for seed in range(50):
            assert check_optimality(run(ExactAlgorithm(), planted(seed), PER_SAMPLE))


class TestSatInvariance:
    def tasks(self):
        task = EmpiricalTask.scalar(
            [((F(1), F(2)), F(1)), ((F(-1), F(1)), F(0)), ((F(3), F(0)), F(2))], 1
        )
        return task, [(task, task.duplicated(2)), (task, task.permuted([2, 0, 1]))]

    def test_exact(self):
        _, pairs = self.tasks()
        assert check_sat_invariance(ExactAlgorithm(), Criterion(CriterionKind.PER_SAMPLE_ABS, F(2)), pairs)

    def test_replay_full(self):
        _, pairs = self.tasks()
        assert check_sat_invariance(ReplayAlgorithm(), Criterion(CriterionKind.PER_SAMPLE_ABS, F(2)), pairs)

    def test_from_a_later_state(self):
        base, pairs = self.tasks()
        c = Criterion(CriterionKind.PER_SAMPLE_ABS, F(2))
        alg = ExactAlgorithm()
        later = alg.step(alg.init(2), base, c)
        assert check_sat_invariance(alg, c, pairs, states=[alg.init(2), later])

    def test_mean_abs_duplicates_change_constraints_not_points(self):
        # Sat = [-1/2, 3/2]; doubling the atoms adds scaled and redundant halfspaces
        task = EmpiricalTask.scalar([((F(1),), F(0)), ((F(1),), F(1))], 1)
        c = Criterion(CriterionKind.MEAN_ABS, F(1))
        doubled = task.duplicated(2)
        assert sat_region(c, task).canonical() != sat_region(c, doubled).canonical()
        pairs = [(task, doubled), (task, task.permuted([1, 0]))]
        assert check_sat_invariance(ExactAlgorithm(), c, pairs)
        assert check_sat_invariance(ReplayAlgorithm(), c, pairs)

    def test_different_sat_sets_are_told_apart(self):
        assert not check_sat_invariance(ExactAlgorithm(), PER_SAMPLE, [(one_d(1), one_d(2, 2))])


class TestIdealized:
    def test_lift_matches_raw_run(self):
        for seed in range(50):
            stream = planted(seed)
            raw = run(ExactAlgorithm(), stream, PER_SAMPLE).thetas
            lifted = run_idealized(lift_to_idealized(ExactAlgorithm(), PER_SAMPLE), regions_of(stream, PER_SAMPLE))
            assert raw == lifted

    def test_replay_not_liftable(self):
        with pytest.raises(NotLiftable):
            lift_to_idealized(ReplayAlgorithm(), PER_SAMPLE)

    def test_reg_not_liftable(self):
        with pytest.raises(NotLiftable):
            lift_to_idealized(RegAlgorithm(F(10)), PER_SAMPLE)

    def test_decision_by_optimization(self):
        ialg = lift_to_idealized(ExactAlgorithm(), PER_SAMPLE)
        state = ialg.step(ialg.init(1), interval(0, 2))
        assert decide_with_algorithm(ialg, state, interval(1, 3))
        assert not decide_with_algorithm(ialg, state, interval(3, 4))


def test_write_trace_csv(tmp_path):
    trace = run(ExactAlgorithm(), [one_d(1), one_d(2, 2)], Criterion(CriterionKind.PER_SAMPLE_ABS, F(1)), record_timings=False)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert rows[1] == ["1", "1", "2", "1", "0"]
    assert rows[2] == ["2", "3/2", "4", "11", "0"]
