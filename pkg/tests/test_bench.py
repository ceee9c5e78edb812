"""Run classification, ensemble aggregation, and the results table."""

from __future__ import annotations

import csv
import math

import numpy as np
import pytest

from swarmkit.bench import (
    CSV_COLUMNS,
    BenchRow,
    EnsembleSummary,
    RunResult,
    StopRule,
    SuccessRule,
    couple_local_global,
    evaluate_run,
    run_bench_cell,
    run_ensemble,
    summarize,
    with_coupling,
    write_bench_csv,
)
from swarmkit.objectives import ObjectiveSpec
from swarmkit.swarm import Mode, RunReport, SolverParams

OBJ = ObjectiveSpec(name="Schwefel", dim=2)
CBO_PARAMS = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=0.5, alpha=100.0)


def report_at(point, iterations=100, stop_reason="stalled"):
    return RunReport(
        final_consensus=np.asarray(point, dtype=float),
        iterations=iterations,
        stop_reason=stop_reason,
        wall_seconds=0.0,
        trajectory=None,
    )


class TestEvaluateRun:
    def test_exact_hit_is_success_with_zero_error(self):
        rule = SuccessRule(x_min=np.zeros(3))
        result = evaluate_run(report_at([0.0, 0.0, 0.0]), rule)
        assert result.success
        assert result.error == 0.0
        assert result.max_error == 0.0

    def test_threshold_is_strict(self):
        rule = SuccessRule(x_min=np.zeros(3), delta_err=0.25)
        boundary = evaluate_run(report_at([0.25, 0.0, 0.0]), rule)
        inside = evaluate_run(report_at([0.25 - 1e-12, 0.0, 0.0]), rule)
        assert not boundary.success
        assert inside.success

    def test_error_is_euclidean_over_all_coordinates(self):
        rule = SuccessRule(x_min=np.zeros(20))
        result = evaluate_run(report_at(np.full(20, 0.1)), rule)
        assert result.success
        assert result.error == pytest.approx(0.1 * math.sqrt(20), abs=1e-12)
        assert result.max_error == pytest.approx(0.1, abs=1e-15)

    def test_shifted_minimizer(self):
        rule = SuccessRule(x_min=np.array([2.0, -1.0]))
        result = evaluate_run(report_at([2.1, -1.1]), rule)
        assert result.success
        assert result.error == pytest.approx(math.hypot(0.1, 0.1), rel=1e-12)

    def test_success_rate_monotone_in_tolerance(self):
        rng = np.random.default_rng(3)
        reports = [report_at(rng.normal(scale=0.3, size=4)) for _ in range(40)]
        x_min = np.zeros(4)
        rates = []
        for delta in (0.05, 0.15, 0.25, 0.5, 1.0):
            rule = SuccessRule(x_min=x_min, delta_err=delta)
            results = [evaluate_run(r, rule) for r in reports]
            rates.append(summarize(results).rate)
        assert rates == sorted(rates)


class TestSummarize:
    def test_iteration_mean_covers_all_runs(self):
        results = [
            RunResult(True, 0.01, 0.01, 100, "stalled", 0.0),
            RunResult(False, 3.0, 2.0, 200, "max_iter", 0.0),
        ]
        summary = summarize(results)
        assert summary.rate == 0.5
        assert summary.n_iter == 150.0
        assert summary.error == pytest.approx(0.01)

    def test_error_averages_successes_only(self):
        results = [
            RunResult(True, 0.1, 0.05, 10, "stalled", 0.0),
            RunResult(True, 0.3, 0.05, 10, "stalled", 0.0),
            RunResult(False, 9.0, 5.0, 10, "max_iter", 0.0),
        ]
        assert summarize(results).error == pytest.approx(0.2)

    def test_no_successes_gives_nan_error(self):
        results = [RunResult(False, 5.0, 4.0, 10, "max_iter", 0.0)]
        summary = summarize(results)
        assert summary.rate == 0.0
        assert math.isnan(summary.error)

    def test_aggregation_is_order_invariant(self):
        rng = np.random.default_rng(5)
        results = [
            RunResult(bool(rng.random() < 0.5), float(rng.random()),
                      float(rng.random()), int(rng.integers(1, 300)), "stalled", 0.0)
            for _ in range(25)
        ]
        shuffled = list(results)
        rng.shuffle(shuffled)
        a = summarize(results)
        b = summarize(shuffled)
        assert a.rate == b.rate
        assert a.error == pytest.approx(b.error, rel=1e-13)
        assert a.n_iter == pytest.approx(b.n_iter, rel=1e-13)


class TestCoupling:
    def test_zero_coupling_removes_local_terms(self):
        assert couple_local_global(0.0, 1.0, 9.0) == (0.0, 0.0)

    def test_full_coupling_copies_global_terms(self):
        assert couple_local_global(1.0, 0.7, 4.0) == (0.7, 4.0)

    def test_fractional_coupling(self):
        assert couple_local_global(0.25, 1.0, 8.5) == (0.25, 2.125)

    def test_coupling_bounds(self):
        with pytest.raises(ValueError):
            couple_local_global(-0.1, 1.0, 1.0)
        with pytest.raises(ValueError):
            couple_local_global(1.1, 1.0, 1.0)

    def test_with_coupling_builds_memory_params(self):
        base = SolverParams(
            mode=Mode.SDPSO_MEMORY, m=0.5, lambda2=1.0, sigma2=8.0, nu=50.0
        )
        tied = with_coupling(base, 0.5)
        assert tied.lambda1 == 0.5
        assert tied.sigma1 == 4.0
        assert tied.lambda2 == base.lambda2
        assert tied.m == base.m


class TestRunEnsemble:
    def test_same_master_seed_reproduces_everything(self):
        rule = SuccessRule(x_min=np.zeros(2))
        stop = StopRule(max_iter=60, n_stall=20)
        kw = dict(stop=stop, rule=rule, n_particles=12)
        a = run_ensemble(CBO_PARAMS, OBJ, 5, 77, **kw)
        b = run_ensemble(CBO_PARAMS, OBJ, 5, 77, **kw)
        for ra, rb in zip(a.results, b.results):
            assert ra.success == rb.success
            assert ra.error == rb.error
            assert ra.iterations == rb.iterations
        assert a.rate == b.rate and a.n_iter == b.n_iter

    def test_worker_count_does_not_change_results(self):
        rule = SuccessRule(x_min=np.zeros(2))
        stop = StopRule(max_iter=40, n_stall=15)
        kw = dict(stop=stop, rule=rule, n_particles=10)
        serial = run_ensemble(CBO_PARAMS, OBJ, 4, 123, workers=1, **kw)
        pooled = run_ensemble(CBO_PARAMS, OBJ, 4, 123, workers=2, **kw)
        for ra, rb in zip(serial.results, pooled.results):
            assert ra.error == rb.error
            assert ra.iterations == rb.iterations

    def test_distinct_seeds_give_distinct_runs(self):
        rule = SuccessRule(x_min=np.zeros(2))
        stop = StopRule(max_iter=30, n_stall=10)
        summary = run_ensemble(
            CBO_PARAMS, OBJ, 4, 9, stop=stop, rule=rule, n_particles=10
        )
        errors = [r.error for r in summary.results]
        assert len(set(errors)) == len(errors)

    def test_frozen_dynamics_classified_by_initial_consensus(self):
        # All coefficients zero: every run stalls after exactly n_stall
        # steps and succeeds exactly when the initial weighted mean already
        # sits inside the tolerance box.
        frozen = SolverParams(mode=Mode.CBO, lambda2=0.0, sigma2=0.0, alpha=100.0)
        rule = SuccessRule(x_min=np.zeros(2), delta_err=0.25)
        stop = StopRule(n_stall=12, max_iter=100)
        summary = run_ensemble(
            frozen, OBJ, 6, 31, stop=stop, rule=rule, n_particles=25,
            init_box=(-1.0, 1.0),
        )
        for result in summary.results:
            assert result.iterations == 12
            assert result.stop_reason == "stalled"
            assert result.success == (result.max_error < 0.25)


class TestBenchTable:
    @staticmethod
    def _summary():
        results = [
            RunResult(True, 0.05, 0.02, 120, "stalled", 0.5),
            RunResult(False, 2.0, 1.5, 300, "max_iter", 0.6),
        ]
        return summarize(results, wall_seconds=1.1)

    def test_csv_schema(self, tmp_path):
        row = BenchRow.from_summary("Ackley", CBO_PARAMS, 100, self._summary(), xi=0.5)
        path = tmp_path / "table.csv"
        write_bench_csv(path, [row])
        with open(path, newline="") as fh:
            records = list(csv.DictReader(fh))
        assert list(records[0].keys()) == list(CSV_COLUMNS)
        assert len(CSV_COLUMNS) == 17

    def test_csv_round_trip_values(self, tmp_path):
        row = BenchRow.from_summary("Rastrigin", CBO_PARAMS, 50, self._summary())
        path = tmp_path / "table.csv"
        write_bench_csv(path, [row])
        with open(path, newline="") as fh:
            rec = next(csv.DictReader(fh))
        assert rec["function"] == "Rastrigin"
        assert rec["mode"] == "cbo"
        assert float(rec["lambda2"]) == 1.0
        assert float(rec["sigma2"]) == 0.5
        assert int(rec["N"]) == 50
        assert int(rec["n_r"]) == 2
        assert float(rec["rate"]) == 0.5
        assert float(rec["error"]) == pytest.approx(0.05)
        assert float(rec["n_iter"]) == pytest.approx(210.0)

    def test_failed_cell_leaves_error_empty(self, tmp_path):
        summary = summarize([RunResult(False, 4.0, 3.0, 10, "max_iter", 0.1)])
        row = BenchRow.from_summary("Ackley", CBO_PARAMS, 10, summary)
        path = tmp_path / "table.csv"
        write_bench_csv(path, [row])
        with open(path, newline="") as fh:
            rec = next(csv.DictReader(fh))
        assert rec["error"] == ""

    def test_empty_coupling_column_without_xi(self, tmp_path):
        row = BenchRow.from_summary("Ackley", CBO_PARAMS, 10, self._summary())
        path = tmp_path / "table.csv"
        write_bench_csv(path, [row])
        with open(path, newline="") as fh:
            rec = next(csv.DictReader(fh))
        assert rec["xi"] == ""

    def test_run_bench_cell_end_to_end(self):
        row = run_bench_cell(
            OBJ, CBO_PARAMS, n_particles=10, n_runs=3, master_seed=55,
            stop=StopRule(max_iter=30, n_stall=10),
        )
        assert row.function == "Schwefel"
        assert row.N == 10
        assert row.n_r == 3
        assert 0.0 <= row.rate <= 1.0


class TestStopRule:
    def test_defaults(self):
        stop = StopRule()
        assert stop.delta_stall == 1e-4
        assert stop.n_stall == 250
        assert stop.max_iter == 10_000

    def test_validation(self):
        with pytest.raises(ValueError):
            StopRule(delta_stall=0.0)
        with pytest.raises(ValueError):
            StopRule(n_stall=0)
        with pytest.raises(ValueError):
            StopRule(max_iter=-1)
