"""Ensemble benchmarking: stop rules, success accounting, CSV tables.

A benchmark runs one solver configuration ``n_runs`` times with
independent seeds, classifies each run as a success when the final
consensus lands within ``delta_err`` of the known minimizer in the
max-norm, and aggregates success rate, the mean Euclidean error over the
successful runs only, and the mean iteration count over all runs.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Optional, Sequence

import numpy as np

from .objectives import ObjectiveSpec
from .swarm import RunReport, SolverParams, run

__all__ = [
    "StopRule",
    "SuccessRule",
    "RunResult",
    "BenchRow",
    "BenchTable",
    "EnsembleSummary",
    "couple_local_global",
    "with_coupling",
    "evaluate_run",
    "run_ensemble",
    "run_bench_cell",
    "summarize",
    "write_bench_csv",
    "CSV_COLUMNS",
]


@dataclass(frozen=True)
class StopRule:
    """Stall detection plus an iteration cap.

    A run stops early once the tracked consensus has moved less than
    ``delta_stall`` for ``n_stall`` consecutive iterations; a consensus
    that never settles runs to ``max_iter``.
    """

    delta_stall: float = 1.0e-4
    n_stall: int = 250
    max_iter: int = 10_000

    def __post_init__(self):
        if self.delta_stall <= 0.0:
            raise ValueError(f"delta_stall must be positive, got {self.delta_stall}")
        if self.n_stall < 1:
            raise ValueError(f"n_stall must be at least 1, got {self.n_stall}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be nonnegative, got {self.max_iter}")


@dataclass(frozen=True)
class SuccessRule:
    """Success means every coordinate of the final consensus is within
    ``delta_err`` of the known minimizer (strict max-norm inequality)."""

    x_min: np.ndarray
    delta_err: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "x_min", np.atleast_1d(np.asarray(self.x_min, dtype=float)))
        if self.x_min.ndim != 1 or not np.all(np.isfinite(self.x_min)):
            raise ValueError("x_min must be a finite vector")
        if self.delta_err <= 0.0:
            raise ValueError(f"delta_err must be positive, got {self.delta_err}")


@dataclass(frozen=True)
class RunResult:
    """Per-run record: classification plus the distances to the minimizer."""

    success: bool
    error: float  # Euclidean distance to the minimizer
    max_error: float  # max-norm distance, the classification basis
    iterations: int
    stop_reason: str
    wall_seconds: float


def evaluate_run(report: RunReport, rule: SuccessRule) -> RunResult:
    """Classify one run against the rule's minimizer."""
    diff = report.final_consensus - rule.x_min
    max_err = float(np.max(np.abs(diff)))
    return RunResult(
        success=max_err < rule.delta_err,
        error=float(np.linalg.norm(diff)),
        max_error=max_err,
        iterations=report.iterations,
        stop_reason=report.stop_reason,
        wall_seconds=report.wall_seconds,
    )


def couple_local_global(xi: float, lambda2: float, sigma2: float) -> tuple[float, float]:
    """Tie the memory-term coefficients to the consensus-term ones,
    lambda1 = xi lambda2 and sigma1 = xi sigma2, with xi in [0, 1]."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    return xi * lambda2, xi * sigma2


def with_coupling(params: SolverParams, xi: float) -> SolverParams:
    """A copy of ``params`` with the local-best terms tied by ``xi``."""
    lambda1, sigma1 = couple_local_global(xi, params.lambda2, params.sigma2)
    return SolverParams(
        mode=params.mode,
        m=params.m,
        lambda1=lambda1,
        lambda2=params.lambda2,
        sigma1=sigma1,
        sigma2=params.sigma2,
        alpha=params.alpha,
        beta=params.beta,
        nu=params.nu,
        dt=params.dt,
        noise=params.noise,
        boundary=params.boundary,
        box=params.box,
        pso_constraint=params.pso_constraint,
    )


def _one_run(args) -> RunResult:
    params, objective, stop, rule, seed, n_particles, init_box, init_velocity = args
    report = run(
        params,
        objective,
        stop,
        seed,
        n_particles,
        init_box=init_box,
        init_velocity=init_velocity,
    )
    return evaluate_run(report, rule)


@dataclass
class EnsembleSummary:
    """Aggregate over an ensemble of independently seeded runs.

    ``rate`` is the fraction of successes in [0, 1]; ``error`` the mean
    Euclidean error over the successful runs (NaN when none succeeded);
    ``n_iter`` the mean iteration count over all runs.
    """

    rate: float
    error: float
    n_iter: float
    wall_seconds: float
    results: list[RunResult] = field(repr=False, default_factory=list)


def summarize(results: Sequence[RunResult], wall_seconds: float = 0.0) -> EnsembleSummary:
    n = len(results)
    if n == 0:
        raise ValueError("cannot summarize an empty ensemble")
    successes = [r for r in results if r.success]
    rate = len(successes) / n
    error = float(np.mean([r.error for r in successes])) if successes else math.nan
    n_iter = float(np.mean([r.iterations for r in results]))
    return EnsembleSummary(rate=rate, error=error, n_iter=n_iter, wall_seconds=wall_seconds, results=list(results))


def run_ensemble(
    params: SolverParams,
    objective: ObjectiveSpec,
    n_runs: int,
    master_seed: int,
    stop: Optional[StopRule] = None,
    rule: Optional[SuccessRule] = None,
    n_particles: int = 100,
    init_box: Optional[tuple[float, float]] = None,
    init_velocity="zero",
    workers: int = 1,
) -> EnsembleSummary:
    """Run ``n_runs`` independent optimizations and aggregate them.

    Run k gets the k-th child of ``SeedSequence(master_seed)``, so the
    ensemble is reproducible and every run differs.  ``workers`` > 1
    distributes runs over a process pool; results are folded in run-index
    order either way, so the summary does not depend on the worker count.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be positive, got {n_runs}")
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    stop = stop if stop is not None else StopRule()
    rule = rule if rule is not None else SuccessRule(x_min=objective.minimizer)
    seq = master_seed if isinstance(master_seed, np.random.SeedSequence) else np.random.SeedSequence(master_seed)
    seeds = seq.spawn(n_runs)
    jobs = [(params, objective, stop, rule, s, n_particles, init_box, init_velocity) for s in seeds]
    t0 = time.perf_counter()
    if workers == 1:
        results = [_one_run(j) for j in jobs]
    else:
        with Pool(processes=workers) as pool:
            results = pool.map(_one_run, jobs)
    return summarize(results, wall_seconds=time.perf_counter() - t0)


CSV_COLUMNS = (
    "function",
    "mode",
    "m",
    "sigma1",
    "sigma2",
    "lambda1",
    "lambda2",
    "alpha",
    "beta",
    "nu",
    "xi",
    "N",
    "n_r",
    "rate",
    "error",
    "n_iter",
    "wall_seconds",
)


@dataclass(frozen=True)
class BenchRow:
    """One benchmark table line; mirrors the CSV schema exactly."""

    function: str
    mode: str
    m: float
    sigma1: float
    sigma2: float
    lambda1: float
    lambda2: float
    alpha: float
    beta: float
    nu: float
    xi: Optional[float]
    N: int
    n_r: int
    rate: float
    error: float
    n_iter: float
    wall_seconds: float

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {self.rate}")

    @classmethod
    def from_summary(
        cls,
        function: str,
        params: SolverParams,
        n_particles: int,
        summary: EnsembleSummary,
        xi: Optional[float] = None,
    ) -> "BenchRow":
        return cls(
            function=function,
            mode=params.mode.value,
            m=params.m,
            sigma1=params.sigma1,
            sigma2=params.sigma2,
            lambda1=params.lambda1,
            lambda2=params.lambda2,
            alpha=params.alpha,
            beta=params.beta,
            nu=params.nu,
            xi=xi,
            N=n_particles,
            n_r=len(summary.results),
            rate=summary.rate,
            error=summary.error,
            n_iter=summary.n_iter,
            wall_seconds=summary.wall_seconds,
        )


def run_bench_cell(
    objective: ObjectiveSpec,
    params: SolverParams,
    n_particles: int,
    n_runs: int,
    master_seed,
    xi: Optional[float] = None,
    **ensemble_kwargs,
) -> BenchRow:
    """One sweep cell: run the ensemble and emit a table row."""
    summary = run_ensemble(params, objective, n_runs, master_seed, n_particles=n_particles, **ensemble_kwargs)
    return BenchRow.from_summary(objective.name, params, n_particles, summary, xi=xi)


@dataclass
class BenchTable:
    """Ordered collection of benchmark rows with a CSV export."""

    rows: list[BenchRow] = field(default_factory=list)

    def add(self, row: BenchRow) -> None:
        self.rows.append(row)

    def write_csv(self, path) -> None:
        write_bench_csv(path, self.rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def write_bench_csv(path, rows: Sequence[BenchRow]) -> None:
    """Write benchmark rows under the fixed column header.

    Floats are written with ``repr`` so values round-trip exactly; a NaN
    error (no successful runs) becomes an empty cell.  Every column except
    ``wall_seconds`` is reproducible given the same config and seed.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, c)) for c in CSV_COLUMNS])
