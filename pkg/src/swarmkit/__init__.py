"""Stochastic swarm optimizers, consensus dynamics, and their mean-field limits.

The package has three layers.  :mod:`swarmkit.swarm` integrates
interacting-particle optimizers (inertial swarms with and without
memory, consensus-based dynamics, and the classical discrete update) on
top of the weighted-consensus and memory-switch kernels in
:mod:`swarmkit.consensus` and the benchmark objectives in
:mod:`swarmkit.objectives`.  :mod:`swarmkit.meanfield` solves the
corresponding kinetic and density equations on phase-space grids.
:mod:`swarmkit.bench` runs seeded ensembles and aggregates success
tables, and :mod:`swarmkit.cli` drives everything from JSON configs via
the ``swarmkit`` command.
"""

__version__ = "0.1.0"

from .consensus import (
    FORCE_STABILIZED_ALPHA,
    ConsensusParams,
    MemorySwitchParams,
    argmin_point,
    memory_switch,
    weighted_consensus,
)
from .objectives import FUNCTION_NAMES, ObjectiveSpec, evaluate, evaluate_batch, make_objective
from .swarm import (
    Boundary,
    Mode,
    NoiseKind,
    RunReport,
    SolverParams,
    SwarmState,
    init_state,
    run,
    run_snapshots,
)
from .bench import (
    BenchRow,
    BenchTable,
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

__all__ = [
    "__version__",
    "FORCE_STABILIZED_ALPHA",
    "ConsensusParams",
    "MemorySwitchParams",
    "argmin_point",
    "memory_switch",
    "weighted_consensus",
    "FUNCTION_NAMES",
    "ObjectiveSpec",
    "evaluate",
    "evaluate_batch",
    "make_objective",
    "Boundary",
    "Mode",
    "NoiseKind",
    "RunReport",
    "SolverParams",
    "SwarmState",
    "init_state",
    "run",
    "run_snapshots",
    "BenchRow",
    "BenchTable",
    "EnsembleSummary",
    "RunResult",
    "StopRule",
    "SuccessRule",
    "couple_local_global",
    "evaluate_run",
    "run_bench_cell",
    "run_ensemble",
    "summarize",
    "with_coupling",
    "write_bench_csv",
]
