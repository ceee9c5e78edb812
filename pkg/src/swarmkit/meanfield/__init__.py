"""Deterministic mean-field solvers on 1D phase-space grids."""

from .grid import (
    Axis,
    DensityField,
    PhaseGrid,
    Splitting,
    consensus_from_density,
    default_phase_grid,
    gaussian_density,
    histogram_density,
    l1_distance,
    marginal,
    uniform_density,
)
from .numerics import bernoulli_ratio, lax_wendroff_step, solve_tridiagonal
from .kinetic import (
    MeanFieldParams,
    fokker_planck_v_step,
    maxwellian_profile,
    memory_advection_y_step,
    mf_pso_step,
    transport_x_step,
)
from .cbo import mf_cbo_step
from .evolve import mean_field_step, run_meanfield, run_with_snapshots
from .io import (
    read_density_binary,
    read_density_csv,
    write_density_binary,
    write_density_csv,
)

__all__ = [
    "Axis",
    "bernoulli_ratio",
    "DensityField",
    "MeanFieldParams",
    "PhaseGrid",
    "Splitting",
    "consensus_from_density",
    "default_phase_grid",
    "fokker_planck_v_step",
    "gaussian_density",
    "histogram_density",
    "l1_distance",
    "lax_wendroff_step",
    "marginal",
    "maxwellian_profile",
    "mean_field_step",
    "memory_advection_y_step",
    "mf_cbo_step",
    "mf_pso_step",
    "read_density_binary",
    "read_density_csv",
    "run_meanfield",
    "run_with_snapshots",
    "solve_tridiagonal",
    "transport_x_step",
    "uniform_density",
    "write_density_binary",
    "write_density_csv",
]
