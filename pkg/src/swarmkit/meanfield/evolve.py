"""Time marching for the mean-field solvers."""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from ..swarm import Mode
from .cbo import mf_cbo_step
from .grid import DensityField
from .kinetic import MeanFieldParams, mf_pso_step

__all__ = ["mean_field_step", "run_meanfield", "run_with_snapshots"]


def mean_field_step(field: DensityField, params: MeanFieldParams) -> DensityField:
    """One step of whichever model the mode selects."""
    if params.solver.mode in (Mode.CBO, Mode.CBO_LOCAL_BEST):
        return mf_cbo_step(field, params)
    return mf_pso_step(field, params)


def _step_count(span: float, dt: float, what: str) -> int:
    steps = round(span / dt)
    if steps < 0 or abs(steps * dt - span) > 1.0e-9 * max(1.0, abs(span)):
        raise ValueError(f"{what} must be a nonnegative whole number of steps dt={dt} away, got span {span}")
    return steps


def run_meanfield(
    field: DensityField,
    params: MeanFieldParams,
    t_end: float,
    observer: Optional[Callable[[DensityField], None]] = None,
) -> DensityField:
    """March from field.time to t_end; the observer sees every new state."""
    steps = _step_count(t_end - field.time, field.grid.dt, "t_end")
    for _ in range(steps):
        field = mean_field_step(field, params)
        if observer is not None:
            observer(field)
    if steps:
        field.time = t_end  # pin the accumulated time so snapshots land exactly
    return field


def run_with_snapshots(field: DensityField, params: MeanFieldParams, times: Sequence[float]) -> list[DensityField]:
    """March once through the sorted snapshot times, copying the state at
    each (the initial time may be among them)."""
    wanted = sorted(set(float(t) for t in times))
    if wanted and wanted[0] < field.time - 1.0e-12:
        raise ValueError(f"snapshot time {wanted[0]} precedes the field time {field.time}")
    out = []
    for t in wanted:
        field = run_meanfield(field, params, t)
        out.append(field.copy())
    return out
