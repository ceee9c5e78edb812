"""Mean-field density models in position space (small-inertia limit).

Without memory the density rho(x, t) obeys a drift toward the weighted
consensus with flux lambda2 (xbar - x) rho and a degenerate diffusion
written in second-derivative form, (sigma2^2/2) d^2/dx^2 [(x - xbar)^2
rho].  The local-best variant evolves rho(x, y, t) with the additional
lambda1 (y - x) drift, the combined diffusion coefficient, and the
memory advection in y.

One step treats the drift with a conservative Lax-Wendroff sweep
(explicit, second order) and the diffusion with an implicit central
solve; the consensus is frozen at the step start.  Strang splitting
symmetrizes the composition and upgrades the diffusion to
Crank-Nicolson.
"""

from __future__ import annotations

import numpy as np

from ..swarm import Mode
from .grid import DensityField, Splitting
from .kinetic import MeanFieldParams, memory_advection_y_step
from .numerics import lax_wendroff_step, solve_tridiagonal

__all__ = ["mf_cbo_step"]


def _second_derivative_implicit(values: np.ndarray, g: np.ndarray, dx: float, dt: float, theta: float) -> np.ndarray:
    """Advance du/dt = d^2(g u)/dx^2 along the last axis, theta-implicit,
    with zero-value ghosts."""
    shape = values.shape
    u = values.reshape(-1, shape[-1])
    gg = np.broadcast_to(g, shape).reshape(-1, shape[-1])
    r = dt / dx**2
    zeros = np.zeros((u.shape[0], 1))
    if theta < 1.0:
        gu = gg * u
        lap = np.concatenate([gu[:, 1:], zeros], axis=1) - 2.0 * gu + np.concatenate([zeros, gu[:, :-1]], axis=1)
        rhs = u + (1.0 - theta) * r * lap
    else:
        rhs = u
    tr = theta * r
    sub = -tr * np.concatenate([zeros, gg[:, :-1]], axis=1)
    dia = 1.0 + 2.0 * tr * gg
    sup = -tr * np.concatenate([gg[:, 1:], zeros], axis=1)
    return solve_tridiagonal(sub, dia, sup, rhs).reshape(shape)


def _drift_x(field: DensityField, speed: np.ndarray, dt: float) -> np.ndarray:
    """Lax-Wendroff x-drift; handles the (x,) and (x, y) layouts."""
    if field.values.ndim == 1:
        return lax_wendroff_step(field.values, speed, field.grid.x.spacing, dt, boundary="zero")
    moved = lax_wendroff_step(field.values.T, speed.T, field.grid.x.spacing, dt, boundary="zero")
    return moved.T


def mf_cbo_step(field: DensityField, params: MeanFieldParams) -> DensityField:
    """One full step of the density model of length grid.dt.

    A point mass sitting exactly at the consensus is stationary: its
    drift speed and diffusion coefficient both vanish there.  Interior
    mass is conserved exactly; loss occurs only through the zero-inflow
    boundaries.
    """
    mode = params.solver.mode
    if mode not in (Mode.CBO, Mode.CBO_LOCAL_BEST):
        raise ValueError(f"mf_cbo_step requires a density mode, got {mode.value}")
    if field.grid != params.grid:
        raise ValueError("field and params disagree on the grid")
    sp = params.solver
    grid = field.grid
    dt = grid.dt
    point = params.consensus(field)
    x = grid.x.centers
    if mode is Mode.CBO:
        speed = sp.lambda2 * (point - x)
        g = 0.5 * sp.sigma2**2 * (x - point) ** 2
    else:
        xx = x[:, None]
        yy = grid.y.centers[None, :]
        speed = sp.lambda1 * (yy - xx) + sp.lambda2 * (point - xx)
        g = 0.5 * (sp.sigma2**2 * (xx - point) ** 2 + sp.sigma1**2 * (xx - yy) ** 2)

    def diffuse(values: np.ndarray, step_dt: float, theta: float) -> np.ndarray:
        if values.ndim == 1:
            return _second_derivative_implicit(values, g, grid.x.spacing, step_dt, theta)
        return _second_derivative_implicit(values.T, np.asarray(g).T, grid.x.spacing, step_dt, theta).T

    out = field
    if grid.splitting is Splitting.LIE:
        values = _drift_x(out, speed, dt)
        out = DensityField(grid, values, out.time)
        if mode is Mode.CBO_LOCAL_BEST:
            out = memory_advection_y_step(out, params, dt)
        out = DensityField(grid, diffuse(out.values, dt, 1.0), out.time)
    else:
        out = DensityField(grid, _drift_x(out, speed, 0.5 * dt), out.time)
        if mode is Mode.CBO_LOCAL_BEST:
            out = memory_advection_y_step(out, params, 0.5 * dt)
        out = DensityField(grid, diffuse(out.values, dt, 0.5), out.time)
        if mode is Mode.CBO_LOCAL_BEST:
            out = memory_advection_y_step(out, params, 0.5 * dt)
        out = DensityField(grid, _drift_x(out, speed, 0.5 * dt), out.time)
    out.time = field.time + dt
    return out
