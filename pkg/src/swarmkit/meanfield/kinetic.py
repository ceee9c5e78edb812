"""Deterministic 1D kinetic solvers for the mean-field swarm equations.

The density f(x, v, t) (or f(x, y, v, t) with memory) evolves under a
transport term v df/dx, a velocity-space drift-diffusion generated by
friction gamma v, attraction toward the frozen consensus point, and a
degenerate diffusion whose strength vanishes at the consensus, plus, with
memory, an advection of the memory coordinate toward the position gated
by the smooth cost switch.  One full step is a dimensional splitting of
those three one-dimensional sub-flows:

* x-transport: second-order backward semi-Lagrangian (quadratic
  interpolation at the characteristic foot, limited to the stencil
  range, zero inflow),
* v drift-diffusion: implicit conservative flux form with exponentially
  fitted interface weights, one tridiagonal solve per (x[, y]) column,
  zero flux at the v-ends,
* y-advection: conservative Lax-Wendroff with cell-centered speeds.

Lie composition (default) freezes the consensus at the step start and
uses backward Euler in v; Strang composition halves the outer sub-steps,
evaluates the consensus at the half step, and uses Crank-Nicolson in v,
which makes the full step second order in time.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..consensus import memory_switch
from ..objectives import ObjectiveSpec, evaluate_batch
from ..swarm import Mode, SolverParams
from .grid import DensityField, PhaseGrid, Splitting, consensus_from_density
from .numerics import bernoulli_ratio, lax_wendroff_step, solve_tridiagonal

__all__ = [
    "MeanFieldParams",
    "transport_x_step",
    "fokker_planck_v_step",
    "memory_advection_y_step",
    "mf_pso_step",
    "maxwellian_profile",
]

_KINETIC_MODES = (Mode.SDPSO_NO_MEMORY, Mode.SDPSO_MEMORY)
_DENSITY_MODES = (Mode.CBO, Mode.CBO_LOCAL_BEST)


@dataclass(frozen=True)
class MeanFieldParams:
    """Solver coefficients bound to a 1D objective and a phase grid.

    The mode decides the geometry: the kinetic modes need a v-axis (and
    positive inertia, since the friction and noise scale with 1/m); the
    density modes must not have one; the memory variants additionally
    need the y-axis.  Cost values on the grid are evaluated once here.
    """

    solver: SolverParams
    objective: ObjectiveSpec
    grid: PhaseGrid

    def __post_init__(self):
        if self.objective.dim != 1:
            raise ValueError(f"mean-field solvers are one-dimensional, objective has dim {self.objective.dim}")
        mode = self.solver.mode
        if mode not in _KINETIC_MODES + _DENSITY_MODES:
            raise ValueError(f"mode {mode.value} has no mean-field solver")
        if self.grid.x is None:
            raise ValueError("grid must have an x-axis")
        if mode in _KINETIC_MODES:
            if self.grid.v is None:
                raise ValueError(f"mode {mode.value} requires a v-axis")
            if self.solver.m <= 0.0:
                raise ValueError("the kinetic equations require positive inertia m")
        elif self.grid.v is not None:
            raise ValueError(f"mode {mode.value} is a density model; the grid must not have a v-axis")
        if mode.has_memory and self.grid.y is None:
            raise ValueError(f"mode {mode.value} requires a y-axis")
        if not mode.has_memory and self.grid.y is not None:
            raise ValueError(f"mode {mode.value} must not have a y-axis")

    @cached_property
    def cost_x(self) -> np.ndarray:
        return evaluate_batch(self.objective, self.grid.x.centers[:, None])

    @cached_property
    def cost_y(self) -> np.ndarray:
        return evaluate_batch(self.objective, self.grid.y.centers[:, None])

    @cached_property
    def switch_xy(self) -> np.ndarray:
        """S(x_i, y_j) on the (x, y) grid."""
        return memory_switch(self.cost_x[:, None], self.cost_y[None, :], self.solver.switch_params())

    def consensus(self, field: DensityField) -> float:
        """The frozen attraction coordinate for one step: the weighted
        consensus of the x-marginal, or of the y-marginal with memory."""
        if self.solver.mode.has_memory:
            return consensus_from_density(field, "y", self.cost_y, self.solver.alpha)
        return consensus_from_density(field, "x", self.cost_x, self.solver.alpha)


def transport_x_step(field: DensityField, dt: float) -> DensityField:
    """Advect along x by v dt with a backward semi-Lagrangian sweep.

    For each velocity cell the characteristic foot x - v dt is located on
    the x-axis and the field is interpolated there with a quadratic
    Lagrange stencil around the nearest center; feet outside the box pull
    in zeros.  The interpolated value is limited to the stencil's range,
    which suppresses the spurious extrema a bare quadratic creates at
    fronts while leaving resolved smooth data untouched.  Exact when
    v dt is a whole number of cells.
    """
    grid = field.grid
    if grid.v is None or grid.x is None:
        raise ValueError("x-transport requires both x and v axes")
    f = field.values
    nx = grid.x.n
    shift = grid.v.centers * dt / grid.x.spacing
    k = np.rint(shift).astype(int)
    frac = shift - k
    w_minus = frac * (frac + 1.0) / 2.0
    w_center = 1.0 - frac * frac
    w_plus = frac * (frac - 1.0) / 2.0
    idx = np.arange(nx)
    out = np.zeros_like(f)

    def gather(block: np.ndarray, src: np.ndarray) -> np.ndarray:
        valid = (src >= 0) & (src < nx)
        g = np.zeros_like(block)
        g[valid] = block[src[valid]]
        return g

    for j in range(grid.v.n):
        block = f[..., j]
        base = idx - k[j]
        g_minus = gather(block, base - 1)
        g_center = gather(block, base)
        g_plus = gather(block, base + 1)
        value = w_minus[j] * g_minus + w_center[j] * g_center + w_plus[j] * g_plus
        lo = np.minimum(g_minus, np.minimum(g_center, g_plus))
        hi = np.maximum(g_minus, np.maximum(g_center, g_plus))
        out[..., j] = np.clip(value, lo, hi)
    return DensityField(grid, out, field.time)


def fokker_planck_v_step(
    field: DensityField,
    consensus: float,
    params: MeanFieldParams,
    dt: float,
    theta: float = 1.0,
) -> DensityField:
    """Implicit step of the velocity drift-diffusion.

    Each (x[, y]) column solves d f/dt = d/dv [ (gamma/m) v f + b f +
    c df/dv ] with b = (lambda2/m)(x - consensus) (plus (lambda1/m)(x - y)
    with memory) and c = [sigma2^2 (x - consensus)^2 + sigma1^2 (x - y)^2]
    / (2 m^2).  Interface fluxes use exponentially fitted weights: they
    reduce to the central average plus an O(dv^2) correction where the
    cell Peclet number is small, blend into upwinding where advection
    dominates (so the implicit matrix stays an M-matrix and no negative
    cells are created), and make the per-column Gaussian equilibrium of
    the drift-diffusion balance exactly stationary.  Fluxes vanish at
    the v-ends, so each column's mass is conserved exactly; theta = 1 is
    backward Euler, theta = 1/2 Crank-Nicolson.  Columns where the
    diffusion degenerates (x at the consensus) reduce to pure upwinded
    drift/friction; no floor is added.
    """
    grid = field.grid
    if grid.v is None:
        raise ValueError("the velocity step requires a v-axis")
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    sp = params.solver
    x = grid.x.centers
    if grid.y is not None:
        xx = x[:, None]
        yy = grid.y.centers[None, :]
        drift_b = (sp.lambda2 / sp.m) * (xx - consensus) + (sp.lambda1 / sp.m) * (xx - yy)
        diff_c = (sp.sigma2**2 * (xx - consensus) ** 2 + sp.sigma1**2 * (xx - yy) ** 2) / (2.0 * sp.m**2)
    else:
        drift_b = (sp.lambda2 / sp.m) * (x - consensus)
        diff_c = (sp.sigma2**2 * (x - consensus) ** 2) / (2.0 * sp.m**2)

    nv = grid.v.n
    dv = grid.v.spacing
    f2 = field.values.reshape(-1, nv)
    n_cols = f2.shape[0]
    speed = (sp.gamma / sp.m) * grid.v.interfaces[None, 1:-1] + drift_b.reshape(n_cols, 1)
    e = diff_c.reshape(n_cols, 1) / dv
    diffusive = np.broadcast_to(e > 0.0, np.broadcast_shapes(e.shape, speed.shape))
    peclet = np.where(diffusive, speed, 0.0) / np.where(e > 0.0, e, 1.0)
    # weight of the lower cell in each interior flux; the upper-cell weight
    # follows from flux consistency (alpha + beta = speed)
    alpha_if = np.where(diffusive, -e * bernoulli_ratio(peclet), np.minimum(speed, 0.0))
    beta_if = speed - alpha_if

    zeros = np.zeros((n_cols, 1))
    m_sub = np.concatenate([zeros, -alpha_if], axis=1) / dv
    m_dia = (np.concatenate([alpha_if, zeros], axis=1) - np.concatenate([zeros, beta_if], axis=1)) / dv
    m_sup = np.concatenate([beta_if, zeros], axis=1) / dv

    if theta < 1.0:
        flux = alpha_if * f2[:, :-1] + beta_if * f2[:, 1:]
        div = (np.concatenate([flux, zeros], axis=1) - np.concatenate([zeros, flux], axis=1)) / dv
        rhs = f2 + ((1.0 - theta) * dt) * div
    else:
        rhs = f2
    out = solve_tridiagonal(-theta * dt * m_sub, 1.0 - theta * dt * m_dia, -theta * dt * m_sup, rhs)
    return DensityField(grid, out.reshape(field.values.shape), field.time)


def memory_advection_y_step(field: DensityField, params: MeanFieldParams, dt: float, switch_values=None) -> DensityField:
    """Advect the memory coordinate with speed nu (x - y) S(x, y).

    A conservative Lax-Wendroff sweep along y with zero inflow; the speed
    vanishes on the x = y diagonal and wherever the switch saturates to
    zero, leaving the field unchanged there.  ``switch_values`` overrides
    the switch factor (broadcast over the (x, y) plane), e.g. to freeze
    it for linear-advection checks.
    """
    grid = field.grid
    if grid.y is None:
        raise ValueError("memory advection requires a y-axis")
    switch = params.switch_xy if switch_values is None else np.broadcast_to(switch_values, (grid.x.n, grid.y.n))
    speed = params.solver.nu * (grid.x.centers[:, None] - grid.y.centers[None, :]) * switch
    if grid.v is not None:
        moved = np.moveaxis(field.values, 1, -1)  # (nx, nv, ny)
        advected = lax_wendroff_step(moved, speed[:, None, :], grid.y.spacing, dt, boundary="zero")
        out = np.moveaxis(advected, -1, 1)
    else:
        out = lax_wendroff_step(field.values, speed, grid.y.spacing, dt, boundary="zero")
    return DensityField(grid, out, field.time)


def mf_pso_step(field: DensityField, params: MeanFieldParams) -> DensityField:
    """One full kinetic step of length grid.dt by dimensional splitting.

    The consensus is recomputed once per step: at the step start for Lie
    splitting, after the leading half sub-steps for Strang (the marginals
    only move in those sub-flows, so that is the midpoint value).  Strang
    pairs the symmetric composition with Crank-Nicolson in v.
    """
    if params.solver.mode not in _KINETIC_MODES:
        raise ValueError(f"mf_pso_step requires a kinetic mode, got {params.solver.mode.value}")
    if field.grid != params.grid:
        raise ValueError("field and params disagree on the grid")
    dt = field.grid.dt
    memory = params.solver.mode.has_memory
    if field.grid.splitting is Splitting.LIE:
        point = params.consensus(field)
        out = transport_x_step(field, dt)
        if memory:
            out = memory_advection_y_step(out, params, dt)
        out = fokker_planck_v_step(out, point, params, dt, theta=1.0)
    else:
        out = transport_x_step(field, 0.5 * dt)
        if memory:
            out = memory_advection_y_step(out, params, 0.5 * dt)
        point = params.consensus(out)
        out = fokker_planck_v_step(out, point, params, dt, theta=0.5)
        if memory:
            out = memory_advection_y_step(out, params, 0.5 * dt)
        out = transport_x_step(out, 0.5 * dt)
    out.time = field.time + dt
    return out


def maxwellian_profile(x: float, consensus: float, params, v_axis, epsilon: float = None) -> np.ndarray:
    """The local equilibrium profile in v at position x, discretized.

    A mean-zero Gaussian with variance sigma2^2 (x - consensus)^2 /
    (2 epsilon), normalized to quadrature mass 1 on the v-cells.
    ``epsilon`` defaults to m gamma, the balance at which the profile is
    stationary for the pure friction-diffusion column; at x = consensus
    the width degenerates and the mass is returned in the cell nearest
    v = 0.  ``params`` may be the solver coefficients or the bound
    mean-field parameters.
    """
    sp = getattr(params, "solver", params)
    if epsilon is None:
        epsilon = sp.m * sp.gamma
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive; pass it explicitly when m (1 - m) vanishes")
    centers = v_axis.centers
    dv = v_axis.spacing
    variance = sp.sigma2**2 * (x - consensus) ** 2 / (2.0 * epsilon)
    if variance == 0.0:
        profile = np.zeros(v_axis.n)
        profile[int(np.argmin(np.abs(centers)))] = 1.0 / dv
        return profile
    profile = np.exp(-0.5 * centers**2 / variance)
    return profile / (profile.sum() * dv)
