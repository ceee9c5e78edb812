"""Particle-level swarm dynamics under one stepping interface.

Five modes are provided:

* ``DISCRETE_PSO``: the classical iteration with inertia weight m and
  acceleration coefficients c_k = 2 lambda_k,

      v <- m v + c1 R1 (y - x) + c2 R2 (ybar - x),    x <- x + v,

  with per-particle local bests y and a running global best ybar.
* ``SDPSO_NO_MEMORY`` / ``SDPSO_MEMORY``: semi-implicit Euler-Maruyama steps
  of the second-order stochastic systems, where the velocity update is
  implicit in v (friction gamma = 1 - m) and the attraction points are the
  exponentially weighted consensus of positions (no memory) or of the local
  bests (memory).
* ``CBO`` / ``CBO_LOCAL_BEST``: the corresponding first-order consensus
  dynamics, which the SD-PSO steps reproduce exactly at m = 0, gamma = 1
  (asymptotic-preserving property).

A step is a barrier-synchronized map over the ensemble: the consensus point
is computed once from the frozen previous state, then all particles update
independently (vectorized over the N x d arrays).
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .consensus import ConsensusParams, MemorySwitchParams, weighted_consensus, memory_switch
from .objectives import ObjectiveSpec, evaluate_batch

if TYPE_CHECKING:
    from .bench import StopRule

__all__ = [
    "Mode",
    "NoiseKind",
    "Boundary",
    "SolverParams",
    "SwarmState",
    "RunReport",
    "draw_noise",
    "init_state",
    "apply_boundary",
    "tracked_consensus",
    "step_discrete_pso",
    "step_sdpso_no_memory",
    "step_sdpso_memory",
    "step_cbo",
    "step_cbo_local_best",
    "run",
    "run_snapshots",
]


class Mode(enum.Enum):
    DISCRETE_PSO = "discrete_pso"
    SDPSO_NO_MEMORY = "sdpso_no_memory"
    SDPSO_MEMORY = "sdpso_memory"
    CBO = "cbo"
    CBO_LOCAL_BEST = "cbo_local_best"

    @property
    def has_velocity(self) -> bool:
        return self in (Mode.DISCRETE_PSO, Mode.SDPSO_NO_MEMORY, Mode.SDPSO_MEMORY)

    @property
    def has_memory(self) -> bool:
        return self in (Mode.DISCRETE_PSO, Mode.SDPSO_MEMORY, Mode.CBO_LOCAL_BEST)


class NoiseKind(enum.Enum):
    #: standard normal draws
    GAUSSIAN = "gaussian"
    #: uniform on (-sqrt(3), sqrt(3)): mean 0, variance 1
    UNIFORM = "uniform"


class Boundary(enum.Enum):
    NONE = "none"
    CLAMP = "clamp"


@dataclass(frozen=True)
class SolverParams:
    """All scalar coefficients of the particle schemes.

    ``lambda2``/``sigma2`` weight the attraction toward the consensus point
    (the regularized global best) and are used by every mode;
    ``lambda1``/``sigma1`` weight the attraction toward the particle's own
    memory and must be zero in the modes without memory.  The friction is
    tied to the inertia, gamma = 1 - m.  With ``pso_constraint`` the noise
    levels are required to satisfy sigma_k = lambda_k / sqrt(3)
    (equivalently lambda_k = c_k / 2, sigma_k = c_k / (2 sqrt 3)).
    """

    mode: Mode
    m: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 1.0
    sigma1: float = 0.0
    sigma2: float = 1.0
    alpha: float = 5.0e4
    beta: float = 3.0e3
    nu: float = 50.0
    dt: float = 0.01
    noise: NoiseKind = NoiseKind.GAUSSIAN
    boundary: Boundary = Boundary.NONE
    box: Optional[tuple[float, float]] = None
    pso_constraint: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "noise", NoiseKind(self.noise))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"inertia m must lie in [0, 1], got {self.m}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        for name in ("lambda1", "lambda2", "sigma1", "sigma2"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.mode.has_memory and (self.lambda1 != 0.0 or self.sigma1 != 0.0):
            raise ValueError(f"mode {self.mode.value} has no local-best terms; lambda1 and sigma1 must be 0")
        if self.boundary is Boundary.CLAMP:
            if self.box is None or not self.box[0] < self.box[1]:
                raise ValueError("boundary clamping requires a box with lower < upper")
        if self.pso_constraint:
            for lam, sig, k in ((self.lambda1, self.sigma1, 1), (self.lambda2, self.sigma2, 2)):
                if not math.isclose(sig, lam / math.sqrt(3.0), rel_tol=1e-12, abs_tol=1e-15):
                    raise ValueError(
                        f"pso_constraint requires sigma{k} = lambda{k}/sqrt(3), got lambda{k}={lam}, sigma{k}={sig}"
                    )

    @property
    def gamma(self) -> float:
        """Friction coefficient, tied to the inertia weight."""
        return 1.0 - self.m

    def consensus_params(self) -> ConsensusParams:
        return ConsensusParams(alpha=self.alpha)

    def switch_params(self) -> MemorySwitchParams:
        return MemorySwitchParams(beta=self.beta, nu=self.nu)


@dataclass
class SwarmState:
    """Mutable ensemble state; arrays are (N, d).

    ``V`` is present only in the second-order modes and ``Y`` only in the
    modes with memory; ``Y`` starts equal to ``X``.  ``consensus`` caches
    the attraction point used by the most recent step.  The remaining
    fields exist only for the discrete PSO bookkeeping: the cost of the
    current positions, the cost of the local bests, and the running global
    best with its cost.
    """

    X: np.ndarray
    V: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    step: int = 0
    consensus: Optional[np.ndarray] = None
    cost_X: Optional[np.ndarray] = None
    cost_Y: Optional[np.ndarray] = None
    best_point: Optional[np.ndarray] = None
    best_cost: float = math.inf

    @property
    def n_particles(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


@dataclass
class RunReport:
    """Outcome of a single seeded run."""

    final_consensus: np.ndarray
    iterations: int
    stop_reason: str  # "stalled" or "max_iter"
    wall_seconds: float
    trajectory: Optional[np.ndarray] = None  # (iterations + 1, d) consensus history


def draw_noise(rng, kind: NoiseKind, shape) -> np.ndarray:
    """One block of i.i.d. unit-variance noise of the requested kind."""
    if kind is NoiseKind.GAUSSIAN:
        return rng.standard_normal(shape)
    s = math.sqrt(3.0)
    return rng.uniform(-s, s, shape)


def init_state(
    params: SolverParams,
    objective: ObjectiveSpec,
    n_particles: int,
    rng,
    init_box: Optional[tuple[float, float]] = None,
    init_velocity="zero",
) -> SwarmState:
    """Draw the initial ensemble, uniform on ``init_box`` per coordinate.

    ``init_box`` defaults to the objective's search box.  ``init_velocity``
    is either ``"zero"`` or an interval (lo, hi) to sample velocities
    uniformly (useful when matching a phase-space density with uniform
    data).  Memory starts at the initial positions.
    """
    if n_particles < 1:
        raise ValueError(f"n_particles must be positive, got {n_particles}")
    lo, hi = init_box if init_box is not None else objective.box
    X = rng.uniform(lo, hi, (n_particles, objective.dim))
    V = None
    if params.mode.has_velocity:
        if init_velocity == "zero":
            V = np.zeros_like(X)
        else:
            vlo, vhi = init_velocity
            V = rng.uniform(vlo, vhi, X.shape)
    state = SwarmState(X=X, V=V)
    if params.mode.has_memory:
        state.Y = X.copy()
    if params.mode is Mode.DISCRETE_PSO:
        state.cost_X = evaluate_batch(objective, X)
        state.cost_Y = state.cost_X.copy()
        i = int(np.argmin(state.cost_Y))
        state.best_point = state.Y[i].copy()
        state.best_cost = float(state.cost_Y[i])
    return state


def apply_boundary(state: SwarmState, box: tuple[float, float]) -> SwarmState:
    """Project every position coordinate onto [lower, upper]; V unchanged."""
    np.clip(state.X, box[0], box[1], out=state.X)
    return state


def _clamp_if_needed(state: SwarmState, params: SolverParams) -> None:
    if params.boundary is Boundary.CLAMP:
        apply_boundary(state, params.box)


def tracked_consensus(state: SwarmState, params: SolverParams, objective: ObjectiveSpec) -> np.ndarray:
    """The attraction point the mode drifts toward, from the current state.

    Discrete PSO tracks its running global best; the memory modes take the
    weighted consensus of the local bests, the others of the positions.
    """
    if params.mode is Mode.DISCRETE_PSO:
        return state.best_point.copy()
    if params.mode in (Mode.SDPSO_MEMORY, Mode.CBO_LOCAL_BEST):
        costs = evaluate_batch(objective, state.Y)
        return weighted_consensus(state.Y, costs, params.consensus_params())
    costs = evaluate_batch(objective, state.X)
    return weighted_consensus(state.X, costs, params.consensus_params())


def _require_mode(params: SolverParams, mode: Mode) -> None:
    if params.mode is not mode:
        raise ValueError(f"step requires mode {mode.value}, params have {params.mode.value}")


def step_discrete_pso(
    state: SwarmState,
    params: SolverParams,
    objective: ObjectiveSpec,
    rng,
    consensus_point: Optional[np.ndarray] = None,
) -> SwarmState:
    """One classical PSO iteration.

    R1 and R2 are diagonal uniform [0,1] draws per particle and coordinate
    (R1 first).  The local best is replaced by the new position exactly
    when it improves on the cost of the previous position; the global best
    is the running minimum over all local bests and its own history.
    """
    _require_mode(params, Mode.DISCRETE_PSO)
    c1 = 2.0 * params.lambda1
    c2 = 2.0 * params.lambda2
    shape = state.X.shape
    r1 = rng.random(shape)
    r2 = rng.random(shape)
    state.consensus = state.best_point.copy()
    state.V *= params.m
    state.V += c1 * r1 * (state.Y - state.X)
    state.V += c2 * r2 * (state.best_point - state.X)
    state.X += state.V
    _clamp_if_needed(state, params)
    new_cost = evaluate_batch(objective, state.X)
    improved = new_cost < state.cost_X
    state.Y[improved] = state.X[improved]
    state.cost_Y = np.where(improved, new_cost, state.cost_Y)
    state.cost_X = new_cost
    i = int(np.argmin(state.cost_Y))
    if state.cost_Y[i] < state.best_cost:
        state.best_point = state.Y[i].copy()
        state.best_cost = float(state.cost_Y[i])
    state.step += 1
    return state


def step_sdpso_no_memory(
    state: SwarmState,
    params: SolverParams,
    objective: ObjectiveSpec,
    rng,
    consensus_point: Optional[np.ndarray] = None,
) -> SwarmState:
    """Semi-implicit step of the second-order system without memory.

    With mu = m + gamma dt,

        V' = (m/mu) V + (lambda2 dt/mu)(xbar - X) + (sigma2 sqrt(dt)/mu)(xbar - X) theta
        X' = X + dt V',

    the noise acting componentwise.  ``consensus_point`` may carry the
    precomputed weighted consensus of the current positions.
    """
    _require_mode(params, Mode.SDPSO_NO_MEMORY)
    if consensus_point is None:
        consensus_point = tracked_consensus(state, params, objective)
    mu = params.m + params.gamma * params.dt
    diff = consensus_point - state.X
    theta = draw_noise(rng, params.noise, state.X.shape)
    state.V *= params.m / mu
    state.V += (params.lambda2 * params.dt / mu) * diff
    state.V += (params.sigma2 * math.sqrt(params.dt) / mu) * diff * theta
    state.X += params.dt * state.V
    _clamp_if_needed(state, params)
    state.consensus = np.asarray(consensus_point, dtype=float).copy()
    state.step += 1
    return state


def step_sdpso_memory(
    state: SwarmState,
    params: SolverParams,
    objective: ObjectiveSpec,
    rng,
    consensus_point: Optional[np.ndarray] = None,
) -> SwarmState:
    """Semi-implicit step of the second-order system with memory.

    Sub-updates, in order: the consensus of the local bests is frozen, the
    velocity update uses the old memory (two independent noise blocks,
    theta1 drawn before theta2), positions advance, and finally the memory
    relaxes toward the new positions at rate nu gated by the smooth switch.
    """
    _require_mode(params, Mode.SDPSO_MEMORY)
    cost_mem = evaluate_batch(objective, state.Y)
    if consensus_point is None:
        consensus_point = weighted_consensus(state.Y, cost_mem, params.consensus_params())
    mu = params.m + params.gamma * params.dt
    diff1 = state.Y - state.X
    diff2 = consensus_point - state.X
    theta1 = draw_noise(rng, params.noise, state.X.shape)
    theta2 = draw_noise(rng, params.noise, state.X.shape)
    sqdt = math.sqrt(params.dt)
    state.V *= params.m / mu
    state.V += (params.lambda1 * params.dt / mu) * diff1
    state.V += (params.lambda2 * params.dt / mu) * diff2
    state.V += (params.sigma1 * sqdt / mu) * diff1 * theta1
    state.V += (params.sigma2 * sqdt / mu) * diff2 * theta2
    state.X += params.dt * state.V
    _clamp_if_needed(state, params)
    switch = memory_switch(evaluate_batch(objective, state.X), cost_mem, params.switch_params())
    state.Y += (params.nu * params.dt) * (state.X - state.Y) * switch[:, None]
    state.consensus = np.asarray(consensus_point, dtype=float).copy()
    state.step += 1
    return state


def step_cbo(
    state: SwarmState,
    params: SolverParams,
    objective: ObjectiveSpec,
    rng,
    consensus_point: Optional[np.ndarray] = None,
) -> SwarmState:
    """Euler-Maruyama step of the first-order consensus dynamic,

        X' = X + dt lambda2 (xbar - X) + sqrt(dt) sigma2 (xbar - X) theta.
    """
    _require_mode(params, Mode.CBO)
    if consensus_point is None:
        consensus_point = tracked_consensus(state, params, objective)
    diff = consensus_point - state.X
    theta = draw_noise(rng, params.noise, state.X.shape)
    state.X += params.dt * params.lambda2 * diff
    state.X += math.sqrt(params.dt) * params.sigma2 * diff * theta
    _clamp_if_needed(state, params)
    state.consensus = np.asarray(consensus_point, dtype=float).copy()
    state.step += 1
    return state


def step_cbo_local_best(
    state: SwarmState,
    params: SolverParams,
    objective: ObjectiveSpec,
    rng,
    consensus_point: Optional[np.ndarray] = None,
) -> SwarmState:
    """First-order consensus step with memory.

    The position update carries both the (Y - X) and the (ybar - X) drift
    and noise terms in Euler-Maruyama form; the memory then relaxes toward
    the new positions as in the second-order memory step.
    """
    _require_mode(params, Mode.CBO_LOCAL_BEST)
    cost_mem = evaluate_batch(objective, state.Y)
    if consensus_point is None:
        consensus_point = weighted_consensus(state.Y, cost_mem, params.consensus_params())
    diff1 = state.Y - state.X
    diff2 = consensus_point - state.X
    theta1 = draw_noise(rng, params.noise, state.X.shape)
    theta2 = draw_noise(rng, params.noise, state.X.shape)
    sqdt = math.sqrt(params.dt)
    state.X += params.dt * params.lambda1 * diff1
    state.X += params.dt * params.lambda2 * diff2
    state.X += sqdt * params.sigma1 * diff1 * theta1
    state.X += sqdt * params.sigma2 * diff2 * theta2
    _clamp_if_needed(state, params)
    switch = memory_switch(evaluate_batch(objective, state.X), cost_mem, params.switch_params())
    state.Y += (params.nu * params.dt) * (state.X - state.Y) * switch[:, None]
    state.consensus = np.asarray(consensus_point, dtype=float).copy()
    state.step += 1
    return state


STEP_FUNCTIONS = {
    Mode.DISCRETE_PSO: step_discrete_pso,
    Mode.SDPSO_NO_MEMORY: step_sdpso_no_memory,
    Mode.SDPSO_MEMORY: step_sdpso_memory,
    Mode.CBO: step_cbo,
    Mode.CBO_LOCAL_BEST: step_cbo_local_best,
}


def run(
    params: SolverParams,
    objective: ObjectiveSpec,
    stop: "StopRule",
    seed,
    n_particles: int,
    init_box: Optional[tuple[float, float]] = None,
    init_velocity="zero",
    record_trajectory: bool = False,
) -> RunReport:
    """Iterate the mode's step until the stop rule fires.

    The run stalls when the tracked consensus moves less than
    ``stop.delta_stall`` in total coordinatewise displacement (1-norm) for
    ``stop.n_stall`` consecutive iterations; otherwise it ends at
    ``stop.max_iter``.  The 1-norm keeps a consensus that is still jittering
    across many coordinates from being declared stalled.  Identical seeds
    give identical reports.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    state = init_state(params, objective, n_particles, rng, init_box=init_box, init_velocity=init_velocity)
    step_fn = STEP_FUNCTIONS[params.mode]
    point = tracked_consensus(state, params, objective)
    trajectory = [point.copy()] if record_trajectory else None
    stall = 0
    reason = "max_iter"
    for _ in range(stop.max_iter):
        step_fn(state, params, objective, rng, consensus_point=point)
        new_point = tracked_consensus(state, params, objective)
        if float(np.abs(new_point - point).sum()) < stop.delta_stall:
            stall += 1
        else:
            stall = 0
        point = new_point
        if record_trajectory:
            trajectory.append(point.copy())
        if stall >= stop.n_stall:
            reason = "stalled"
            break
    return RunReport(
        final_consensus=point,
        iterations=state.step,
        stop_reason=reason,
        wall_seconds=time.perf_counter() - t0,
        trajectory=np.asarray(trajectory) if record_trajectory else None,
    )


def run_snapshots(
    params: SolverParams,
    objective: ObjectiveSpec,
    times,
    seed,
    n_particles: int,
    init_box: Optional[tuple[float, float]] = None,
    init_velocity="zero",
) -> dict[float, np.ndarray]:
    """March without stopping rules and copy the positions at given times.

    Times must be nonnegative multiples of params.dt (time 0 returns the
    initial ensemble); used for density comparisons against the
    mean-field solvers.
    """
    wanted = {}
    for t in times:
        k = round(float(t) / params.dt)
        if k < 0 or abs(k * params.dt - float(t)) > 1.0e-9 * max(1.0, abs(float(t))):
            raise ValueError(f"time {t} is not a whole number of steps dt={params.dt}")
        wanted[k] = float(t)
    rng = np.random.default_rng(seed)
    state = init_state(params, objective, n_particles, rng, init_box=init_box, init_velocity=init_velocity)
    step_fn = STEP_FUNCTIONS[params.mode]
    snapshots = {}
    if 0 in wanted:
        snapshots[wanted[0]] = state.X.copy()
    if max(wanted, default=0) == 0:
        return snapshots
    point = tracked_consensus(state, params, objective)
    for n in range(1, max(wanted) + 1):
        step_fn(state, params, objective, rng, consensus_point=point)
        if n in wanted:
            snapshots[wanted[n]] = state.X.copy()
        if n < max(wanted):
            point = tracked_consensus(state, params, objective)
    return snapshots
