"""Particle dynamics: one-step oracles, invariants, and full runs."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from swarmkit.bench import StopRule
from swarmkit.objectives import ObjectiveSpec, evaluate_batch
from swarmkit.swarm import (
    Boundary,
    Mode,
    NoiseKind,
    SolverParams,
    apply_boundary,
    draw_noise,
    init_state,
    run,
    step_cbo,
    step_cbo_local_best,
    step_discrete_pso,
    step_sdpso_memory,
    step_sdpso_no_memory,
    tracked_consensus,
)

ABS1 = ObjectiveSpec(name="Schwefel", dim=1)
ABS2 = ObjectiveSpec(name="Schwefel", dim=2)


class QueuedRng:
    """Hands out pre-recorded uniform draws, in order."""

    def __init__(self, arrays):
        self._queue = list(arrays)

    def random(self, shape):
        out = np.asarray(self._queue.pop(0), dtype=float)
        assert out.shape == tuple(shape)
        return out


def fresh_state(params, objective, n, seed=0, **kw):
    return init_state(params, objective, n, np.random.default_rng(seed), **kw)


class TestInertialStep:
    def test_single_particle_substitution(self):
        # m=1, dt=1: the implicit divisor is m + (1-m)dt = 1, so one step
        # reads V' = V + lambda2*(consensus - X), X' = X + V'.
        params = SolverParams(
            mode=Mode.SDPSO_NO_MEMORY, m=1.0, lambda2=1.0, sigma2=0.0, dt=1.0
        )
        state = fresh_state(params, ABS1, 1, init_box=(0.0, 0.0))
        out = step_sdpso_no_memory(
            state, params, ABS1, np.random.default_rng(0), consensus_point=np.array([2.0])
        )
        assert out.V[0, 0] == 2.0
        assert out.X[0, 0] == 2.0

    def test_free_streaming(self):
        params = SolverParams(
            mode=Mode.SDPSO_NO_MEMORY, m=1.0, lambda2=0.0, sigma2=0.0, dt=0.5
        )
        state = fresh_state(params, ABS2, 4, init_box=(-2.0, 2.0))
        state.V = np.arange(8.0).reshape(4, 2)
        x0 = state.X.copy()
        v0 = state.V.copy()
        rng = np.random.default_rng(1)
        for k in range(1, 4):
            state = step_sdpso_no_memory(state, params, ABS2, rng)
            assert np.array_equal(state.V, v0)
            assert np.allclose(state.X, x0 + 0.5 * k * v0, atol=1e-14)

    def test_coincident_ensemble_is_fixed_point(self):
        params = SolverParams(mode=Mode.SDPSO_NO_MEMORY, m=0.3, lambda2=1.0, sigma2=1.0)
        state = fresh_state(params, ABS2, 8, init_box=(1.5, 1.5))
        out = step_sdpso_no_memory(state, params, ABS2, np.random.default_rng(2))
        assert np.array_equal(out.X, np.full((8, 2), 1.5))
        assert np.array_equal(out.V, np.zeros((8, 2)))

    def test_zero_inertia_step_matches_cbo(self):
        # The semi-implicit update is asymptotic-preserving: at m=0 it is
        # algebraically the plain consensus step, so paired runs from one
        # seed agree to a few ulps.
        ap = SolverParams(mode=Mode.SDPSO_NO_MEMORY, m=0.0, lambda2=1.0, sigma2=0.7)
        cb = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=0.7)
        s_ap = fresh_state(ap, ABS2, 16, seed=5)
        s_cb = fresh_state(cb, ABS2, 16, seed=5)
        point = np.array([0.5, -0.25])
        s_ap = step_sdpso_no_memory(
            s_ap, ap, ABS2, np.random.default_rng(6), consensus_point=point
        )
        s_cb = step_cbo(s_cb, cb, ABS2, np.random.default_rng(6), consensus_point=point)
        tol = 4.0 * np.spacing(np.abs(s_cb.X).max())
        assert np.abs(s_ap.X - s_cb.X).max() <= tol


class TestCboStep:
    def test_single_particle_drift(self):
        params = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=0.0, dt=0.01)
        state = fresh_state(params, ABS1, 1, init_box=(0.0, 0.0))
        out = step_cbo(
            state, params, ABS1, np.random.default_rng(0), consensus_point=np.array([2.0])
        )
        assert out.X[0, 0] == 0.02

    def test_diameter_contracts_by_drift_factor(self):
        params = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=0.0, dt=0.01)
        state = fresh_state(params, ABS1, 6, seed=3)
        x0 = state.X.copy()
        point = np.array([0.5])
        out = step_cbo(state, params, ABS1, np.random.default_rng(4), consensus_point=point)
        expected = x0 + 0.01 * (point - x0)
        assert np.allclose(out.X, expected, rtol=1e-15)
        d0 = x0.max() - x0.min()
        d1 = out.X.max() - out.X.min()
        assert d1 == pytest.approx(0.99 * d0, rel=1e-13)

    def test_zero_noise_keeps_coincident_ensemble(self):
        params = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=1.0)
        state = fresh_state(params, ABS2, 5, init_box=(-0.75, -0.75))
        out = step_cbo(state, params, ABS2, np.random.default_rng(7))
        assert np.array_equal(out.X, np.full((5, 2), -0.75))


class TestMemoryStep:
    @staticmethod
    def _memory_params(**kw):
        base = dict(
            mode=Mode.SDPSO_MEMORY,
            m=0.5,
            lambda1=0.0,
            lambda2=0.0,
            sigma1=0.0,
            sigma2=0.0,
            nu=2.0,
            dt=0.25,
            beta=3e3,
        )
        base.update(kw)
        return SolverParams(**base)

    def test_switch_on_replaces_memory_with_position(self):
        # nu*dt = 0.5 and a saturated switch of 2 move memory all the way.
        params = self._memory_params()
        state = fresh_state(params, ABS1, 3, init_box=(0.5, 0.5))
        state.Y = np.array([[5.0], [3.0], [0.5]])
        out = step_sdpso_memory(state, params, ABS1, np.random.default_rng(0))
        assert np.allclose(out.Y[:2], 0.5, atol=1e-14)

    def test_switch_off_keeps_memory(self):
        params = self._memory_params()
        state = fresh_state(params, ABS1, 2, init_box=(4.0, 4.0))
        state.Y = np.array([[0.25], [1.0]])
        y0 = state.Y.copy()
        out = step_sdpso_memory(state, params, ABS1, np.random.default_rng(0))
        assert np.array_equal(out.Y, y0)

    def test_saturated_memory_cost_never_increases(self):
        rng = np.random.default_rng(11)
        params = self._memory_params()
        for _ in range(20):
            state = fresh_state(params, ABS2, 10, seed=int(rng.integers(1 << 30)))
            state.Y = rng.uniform(-5, 5, size=(10, 2))
            gap = np.abs(
                evaluate_batch(ABS2, state.X) - evaluate_batch(ABS2, state.Y)
            )
            if gap.min() < 0.05:
                continue
            cost_before = evaluate_batch(ABS2, state.Y)
            out = step_sdpso_memory(state, params, ABS2, np.random.default_rng(1))
            cost_after = evaluate_batch(ABS2, out.Y)
            assert np.all(cost_after <= cost_before + 1e-12)

    def test_local_best_memory_stays_on_segment(self):
        params = SolverParams(
            mode=Mode.CBO_LOCAL_BEST,
            lambda1=0.4,
            lambda2=1.0,
            sigma1=0.2,
            sigma2=0.5,
            nu=2.0,
            dt=0.25,
        )
        state = fresh_state(params, ABS2, 12, seed=13)
        state.Y = np.random.default_rng(14).uniform(-5, 5, size=(12, 2))
        y0 = state.Y.copy()
        out = step_cbo_local_best(state, params, ABS2, np.random.default_rng(15))
        lo = np.minimum(y0, out.X) - 1e-12
        hi = np.maximum(y0, out.X) + 1e-12
        assert np.all(out.Y >= lo) and np.all(out.Y <= hi)


class TestDiscretePso:
    def test_forced_draw_oracle(self):
        params = SolverParams(
            mode=Mode.DISCRETE_PSO, m=0.9, lambda1=0.5, lambda2=0.5, dt=1.0
        )
        state = fresh_state(params, ABS1, 1, init_box=(0.0, 0.0))
        state.V = np.array([[1.0]])
        state.Y = np.array([[2.0]])
        state.cost_Y = np.array([2.0])
        state.best_point = np.array([4.0])
        state.best_cost = 4.0
        rng = QueuedRng([np.array([[0.25]]), np.array([[0.75]])])
        out = step_discrete_pso(state, params, ABS1, rng)
        # V' = 0.9*1 + 1.0*0.25*(2-0) + 1.0*0.75*(4-0) = 4.4, X' = 0 + V'.
        assert out.V[0, 0] == pytest.approx(4.4, abs=1e-15)
        assert out.X[0, 0] == pytest.approx(4.4, abs=1e-15)
        # |4.4| does not improve on |0|: memory stays, global best catches
        # up to the best memory.
        assert out.Y[0, 0] == 2.0
        assert out.best_point[0] == 2.0
        assert out.best_cost == 2.0

    def test_one_step_matches_inertial_memory_solver(self):
        # With dt=1, scaled uniform noise, sigma_k = lambda_k/sqrt(3), a
        # huge consensus weight, and nu*dt = 1/2, the inertial memory
        # update reproduces classical PSO draw for draw from a common
        # initial state.
        c1, c2 = 0.9, 1.3
        discrete = SolverParams(
            mode=Mode.DISCRETE_PSO, m=0.7, lambda1=c1 / 2, lambda2=c2 / 2, dt=1.0
        )
        sde = SolverParams(
            mode=Mode.SDPSO_MEMORY,
            m=0.7,
            lambda1=c1 / 2,
            lambda2=c2 / 2,
            sigma1=c1 / (2 * np.sqrt(3.0)),
            sigma2=c2 / (2 * np.sqrt(3.0)),
            alpha=1e8,
            beta=3e3,
            nu=0.5,
            dt=1.0,
            noise=NoiseKind.UNIFORM,
            pso_constraint=True,
        )
        obj = ObjectiveSpec(name="Rastrigin", dim=3)
        s_d = fresh_state(discrete, obj, 8, seed=21)
        s_m = fresh_state(sde, obj, 8, seed=21)
        assert np.array_equal(s_d.X, s_m.X)
        s_d = step_discrete_pso(s_d, discrete, obj, np.random.default_rng(22))
        s_m = step_sdpso_memory(s_m, sde, obj, np.random.default_rng(22))
        assert np.allclose(s_d.V, s_m.V, rtol=1e-12, atol=1e-12)
        assert np.allclose(s_d.X, s_m.X, rtol=1e-12, atol=1e-12)
        assert np.allclose(s_d.Y, s_m.Y, rtol=1e-12, atol=1e-12)


class TestBoundaryAndNoise:
    def test_clamp_pulls_back_to_edge(self):
        params = SolverParams(mode=Mode.CBO, boundary=Boundary.CLAMP, box=(-3.0, 3.0))
        state = fresh_state(params, ABS1, 1, init_box=(0.0, 0.0))
        state.X = np.array([[3.7]])
        apply_boundary(state, params.box)
        assert state.X[0, 0] == 3.0

    def test_clamp_matches_clip(self):
        rng = np.random.default_rng(31)
        params = SolverParams(mode=Mode.CBO, boundary=Boundary.CLAMP, box=(-1.0, 2.0))
        state = fresh_state(params, ABS2, 20, seed=32)
        state.X = rng.uniform(-4, 4, size=(20, 2))
        expected = np.clip(state.X, -1.0, 2.0)
        apply_boundary(state, params.box)
        assert np.array_equal(state.X, expected)

    @pytest.mark.parametrize("kind", [NoiseKind.GAUSSIAN, NoiseKind.UNIFORM])
    def test_noise_is_standardized(self, kind):
        n = 1_000_000
        draws = draw_noise(np.random.default_rng(33), kind, (n,))
        assert abs(draws.mean()) < 4.0 / np.sqrt(n)
        assert abs(draws.var() - 1.0) < 10.0 / np.sqrt(n)

    def test_uniform_noise_bounds(self):
        draws = draw_noise(np.random.default_rng(34), NoiseKind.UNIFORM, (100_000,))
        root3 = np.sqrt(3.0)
        assert draws.min() >= -root3 and draws.max() <= root3


class TestInitAndTracking:
    def test_init_positions_in_box_velocity_zero(self):
        params = SolverParams(mode=Mode.SDPSO_NO_MEMORY)
        state = fresh_state(params, ABS2, 50, init_box=(-1.0, 1.0))
        assert np.all(state.X >= -1.0) and np.all(state.X <= 1.0)
        assert np.array_equal(state.V, np.zeros((50, 2)))
        assert state.Y is None

    def test_init_velocity_interval(self):
        params = SolverParams(mode=Mode.SDPSO_NO_MEMORY)
        state = fresh_state(params, ABS2, 50, init_velocity=(-0.5, 0.5))
        assert np.all(np.abs(state.V) <= 0.5)
        assert state.V.std() > 0.0

    def test_memory_starts_at_positions(self):
        params = SolverParams(mode=Mode.SDPSO_MEMORY, lambda1=0.1, sigma1=0.1, m=0.5)
        state = fresh_state(params, ABS2, 10)
        assert np.array_equal(state.Y, state.X)
        assert state.Y is not state.X

    def test_tracked_consensus_discrete_is_global_best(self):
        params = SolverParams(mode=Mode.DISCRETE_PSO, lambda1=0.5, lambda2=0.5)
        state = fresh_state(params, ABS2, 10, seed=41)
        out = tracked_consensus(state, params, ABS2)
        assert np.array_equal(out, state.best_point)

    def test_tracked_consensus_memory_mode_weights_memory(self):
        params = SolverParams(
            mode=Mode.SDPSO_MEMORY, m=0.5, lambda1=0.1, sigma1=0.1, alpha=1e8
        )
        state = fresh_state(params, ABS1, 5, seed=42)
        state.Y = np.array([[3.0], [0.125], [2.0], [1.0], [4.0]])
        out = tracked_consensus(state, params, ABS1)
        assert out == pytest.approx([0.125], abs=1e-12)


class TestRun:
    def test_same_seed_reproduces_report(self):
        params = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=0.5, alpha=50.0)
        stop = StopRule(max_iter=40, n_stall=10)
        a = run(params, ABS2, stop, seed=7, n_particles=20, record_trajectory=True)
        b = run(params, ABS2, stop, seed=7, n_particles=20, record_trajectory=True)
        assert np.array_equal(a.final_consensus, b.final_consensus)
        assert a.iterations == b.iterations
        assert a.stop_reason == b.stop_reason
        assert np.array_equal(a.trajectory, b.trajectory)

    def test_zero_iteration_run_reports_initial_consensus(self):
        params = SolverParams(mode=Mode.CBO, lambda2=1.0, sigma2=0.5, alpha=50.0)
        report = run(params, ABS2, StopRule(max_iter=0), seed=9, n_particles=15)
        assert report.iterations == 0
        assert report.stop_reason == "max_iter"
        state = fresh_state(params, ABS2, 15, seed=9)
        assert np.array_equal(
            report.final_consensus, tracked_consensus(state, params, ABS2)
        )

    def test_frozen_dynamics_stall_after_exactly_n_stall(self):
        # lambda = sigma = 0 freezes every particle, so the consensus never
        # moves and the stall counter runs out on schedule.
        params = SolverParams(mode=Mode.CBO, lambda2=0.0, sigma2=0.0)
        stop = StopRule(n_stall=37, max_iter=500)
        report = run(params, ABS2, stop, seed=10, n_particles=8)
        assert report.stop_reason == "stalled"
        assert report.iterations == 37

    def test_moving_consensus_reaches_max_iter(self):
        # Weak drift plus strong multiplicative noise on a wide ensemble
        # keeps the mean jumping far above the stall threshold.
        params = SolverParams(mode=Mode.CBO, lambda2=0.1, sigma2=5.0, alpha=0.0)
        stop = StopRule(n_stall=5, max_iter=30)
        report = run(params, ABS2, stop, seed=11, n_particles=10)
        assert report.stop_reason == "max_iter"
        assert report.iterations == 30


class TestParamsValidation:
    def test_inertia_range(self):
        with pytest.raises(ValueError):
            SolverParams(mode=Mode.SDPSO_NO_MEMORY, m=1.5)
        with pytest.raises(ValueError):
            SolverParams(mode=Mode.SDPSO_NO_MEMORY, m=-0.1)

    def test_time_step_positive(self):
        with pytest.raises(ValueError):
            SolverParams(mode=Mode.CBO, dt=0.0)

    def test_no_memory_modes_reject_memory_coefficients(self):
        with pytest.raises(ValueError):
            SolverParams(mode=Mode.CBO, lambda1=0.5)
        with pytest.raises(ValueError):
            SolverParams(mode=Mode.SDPSO_NO_MEMORY, sigma1=0.5)

    def test_clamp_requires_box(self):
        with pytest.raises(ValueError):
            SolverParams(mode=Mode.CBO, boundary=Boundary.CLAMP)

    def test_pso_constraint_checks_noise_scaling(self):
        with pytest.raises(ValueError):
            SolverParams(
                mode=Mode.SDPSO_MEMORY,
                m=0.5,
                lambda1=0.5,
                lambda2=0.5,
                sigma1=0.5,
                sigma2=0.5,
                pso_constraint=True,
            )

    def test_gamma_complements_inertia(self):
        assert SolverParams(mode=Mode.CBO).gamma == 1.0
        assert SolverParams(mode=Mode.SDPSO_NO_MEMORY, m=0.25).gamma == 0.75
