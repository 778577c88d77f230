"""Integrator unit tests against closed-form oracles."""

import math

import numpy as np
import pytest

from learnsim import (
    IntegratorConfig,
    ModelParams,
    SimulationError,
    TeachingControl,
    derivatives_four,
    integrate,
    load_builtin_config,
    run_config,
    step,
)


def decay(z, t):
    return -z


def zero_dynamics(z, t):
    return np.zeros_like(z)


class TestStep:
    def test_zero_dynamics_is_identity(self):
        z = np.array([1.0, 2.0, 3.0])
        out, clamped = step(z, zero_dynamics, 0.0, IntegratorConfig(dt=0.5))
        np.testing.assert_array_equal(out, z)
        assert clamped == 0

    def test_rk4_decay_against_closed_form(self):
        out, _ = step(np.array([1.0]), decay, 0.0, IntegratorConfig(dt=0.1))
        assert out[0] == pytest.approx(math.exp(-0.1), abs=1e-6)

    def test_euler_decay_exact_value(self):
        out, _ = step(np.array([1.0]), decay, 0.0, IntegratorConfig(dt=0.1, method="euler"))
        assert out[0] == 0.9

    def test_rk4_beats_euler(self):
        exact = math.exp(-0.1)
        rk4, _ = step(np.array([1.0]), decay, 0.0, IntegratorConfig(dt=0.1))
        euler, _ = step(np.array([1.0]), decay, 0.0, IntegratorConfig(dt=0.1, method="euler"))
        assert abs(rk4[0] - exact) < abs(euler[0] - exact)

    def test_clamping_counts_undershoot(self):
        plunge = lambda z, t: np.array([-10.0])  # noqa: E731
        out, clamped = step(np.array([0.05]), plunge, 0.0, IntegratorConfig(dt=0.1))
        assert out[0] == 0.0
        assert clamped == 1

    def test_non_finite_rates_abort_with_diagnostic(self):
        def explode(z, t):
            return np.array([math.inf])

        with pytest.raises(SimulationError, match="t=0.25"):
            step(np.array([1.0]), explode, 0.25, IntegratorConfig(dt=0.1))


class TestIntegratorConfig:
    def test_invalid_configs(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.1, method="rk45")
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.1, record_every=0)


class TestIntegrate:
    def test_degenerate_span_rejected(self):
        with pytest.raises(ValueError):
            integrate(np.ones(1), decay, 1.0, 1.0, IntegratorConfig(dt=0.1))

    def test_long_decay_matches_exponential(self):
        trace = integrate(np.ones(1), decay, 0.0, 5.0, IntegratorConfig(dt=0.01))
        assert trace.t[-1] == 5.0
        assert trace.z[-1, 0] == pytest.approx(math.exp(-5.0), abs=1e-8)

    def test_one_efolding_time_shrinks_by_e(self):
        from learnsim import gamma_from_tau

        tau = 2.5
        g = gamma_from_tau(tau)
        trace = integrate(np.ones(1), lambda z, t: -g * z, 0.0, tau, IntegratorConfig(dt=0.01))
        assert trace.z[-1, 0] == pytest.approx(1.0 / math.e, rel=1e-9)

    def test_partial_final_step_lands_exactly(self):
        trace = integrate(np.ones(1), decay, 0.0, 0.105, IntegratorConfig(dt=0.01))
        assert trace.t[-1] == 0.105
        assert trace.z[-1, 0] == pytest.approx(math.exp(-0.105), abs=1e-10)

    def test_times_strictly_increasing_and_totals_consistent(self):
        trace = integrate(
            np.array([1.0, 0.5]),
            lambda z, t: -0.3 * z,
            0.0,
            2.0,
            IntegratorConfig(dt=0.01, record_every=7),
        )
        assert np.all(np.diff(trace.t) > 0)
        np.testing.assert_allclose(trace.z_total(), trace.z.sum(axis=1), rtol=0)

    def test_record_every_thins_samples(self):
        dense = integrate(np.ones(1), decay, 0.0, 1.0, IntegratorConfig(dt=0.01))
        thin = integrate(np.ones(1), decay, 0.0, 1.0, IntegratorConfig(dt=0.01, record_every=10))
        assert len(dense) == 101
        assert len(thin) == 11

    def test_constant_control_labels(self):
        ctrl = TeachingControl(1, 3.5)
        trace = integrate(np.ones(1), zero_dynamics, 0.0, 1.0,
                          IntegratorConfig(dt=0.1), control_at=ctrl)
        assert np.all(trace.u == 3.5)
        assert np.all(trace.teaching == 1)


class TestConvergenceOrder:
    """Step-halving on a smooth four-compartment problem."""

    PARAMS = ModelParams(alphas=(0.6, 0.35, 0.25, 0.2), gammas=(0.3, 0.12, 0.05, 0.02))
    CTRL = TeachingControl(1, 8.0)

    def _final(self, dt, method):
        dynamics = lambda z, t: derivatives_four(z, self.PARAMS, self.CTRL)  # noqa: E731
        trace = integrate(
            np.array([0.5, 0.2, 0.1, 0.0]), dynamics, 0.0, 2.0,
            IntegratorConfig(dt=dt, method=method, record_every=10**6),
        )
        return trace.z[-1]

    def test_rk4_error_ratio_near_sixteen(self):
        ref = self._final(0.0025, "rk4")
        e1 = np.linalg.norm(self._final(0.08, "rk4") - ref)
        e2 = np.linalg.norm(self._final(0.04, "rk4") - ref)
        assert 8.0 <= e1 / e2 <= 32.0

    def test_euler_error_ratio_near_two(self):
        ref = self._final(0.0025, "rk4")
        e1 = np.linalg.norm(self._final(0.08, "euler") - ref)
        e2 = np.linalg.norm(self._final(0.04, "euler") - ref)
        assert 1.0 <= e1 / e2 <= 4.0


class TestCrossMethodAgreement:
    """RK4 at the shipped step agrees with a much finer Euler run."""

    @pytest.mark.parametrize("name", ["lessons_fixed", "task_staircase", "school_career"])
    def test_rk4_vs_fine_euler_final_total(self, name):
        import dataclasses

        cfg = load_builtin_config(name)
        rk4_trace = run_config(cfg)
        fine = dataclasses.replace(
            cfg,
            integrator=IntegratorConfig(dt=1e-4, method="euler", record_every=10**9),
        )
        euler_trace = run_config(fine)
        z_rk4 = rk4_trace.z_total()[-1]
        z_euler = euler_trace.z_total()[-1]
        assert z_euler == pytest.approx(z_rk4, rel=1e-4)
