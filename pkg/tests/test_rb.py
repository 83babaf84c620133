"""Convection simulator: known solutions, symmetries, failure modes."""

import numpy as np
import pytest

from lrdmd import InvalidInput, SimulationBlowup
from lrdmd.rb import (
    InitCondition,
    RBConfig,
    analytic_buoyancy,
    degenerate_kappa_b,
    lorenz_init,
    simulate_fields,
    simulate_rb,
    simulate_rb_linear,
    split_state,
    taylor_decay_rate,
)

TWO_PI = 2 * np.pi


def _degenerate_ic(sigma=1.0, a_b=TWO_PI, **kw):
    return InitCondition(a_b=a_b, a_tau=TWO_PI, kappa_b=degenerate_kappa_b(sigma, a_b), **kw)


class TestInitCondition:
    def test_zero_amplitudes_zero_state(self):
        ic = InitCondition(kappa_b=0.0, kappa_tau1=0.0, kappa_tau2=0.0)
        np.testing.assert_array_equal(lorenz_init(ic, (16, 32)), np.zeros(1024))

    def test_kappa_tau2_only(self):
        ic = InitCondition(kappa_tau2=1.0)
        state = lorenz_init(ic, (16, 32))
        b, tau = split_state(state, (16, 32))
        np.testing.assert_array_equal(b, np.zeros((16, 32)))
        s2 = np.arange(32) / 32
        expected = -np.sin(TWO_PI * s2)
        for i in range(16):
            np.testing.assert_allclose(tau[i], expected, atol=1e-14)

    def test_buoyancy_mean_zero_for_periodic_wavenumber(self):
        ic = InitCondition(a_b=2 * TWO_PI, kappa_b=0.7)
        b, _ = split_state(lorenz_init(ic, (16, 32)), (16, 32))
        assert abs(np.mean(b)) <= 1e-14

    def test_rejects_nonperiodic_wavenumber(self):
        with pytest.raises(InvalidInput):
            InitCondition(a_b=1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            InitCondition(kappa_b=np.inf)


class TestTaylorVortex:
    def test_zero_initial_state_stays_zero(self):
        cfg = RBConfig()
        ic = InitCondition(kappa_b=0.0, kappa_tau1=0.0, kappa_tau2=0.0)
        states = simulate_rb(cfg, ic, 4)
        np.testing.assert_array_equal(states, np.zeros((4, 1024)))

    def test_buoyancy_matches_analytic_decay(self):
        cfg = RBConfig(sigma=1.0, nu=0.0)
        ic = _degenerate_ic(sigma=cfg.sigma, kappa_tau1=0.05, kappa_tau2=0.03)
        states = simulate_rb(cfg, ic, 11)
        for s in range(11):
            t_phys = s * cfg.dt * cfg.sample_stride
            b_sim, _ = split_state(states[s], cfg.grid)
            b_ana = analytic_buoyancy(cfg, ic, t_phys)
            rel = np.linalg.norm(b_sim - b_ana) / np.linalg.norm(b_ana)
            assert rel <= 1e-4

    def test_decay_rate_formula(self):
        assert taylor_decay_rate(2.0, TWO_PI) == pytest.approx(2.0 * (TWO_PI**2 + np.pi**2))

    def test_linear_simulator_buoyancy_is_exact(self):
        cfg = RBConfig()
        ic = _degenerate_ic(kappa_tau1=0.02)
        states = simulate_rb_linear(cfg, ic, 6)
        for s in range(6):
            t_phys = s * cfg.dt * cfg.sample_stride
            b_sim, _ = split_state(states[s], cfg.grid)
            np.testing.assert_allclose(b_sim, analytic_buoyancy(cfg, ic, t_phys), atol=1e-13)

    def test_cross_simulator_agreement(self):
        cfg = RBConfig()
        ic = _degenerate_ic(kappa_tau1=0.05, kappa_tau2=0.02)
        a = simulate_rb(cfg, ic, 7)
        b = simulate_rb_linear(cfg, ic, 7)
        for s in range(7):
            rel = np.linalg.norm(a[s] - b[s]) / max(np.linalg.norm(a[s]), 1e-300)
            assert rel <= 1e-4

    def test_temperature_forced_from_zero(self):
        cfg = RBConfig()
        ic = _degenerate_ic(kappa_tau1=0.0, kappa_tau2=0.0)
        states = simulate_rb_linear(cfg, ic, 3)
        _, tau1 = split_state(states[1], cfg.grid)
        assert np.linalg.norm(tau1) > 0


class TestDiffusionRegime:
    def test_tau_energy_non_increasing(self):
        # b = 0 forces v = 0; nu = 0: pure temperature diffusion
        cfg = RBConfig(nu=0.0)
        ic = InitCondition(kappa_b=0.0, kappa_tau1=0.08, kappa_tau2=0.05)
        states = simulate_rb(cfg, ic, 8)
        energies = [float(np.sum(split_state(states[s], cfg.grid)[1] ** 2)) for s in range(8)]
        assert all(energies[i + 1] <= energies[i] + 1e-15 for i in range(7))
        b_fields = [split_state(states[s], cfg.grid)[0] for s in range(8)]
        assert max(np.max(np.abs(b)) for b in b_fields) <= 1e-14

    def test_diffusion_rate_matches_heat_kernel(self):
        # single sine mode under pure diffusion: exact exponential decay
        cfg = RBConfig(nu=0.0)
        ic = InitCondition(kappa_b=0.0, kappa_tau1=0.0, kappa_tau2=1.0)  # -sin(2 pi s2)
        states = simulate_rb(cfg, ic, 5)
        rate = (TWO_PI) ** 2  # |k|^2 of the sin(2 pi s2) mode
        for s in range(5):
            t_phys = s * cfg.dt * cfg.sample_stride
            _, tau = split_state(states[s], cfg.grid)
            s2 = np.arange(32) / 32
            expected = -np.exp(-rate * t_phys) * np.sin(TWO_PI * s2)
            for i in range(16):
                np.testing.assert_allclose(tau[i], expected, atol=1e-10)


class TestStability:
    def test_blowup_detected_with_step_index(self):
        # grossly unstable dt for the diffusion operator
        cfg = RBConfig(sigma=1.0, nu=0.0, dt=5e-3, sample_stride=50)
        rng = np.random.default_rng(0)
        b0 = 0.1 * rng.standard_normal((16, 32))
        tau0 = 0.1 * rng.standard_normal((16, 32))
        with np.errstate(over="ignore", invalid="ignore"), pytest.raises(SimulationBlowup) as exc:
            simulate_fields(cfg, b0, tau0, 40)
        assert exc.value.step > 0

    def test_determinism(self):
        cfg = RBConfig(nu=6000.0)
        ic = _degenerate_ic(kappa_tau1=0.2, kappa_tau2=0.1)
        a = simulate_rb(cfg, ic, 5)
        b = simulate_rb(cfg, ic, 5)
        assert a.tobytes() == b.tobytes()

    def test_bad_sample_count(self):
        with pytest.raises(InvalidInput):
            simulate_rb(RBConfig(), InitCondition(), 0)
