import math

import numpy as np
import pytest

from qlvsim.constitutive import ExponentialTensileLaw
from qlvsim.errors import DomainError, StabilityError
from qlvsim.kernels import MaxwellParams, PronySpectrum, maxwell_relaxation
from qlvsim.network import (KernelEntry, NonlinearSpring, SpringMassSystem,
                            SystemState, elastic_energy,
                            flexibility_from_stiffness, kernel_force_history,
                            simulate, stability_check, step)


def random_spd(rng, n):
    A = rng.standard_normal((n, n))
    return A @ A.T + n * np.eye(n)


class TestStabilityCheck:
    def test_identity_passes(self):
        assert stability_check(np.eye(2)).passed

    def test_indefinite_fails_at_minor_2(self):
        result = stability_check(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert not result.passed
        assert result.first_failing_minor == 2

    def test_negative_scalar_fails_at_minor_1(self):
        result = stability_check(np.array([[-1.0]]))
        assert not result.passed
        assert result.first_failing_minor == 1

    def test_non_square_rejected(self):
        with pytest.raises(DomainError):
            stability_check(np.ones((2, 3)))

    def test_random_spd_and_planted_failures(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = int(rng.integers(2, 8))
            assert stability_check(random_spd(rng, n)).passed
        for _ in range(100):
            n = int(rng.integers(2, 8))
            K = random_spd(rng, n)
            k = int(rng.integers(1, n + 1))
            # make the k-th leading minor the first non-positive one by
            # flipping the sign of the k-th pivot in the LDL sense
            d = np.linalg.cholesky(K)
            scale = np.ones(n)
            scale[k - 1] = -1.0
            planted = d @ np.diag(scale) @ d.T
            result = stability_check(planted)
            assert not result.passed
            assert result.first_failing_minor == k


class TestFlexibility:
    def test_identity(self):
        assert np.allclose(flexibility_from_stiffness(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        C = flexibility_from_stiffness(np.diag([2.0, 4.0]))
        assert np.allclose(C, np.diag([0.5, 0.25]))

    def test_random_spd_residual(self):
        rng = np.random.default_rng(5)
        K = random_spd(rng, 5)
        C = flexibility_from_stiffness(K)
        assert np.max(np.abs(K @ C - np.eye(5))) <= 1e-10
        assert np.allclose(C, C.T, atol=1e-12)

    def test_reciprocity(self):
        rng = np.random.default_rng(6)
        K = random_spd(rng, 6)
        C = flexibility_from_stiffness(K)
        for i in range(6):
            for j in range(6):
                assert C[i, j] == pytest.approx(C[j, i], abs=1e-10)

    def test_indefinite_raises_stability_error(self):
        with pytest.raises(StabilityError) as exc:
            flexibility_from_stiffness(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert exc.value.minor_index == 2


class TestElasticEnergy:
    def test_zero_displacement(self):
        assert elastic_energy(np.diag([2.0]), np.zeros(1)) == 0.0

    def test_scalar_value(self):
        assert elastic_energy(np.diag([2.0]), np.array([3.0])) == \
            pytest.approx(9.0)

    def test_primal_equals_dual(self):
        rng = np.random.default_rng(9)
        K = random_spd(rng, 4)
        q = rng.standard_normal(4)
        # check_dual verifies 0.5 q'Kq == 0.5 Q'CQ internally to 1e-10
        elastic_energy(K, q, check_dual=True)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            elastic_energy(np.eye(2), np.zeros(3))


def harmonic_system(k=1.0, m=1.0):
    return SpringMassSystem(masses=[m], stiffness=[[k]])


class TestStep:
    def test_harmonic_oscillator_tracking(self):
        # analytic solution cos(w t); velocity-Verlet's phase error over
        # 10 periods at dt = T/1000 is w*t*(w*dt)^2/24 ~ 1.03e-4, so the
        # tracking tolerance is set just above that bound
        k = m = 1.0
        system = harmonic_system(k, m)
        w = math.sqrt(k / m)
        period = 2 * math.pi / w
        dt = period / 1000
        state = SystemState.initial(system, q=[1.0])
        worst = 0.0
        for _ in range(10 * 1000):
            state = step(system, state, dt)
            worst = max(worst, abs(state.q[0] - math.cos(w * state.time)))
        assert worst <= 1.1e-4

    def test_zero_state_fixed_point(self):
        system = harmonic_system()
        state = SystemState.initial(system)
        for _ in range(100):
            state = step(system, state, 0.01)
        assert np.all(state.q == 0.0) and np.all(state.v == 0.0)

    def test_dt_stability_bound_enforced(self):
        system = harmonic_system(k=100.0)
        state = SystemState.initial(system, q=[1.0])
        bound = system.stability_bound()
        with pytest.raises(DomainError):
            step(system, state, bound * 1.01)

    def test_second_order_convergence(self):
        system = harmonic_system()
        def max_err(dt):
            state = SystemState.initial(system, q=[1.0])
            worst = 0.0
            n = int(round(2 * math.pi / dt))
            for _ in range(n):
                state = step(system, state, dt)
                worst = max(worst, abs(state.q[0] - math.cos(state.time)))
            return worst
        assert max_err(0.01) / max_err(0.005) > 3.0


class TestKernelStep:
    def test_maxwell_kernel_reaction_tracks_relaxation(self):
        # prescribed unit step displacement; reaction force of a
        # Maxwell-type kernel must track mu*exp(-mu t/eta)
        p = MaxwellParams(mu=2.0, eta=1.0)
        spectrum = PronySpectrum(K=0.0, amplitudes=(p.mu,),
                                 frequencies=(p.mu / p.eta,))
        t = np.linspace(0.0, 3.0, 2000)
        force = kernel_force_history(spectrum, t, np.ones_like(t))
        ref = maxwell_relaxation(p, np.maximum(t, 1e-300))
        assert np.max(np.abs(force - ref)) / p.mu <= 1e-4

    def test_kernel_equilibrium_must_match_stiffness(self):
        with pytest.raises(DomainError):
            SpringMassSystem(
                masses=[1.0], stiffness=[[2.0]],
                memory_kernels=(KernelEntry(0, 0, PronySpectrum(
                    K=1.0, amplitudes=(0.5,), frequencies=(1.0,))),))

    def test_kernel_free_step_reduces_to_explicit_matrices(self):
        # one velocity-Verlet step against a hand-rolled reference
        K = np.array([[2.0, -1.0], [-1.0, 2.0]])
        beta = 0.1 * np.eye(2)
        system = SpringMassSystem(masses=[1.0, 2.0], stiffness=K,
                                  damping=beta)
        q0 = np.array([0.3, -0.2])
        v0 = np.array([0.1, 0.4])
        state = step(system, SystemState.initial(system, q=q0, v=v0), 0.01)
        m = np.array([1.0, 2.0])
        a0 = (-K @ q0 - beta @ v0) / m
        v_half = v0 + 0.005 * a0
        q1 = q0 + 0.01 * v_half
        f1 = -K @ q1
        A = np.diag(m) + 0.005 * beta
        v1 = np.linalg.solve(A, m * v_half + 0.005 * f1)
        assert np.allclose(state.q, q1, atol=1e-15)
        assert np.allclose(state.v, v1, atol=1e-15)


class TestSimulate:
    def chain(self):
        K = np.array([[2.0, -1.0, 0.0],
                      [-1.0, 2.0, -1.0],
                      [0.0, -1.0, 1.0]])
        return SpringMassSystem(masses=[1.0, 1.0, 1.0], stiffness=K)

    def test_duration_zero_returns_initial(self):
        system = self.chain()
        state = SystemState.initial(system, q=[0.1, 0.0, 0.0])
        result = simulate(system, state, duration=0.0, dt=0.01)
        assert result.times.shape == (1,)
        assert np.allclose(result.q[0], [0.1, 0.0, 0.0])

    def test_conservative_energy_drift(self):
        system = self.chain()
        state = SystemState.initial(system, q=[0.1, 0.2, 0.3])
        result = simulate(system, state, duration=50.0, dt=0.005,
                          record_stride=100)
        total = result.kinetic + result.elastic
        drift = np.max(np.abs(total - total[0])) / total[0]
        assert drift <= 1e-5

    def test_damped_energy_non_increasing(self):
        K = np.array([[2.0, -1.0], [-1.0, 2.0]])
        system = SpringMassSystem(masses=[1.0, 1.0], stiffness=K,
                                  damping=0.3 * np.eye(2))
        state = SystemState.initial(system, q=[0.5, -0.2])
        result = simulate(system, state, duration=20.0, dt=0.01,
                          record_stride=10)
        total = result.kinetic + result.elastic
        assert np.all(np.diff(total) <= 1e-12)

    def test_energy_balance_with_kernels(self):
        # mechanical energy + dissipation - external work constant to 1e-4
        K = np.array([[2.0, -1.0], [-1.0, 1.0]])
        kernel = KernelEntry(1, 1, PronySpectrum(
            K=1.0, amplitudes=(0.5,), frequencies=(2.0,)))
        amp = np.array([0.0, 0.05])
        system = SpringMassSystem(
            masses=[1.0, 1.0], stiffness=K, memory_kernels=(kernel,),
            external_force=lambda t: amp * math.sin(0.7 * t))
        state = SystemState.initial(system)
        result = simulate(system, state, duration=30.0, dt=0.002,
                          record_stride=50)
        balance = (result.kinetic + result.elastic + result.dissipation
                   - result.external_work)
        scale = max(np.max(result.kinetic + result.elastic), 1e-12)
        assert np.max(np.abs(balance - balance[0])) / scale <= 1e-4

    def test_dt_violation_raises(self):
        system = self.chain()
        state = SystemState.initial(system)
        with pytest.raises(DomainError):
            simulate(system, state, duration=1.0, dt=10.0)


class TestNonlinearSpring:
    def test_static_tension(self):
        law = ExponentialTensileLaw(B=1.0, C=1.0)
        spring = NonlinearSpring(i=0, j=None, law=law, rest_length=1.0)
        q = np.array([0.2])
        assert spring.elastic_force(q) == pytest.approx(law.stress(1.2))

    def test_relaxing_spring_force_decays(self):
        law = ExponentialTensileLaw(B=1.0, C=1.0)
        kernel = PronySpectrum(K=0.5, amplitudes=(0.5,), frequencies=(5.0,))
        spring = NonlinearSpring(i=0, j=None, law=law, kernel=kernel)
        system = SpringMassSystem(masses=[1.0], stiffness=[[0.0]],
                                  nonlinear_springs=(spring,))
        # hold the mass fixed by a large opposing mass approximation:
        # instead, verify via the spring's own hereditary response
        t = np.linspace(0.0, 2.0, 500)
        te = np.full_like(t, law.stress(1.2))
        force = kernel_force_history(kernel, t, te)
        assert force[0] == pytest.approx(law.stress(1.2))
        assert force[-1] == pytest.approx(0.5 * law.stress(1.2), rel=1e-3)

    def test_unnormalized_kernel_rejected(self):
        law = ExponentialTensileLaw(B=1.0, C=1.0)
        with pytest.raises(DomainError):
            NonlinearSpring(i=0, j=None, law=law,
                            kernel=PronySpectrum(K=2.0))
