import math

import numpy as np
import pytest

from qlvsim.constitutive import ExponentialTensileLaw, LinearElasticLaw
from qlvsim.errors import DomainError
from qlvsim.kernels import (FungSpectrum, KelvinParams, MaxwellParams,
                            PronySpectrum, prony_relaxation)
from qlvsim.qlv import (QlvModel, StrainHistory, hysteresis_ratio,
                        qlv_stress_direct, qlv_stress_fast)


def elastic_model(law=None):
    """QLV model with G identically 1."""
    law = law or LinearElasticLaw(k=2.0)
    return QlvModel.from_kernel(law, PronySpectrum(K=1.0))


class TestStrainHistory:
    def test_validation(self):
        with pytest.raises(DomainError):
            StrainHistory(times=[1.0, 2.0], values=[0.0, 0.1])  # t0 != 0
        with pytest.raises(DomainError):
            StrainHistory(times=[0.0, 1.0, 1.0], values=[0.0, 0.1, 0.2])
        with pytest.raises(DomainError):
            StrainHistory(times=[0.0, 1.0], values=[0.0, math.nan])
        with pytest.raises(DomainError):
            StrainHistory(times=[0.0, 1.0], values=[0.0, 0.1], measure="x")

    def test_green_conversion(self):
        h = StrainHistory(times=[0.0, 1.0], values=[1.0, 1.2],
                          measure="stretch")
        assert h.green() == pytest.approx([0.0, 0.22])

    def test_uniformity_detection(self):
        assert StrainHistory(times=np.linspace(0, 1, 100),
                             values=np.zeros(100)).is_uniform
        assert not StrainHistory(times=[0.0, 0.1, 0.5],
                                 values=[0.0, 0.0, 0.0]).is_uniform


class TestElasticLimit:
    def test_both_evaluators_reduce_to_elastic(self):
        rng = np.random.default_rng(2)
        t = np.linspace(0.0, 2.0, 200)
        green = 0.3 * np.abs(np.sin(1.3 * t)) + 0.01 * rng.standard_normal(200).cumsum() * 0.01
        hist = StrainHistory(times=t, values=green, measure="green")
        model = elastic_model()
        te = 2.0 * green
        for evaluator in (qlv_stress_direct, qlv_stress_fast):
            out = evaluator(model, hist)
            assert np.allclose(out.values, te, rtol=1e-12, atol=1e-14)


class TestStepResponse:
    def test_step_factorization_fast(self):
        law = ExponentialTensileLaw(B=2.0, C=1.0)
        prony = PronySpectrum(K=0.3, amplitudes=(0.3, 0.4),
                              frequencies=(0.5, 5.0))
        model = QlvModel.from_kernel(law, prony)
        t = np.linspace(0.0, 5.0, 300)
        e0 = 0.2
        hist = StrainHistory(times=t, values=np.full_like(t, e0))
        te0 = law.stress_green(e0)
        out = qlv_stress_fast(model, hist)
        ref = prony_relaxation(prony, t) * te0
        assert np.max(np.abs(out.values - ref)) <= 1e-10 * abs(te0)

    def test_step_factorization_direct(self):
        law = LinearElasticLaw(k=1.5)
        prony = PronySpectrum(K=0.5, amplitudes=(0.5,), frequencies=(2.0,))
        model = QlvModel.from_kernel(law, prony)
        t = np.linspace(0.0, 3.0, 100)
        hist = StrainHistory(times=t, values=np.full_like(t, 0.1))
        out = qlv_stress_direct(model, hist, kernel="prony")
        ref = prony_relaxation(prony, t) * 0.15
        assert np.max(np.abs(out.values - ref)) <= 1e-12


class TestRampAnalytic:
    def test_single_term_prony_ramp(self):
        # linear elastic T_e = k*r*t under constant strain rate r;
        # T(t) = K*k*r*t + alpha*k*r*(1 - exp(-nu t))/nu by direct integration
        k, r = 2.0, 0.3
        K, alpha, nu = 0.4, 0.6, 1.5
        prony = PronySpectrum(K=K, amplitudes=(alpha,), frequencies=(nu,))
        model = QlvModel.from_kernel(LinearElasticLaw(k=k), prony)
        t = np.linspace(0.0, 4.0, 4001)
        hist = StrainHistory(times=t, values=r * t)
        ref = K * k * r * t + alpha * k * r * (1 - np.exp(-nu * t)) / nu
        fast = qlv_stress_fast(model, hist).values
        direct = qlv_stress_direct(model, hist, kernel="prony").values
        assert np.max(np.abs(fast - ref)) <= 1e-6
        assert np.max(np.abs(direct - ref)) <= 1e-6

    def test_direct_second_order_convergence(self):
        k, r = 2.0, 0.3
        prony = PronySpectrum(K=0.4, amplitudes=(0.6,), frequencies=(1.5,))
        model = QlvModel.from_kernel(LinearElasticLaw(k=k), prony)

        def max_err(n):
            t = np.linspace(0.0, 2.0, n + 1)
            hist = StrainHistory(times=t, values=r * t)
            ref = (0.4 * k * r * t
                   + 0.6 * k * r * (1 - np.exp(-1.5 * t)) / 1.5)
            return np.max(np.abs(
                qlv_stress_direct(model, hist, kernel="prony").values - ref))

        e1, e2 = max_err(200), max_err(400)
        assert e1 / e2 > 3.0  # ~4x for a second-order scheme


class TestFastVsDirect:
    def test_oracle_equivalence_fung(self):
        rng = np.random.default_rng(42)
        law = ExponentialTensileLaw(B=5.0, C=1.0)
        model = QlvModel.from_kernel(law, FungSpectrum(c=0.5, q1=0.5, q2=50.0))
        t = np.linspace(0.0, 2.0, 2048)
        phases = rng.uniform(0, 2 * np.pi, 3)
        green = 0.1 + 0.05 * (np.sin(2.1 * t + phases[0])
                              + np.sin(0.7 * t + phases[1])
                              + np.sin(4.3 * t + phases[2])) / 3.0
        hist = StrainHistory(times=t, values=green)
        fast = qlv_stress_fast(model, hist).values
        direct = qlv_stress_direct(model, hist, kernel="prony").values
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(fast - direct)) / scale <= 1e-6

    def test_nonuniform_grid(self):
        rng = np.random.default_rng(8)
        t = np.concatenate([[0.0], np.sort(rng.uniform(0.01, 2.0, 300))])
        green = 0.1 * np.sin(t)
        hist = StrainHistory(times=t, values=green)
        model = QlvModel.from_kernel(
            LinearElasticLaw(k=1.0),
            PronySpectrum(K=0.5, amplitudes=(0.5,), frequencies=(1.0,)))
        fast = qlv_stress_fast(model, hist).values
        direct = qlv_stress_direct(model, hist, kernel="prony").values
        assert np.max(np.abs(fast - direct)) <= 1e-4 * max(
            1e-12, np.max(np.abs(direct)))

    def test_domain_error_reports_time_index(self):
        model = QlvModel.from_kernel(ExponentialTensileLaw(B=1.0, C=1.0),
                                     PronySpectrum(K=1.0))
        hist = StrainHistory(times=[0.0, 1.0, 2.0],
                             values=[0.0, 0.1, -0.6])
        with pytest.raises(DomainError, match="index 2"):
            qlv_stress_fast(model, hist)


class TestModelConstruction:
    def test_unnormalized_prony_rejected(self):
        with pytest.raises(DomainError):
            QlvModel(elastic=LinearElasticLaw(k=1.0),
                     relaxation=None,
                     prony=PronySpectrum(K=2.0))

    def test_from_kernel_records_tolerance(self):
        model = QlvModel.from_kernel(LinearElasticLaw(k=1.0),
                                     FungSpectrum(c=0.5, q1=0.1, q2=10.0),
                                     n_prony=64)
        assert 0.0 < model.prony_tolerance < 1e-3

    def test_kelvin_kernel(self):
        model = QlvModel.from_kernel(LinearElasticLaw(k=1.0),
                                     KelvinParams(E_R=1.0, tau_eps=0.5,
                                                  tau_sigma=1.5))
        assert model.prony.K == pytest.approx(1.0 / 3.0)

    def test_maxwell_kernel(self):
        model = QlvModel.from_kernel(LinearElasticLaw(k=1.0),
                                     MaxwellParams(mu=2.0, eta=4.0))
        assert model.prony.frequencies == (0.5,)


class TestHysteresisRatio:
    def test_elastic_loop_is_zero(self):
        e = np.linspace(0.0, 0.2, 50)
        s = 2.0 * e
        h = hysteresis_ratio(e, s, e[::-1], s[::-1])
        assert h == pytest.approx(0.0, abs=1e-12)

    def test_rectangle_loop(self):
        # loading at stress 2, unloading at stress 1 over strain [0, 1]
        e = np.linspace(0.0, 1.0, 20)
        h = hysteresis_ratio(e, np.full_like(e, 2.0),
                             e[::-1], np.full_like(e, 1.0))
        assert h == pytest.approx(0.5, rel=1e-12)

    def test_preconditions(self):
        e = np.linspace(0.0, 1.0, 10)
        with pytest.raises(DomainError):
            hysteresis_ratio(e[::-1], e, e[::-1], e)
        with pytest.raises(DomainError):
            hysteresis_ratio(e, np.zeros_like(e), e[::-1], np.zeros_like(e))
