import numpy as np
import pytest

from decoshield.control import (DD_TOL, ControlSchedule, SystemModel,
                                check_dd, effective_dynamics, fourier_modes,
                                q_of_t, qka_bangbang_closed_form,
                                tune_amplitude, vc_at)
from decoshield.errors import (ArgumentError, DecouplingViolationError,
                               TuneSearchError)
from decoshield.operators import operator_norm

from oracles import bessel_j_series

MU_STAR = 7.554982305222015  # pi * first zero of J_0

rng = np.random.default_rng(11)


def tuned_schedule(period=0.1):
    return ControlSchedule.sinusoidal(period, MU_STAR)


def two_kick(period=1.0, alpha1=0.25):
    # half-period kick spacing with +-pi/2 weights nulls the zero mode
    return ControlSchedule.bangbang(period, [alpha1, alpha1 + 0.5],
                                    [np.pi / 2, -np.pi / 2])


class TestControlPropagator:
    def test_no_control_is_identity(self):
        off = ControlSchedule.off(period=0.3)
        for t in (0.0, 0.17, 2.5):
            np.testing.assert_allclose(vc_at(off, t), np.eye(2), atol=1e-14)

    def test_sinusoidal_closed_form(self):
        sched = ControlSchedule.sinusoidal(0.4, 2.3)
        for t in rng.uniform(0, 2, size=8):
            phi = 2.3 * np.sin(2 * np.pi * t / 0.4) / (2 * np.pi)
            expect = np.diag([np.exp(1j * phi), np.exp(-1j * phi)])
            np.testing.assert_allclose(vc_at(sched, t), expect, atol=1e-12)

    def test_unitarity(self):
        sched = tuned_schedule()
        for t in rng.uniform(0, 5, size=20):
            v = vc_at(sched, float(t))
            assert operator_norm(v.conj().T @ v - np.eye(2)) < 1e-10

    def test_negative_time_rejected(self):
        with pytest.raises(ArgumentError):
            vc_at(tuned_schedule(), -0.1)


class TestRotatedCoupling:
    def test_initial_value(self):
        model = SystemModel.qubit()
        np.testing.assert_allclose(q_of_t(model, tuned_schedule(), 0.0),
                                   model.q, atol=1e-14)

    def test_offdiagonal_phases(self):
        model = SystemModel.qubit()
        sched = ControlSchedule.sinusoidal(0.5, 1.7)
        for t in rng.uniform(0, 1, size=6):
            qt = q_of_t(model, sched, float(t))
            phase = np.exp(-1j * (1.7 / np.pi) * np.sin(2 * np.pi * t / 0.5))
            assert qt[0, 1] == pytest.approx(phase, abs=1e-12)
            assert qt[0, 0] == pytest.approx(0.0, abs=1e-13)

    def test_norm_invariance(self):
        model = SystemModel.qubit()
        sched = tuned_schedule()
        for t in rng.uniform(0, 3, size=10):
            assert operator_norm(q_of_t(model, sched, float(t))) == \
                pytest.approx(operator_norm(model.q), abs=1e-12)


class TestCheckDD:
    def test_tuned_schedule_passes(self):
        report = check_dd(SystemModel.qubit(), tuned_schedule())
        assert report.passed
        assert report.zero_mode_norm < 1e-8
        assert report.residual_passed

    def test_detuned_residual_matches_bessel(self):
        # zero mode of the off-diagonal phase is J_0(mu/pi)
        report = check_dd(SystemModel.qubit(),
                          ControlSchedule.sinusoidal(0.1, 1.0))
        assert not report.passed
        expect = abs(bessel_j_series(0, 1.0 / np.pi))
        assert report.zero_mode_norm == pytest.approx(expect, abs=1e-9)
        assert report.residual == pytest.approx(expect, abs=1e-7)

    def test_no_control_residual_is_coupling_norm(self):
        model = SystemModel.qubit()
        report = check_dd(model, ControlSchedule.off(period=0.1))
        assert not report.passed
        assert report.residual == pytest.approx(operator_norm(model.q),
                                                abs=1e-10)

    def test_two_kick_passes(self):
        report = check_dd(SystemModel.qubit(), two_kick())
        assert report.passed
        assert report.residual_passed


class TestEquivalenceOfFormulations:
    def test_ten_random_schedules(self):
        model = SystemModel.qubit()
        schedules = []
        for _ in range(3):
            schedules.append(two_kick(alpha1=float(rng.uniform(0.05, 0.45))))
        for _ in range(2):
            schedules.append(tuned_schedule(float(rng.uniform(0.05, 0.5))))
        for _ in range(3):
            schedules.append(ControlSchedule.sinusoidal(
                0.2, float(rng.uniform(1.0, 5.0))))
        for _ in range(2):
            a1 = float(rng.uniform(0.05, 0.3))
            schedules.append(ControlSchedule.bangbang(
                1.0, [a1, a1 + 0.35], [np.pi / 2, -np.pi / 2]))
        verdicts = []
        for sched in schedules:
            rep = check_dd(model, sched, tol=1e-7)
            assert rep.passed == rep.residual_passed
            verdicts.append(rep.passed)
        assert verdicts.count(True) == 5
        assert verdicts.count(False) == 5


class TestSchedulingProperties:
    def test_rescaling_preserves_verdict_and_strength(self):
        model = SystemModel.qubit()
        for sched in (tuned_schedule(0.1), two_kick(1.0)):
            scaled = sched.rescaled(0.037)
            assert check_dd(model, scaled).passed
            assert scaled.strength() == pytest.approx(sched.strength(),
                                                      abs=1e-10)

    def test_minimum_control_strength(self):
        # any schedule nulling a nonzero coupling needs ln(2)/(2T) of drive
        model = SystemModel.qubit()
        for sched in (tuned_schedule(0.1), tuned_schedule(0.37), two_kick()):
            assert check_dd(model, sched).passed
            bound = np.log(2.0) / (2.0 * sched.period)
            assert sched.max_control_norm() >= bound

    def test_zero_sum_weights_enforced(self):
        with pytest.raises(ArgumentError):
            ControlSchedule.bangbang(1.0, [0.3, 0.6], [1.0, -0.5])

    def test_kick_ordering_enforced(self):
        with pytest.raises(ArgumentError):
            ControlSchedule.bangbang(1.0, [0.6, 0.3], [1.0, -1.0])


class TestTuneAmplitude:
    def factory(self, mu):
        return ControlSchedule.sinusoidal(0.1, mu)

    def test_finds_bessel_zero(self):
        mu = tune_amplitude(SystemModel.qubit(), self.factory, (6.0, 9.0))
        assert abs(mu - np.pi * 2.4048255577) < 1e-6
        # independent series check: J_0 vanishes at mu/pi
        assert abs(bessel_j_series(0, mu / np.pi)) < 1e-10

    def test_no_root_in_bracket(self):
        with pytest.raises(TuneSearchError) as err:
            tune_amplitude(SystemModel.qubit(), self.factory, (0.1, 1.0))
        assert len(err.value.scan) > 0

    def test_idempotent(self):
        mu1 = tune_amplitude(SystemModel.qubit(), self.factory, (6.0, 9.0))
        mu2 = tune_amplitude(SystemModel.qubit(), self.factory,
                             (mu1 - 0.1, mu1 + 0.1))
        assert abs(mu1 - mu2) < 1e-8


class TestFourierModes:
    def test_no_control_concentrates_in_zero_mode(self):
        model = SystemModel.qubit()
        table = fourier_modes(model, ControlSchedule.off(period=0.2), K=5)
        np.testing.assert_allclose(table.mode(0), model.q, atol=1e-12)
        for k in range(1, 6):
            assert operator_norm(table.mode(k)) < 1e-12
            assert operator_norm(table.mode(-k)) < 1e-12

    def test_sinusoidal_ladder_norms_are_bessel_values(self):
        table = fourier_modes(SystemModel.qubit(), tuned_schedule())
        for k in range(1, 9):
            expect = abs(bessel_j_series(k, MU_STAR / np.pi))
            assert operator_norm(table.ladder[(k, -1)]) == \
                pytest.approx(expect, abs=1e-8)

    def test_parseval_and_adjoint_symmetry(self):
        table = fourier_modes(SystemModel.qubit(), tuned_schedule())
        assert table.parseval_defect < 1e-8
        for k in range(1, table.cutoff + 1):
            assert operator_norm(table.mode(-k) - table.mode(k).conj().T) \
                < 1e-12

    def test_invalid_cutoff(self):
        with pytest.raises(ArgumentError):
            fourier_modes(SystemModel.qubit(), tuned_schedule(), K=0)


class TestBangBangClosedForm:
    def test_zero_mode_under_dd(self):
        out = qka_bangbang_closed_form(SystemModel.qubit(), two_kick(), 0, -1)
        assert operator_norm(out) == 0.0

    def test_zero_mode_without_dd_raises(self):
        bad = ControlSchedule.bangbang(1.0, [0.2, 0.5], [np.pi / 2, -np.pi / 2])
        with pytest.raises(DecouplingViolationError):
            qka_bangbang_closed_form(SystemModel.qubit(), bad, 0, -1)

    def test_matches_segmentwise_quadrature(self):
        import scipy.integrate

        model = SystemModel.qubit()
        sched = two_kick()
        segs = sched.segments()
        for k in (1, 2, 3, 7, 25, 50, -3, -11):
            for a in (-1, +1):
                closed = qka_bangbang_closed_form(model, sched, k, a)

                def entry(x):
                    # rotated ladder entry e^{-2 i a phi(x)} (upper/lower)
                    phi = float(sched.phase(x * sched.period))
                    return np.exp(-2j * a * phi) * np.exp(-2j * np.pi * k * x)

                total = 0.0 + 0.0j
                for x0, x1, _ in segs:
                    re, _ = scipy.integrate.quad(
                        lambda x: entry(x).real, x0, x1, epsabs=1e-12)
                    im, _ = scipy.integrate.quad(
                        lambda x: entry(x).imag, x0, x1, epsabs=1e-12)
                    total += re + 1j * im
                idx = (0, 1) if a == -1 else (1, 0)
                assert closed[idx] == pytest.approx(total, abs=2e-10)

    def test_inverse_k_scaling_on_support(self):
        model = SystemModel.qubit()
        sched = two_kick()
        vals = []
        for k in range(1, 51):
            nrm = operator_norm(qka_bangbang_closed_form(model, sched, k, -1))
            if k % 2 == 0:
                assert nrm < 1e-12
            else:
                vals.append(k * nrm)
        assert max(vals) - min(vals) < 1e-9


class TestEffectiveDynamics:
    def test_diagonal_states_are_fixed(self):
        model = SystemModel.qubit()
        rho = np.diag([0.3, 0.7]).astype(complex)
        for t in (0.0, 1.3, 17.0):
            np.testing.assert_allclose(
                effective_dynamics(model, tuned_schedule(), rho, t), rho,
                atol=1e-12)

    def test_coherence_moduli_preserved(self):
        model = SystemModel.qubit()
        vec = np.array([np.sqrt(0.3), np.sqrt(0.7) * np.exp(0.4j)])
        rho0 = np.outer(vec, vec.conj())
        for t in rng.uniform(0, 20, size=10):
            rho = effective_dynamics(model, tuned_schedule(), rho0, float(t))
            assert abs(rho[0, 1]) == pytest.approx(abs(rho0[0, 1]), abs=1e-12)
            assert rho[0, 0] == pytest.approx(rho0[0, 0], abs=1e-12)

    def test_initial_time(self):
        model = SystemModel.qubit()
        rho0 = 0.5 * np.ones((2, 2), dtype=complex)
        np.testing.assert_allclose(
            effective_dynamics(model, tuned_schedule(), rho0, 0.0), rho0,
            atol=1e-14)

    def test_rejects_non_state(self):
        with pytest.raises(ArgumentError):
            effective_dynamics(SystemModel.qubit(), tuned_schedule(),
                               np.array([[1.0, 0.0], [0.0, 1.0]]), 1.0)
