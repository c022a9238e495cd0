import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_density, random_hermitian, random_qrm
from qrmlab import matops, qrm
from qrmlab.errors import ContractError, VerificationError

QUBIT_H = np.array([[0.0, 0.35], [0.35, 1.0]], dtype=complex)  # delta=0.7, epsilon=1


def fig1_system(t=(0.9, 0.7, 0.8)):
    channels = tuple(
        qrm.ResetChannel(np.diag([tj, 1 - tj]), g) for tj, g in zip(t, (1.0, 0.5, 1 / 3))
    )
    return qrm.QrmSystem(QUBIT_H, channels)


class TestRecombine:
    def test_single_channel(self, rng):
        tau = random_density(rng, 2)
        sys = qrm.QrmSystem(QUBIT_H, (qrm.ResetChannel(tau, 0.7),))
        rec = qrm.recombine(sys)
        assert rec.gamma_total == 0.7
        assert_allclose(rec.t, tau, atol=1e-15)

    def test_equal_rates_average(self, rng):
        t1, t2 = random_density(rng, 2), random_density(rng, 2)
        sys = qrm.QrmSystem(QUBIT_H, (qrm.ResetChannel(t1, 0.4), qrm.ResetChannel(t2, 0.4)))
        assert_allclose(qrm.recombine(sys).t, (t1 + t2) / 2, atol=1e-15)

    def test_reference_rates(self):
        sys = fig1_system()
        rec = qrm.recombine(sys)
        assert_allclose(rec.gamma_total, 11 / 6, atol=1e-15)
        t_bar = (1.0 * 0.9 + 0.5 * 0.7 + (1 / 3) * 0.8) / (11 / 6)
        assert_allclose(rec.t[0, 0], t_bar, atol=1e-15)


class TestApplyGenerator:
    def test_kills_steady_state(self, rng):
        sys = random_qrm(rng, 3)
        rho = qrm.steady_state(sys)
        assert np.linalg.norm(qrm.apply_generator(sys, rho)) < 1e-10

    def test_traceless_pure_decay(self, rng):
        sys = qrm.QrmSystem(np.zeros((2, 2)), (qrm.ResetChannel(random_density(rng, 2), 0.9),))
        x = random_hermitian(rng, 2)
        x = x - np.trace(x) * np.eye(2) / 2
        assert_allclose(qrm.apply_generator(sys, x), -0.9 * x, atol=1e-14)

    def test_trace_preserving(self, rng):
        sys = random_qrm(rng, 4)
        for _ in range(5):
            rho = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            assert abs(np.trace(qrm.apply_generator(sys, rho))) < 1e-12


class TestSteadyState:
    def test_commuting_returns_reset_state(self):
        h = np.diag([0.0, 1.0])
        tau = np.diag([0.8, 0.2])
        sys = qrm.QrmSystem(h, (qrm.ResetChannel(tau, 0.5),))
        assert_allclose(qrm.steady_state(sys), tau, atol=1e-12)

    def test_single_qubit_closed_form(self):
        # one reservoir, nonzero tunneling
        eps, delta, g, t = 1.0, 0.7, 0.8, 0.9
        sys = qrm.QrmSystem(
            np.array([[0, delta / 2], [delta / 2, eps]]),
            (qrm.ResetChannel(np.diag([t, 1 - t]), g),),
        )
        den = eps**2 + delta**2 + g**2
        p00 = (delta**2 / 2 + (eps**2 + g**2) * t) / den
        off = delta / 2 * (eps - 1j * g) * (1 - 2 * t) / den
        expected = np.array([[p00, off], [np.conj(off), 1 - p00]])
        assert_allclose(qrm.steady_state(sys), expected, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_matches_nullspace_oracle(self, rng, d):
        sys = random_qrm(rng, d)
        sup = matops.vectorize_map(lambda x: qrm.apply_generator(sys, x), d)
        oracle = matops.nullspace_unique(sup)
        assert matops.trace_distance(qrm.steady_state(sys), oracle) < 1e-10

    def test_depends_only_on_ratio(self, rng):
        sys = random_qrm(rng, 3)
        c = 3.7
        scaled = qrm.QrmSystem(
            c * sys.h, tuple(qrm.ResetChannel(ch.tau, c * ch.gamma) for ch in sys.channels)
        )
        assert matops.trace_distance(qrm.steady_state(sys), qrm.steady_state(scaled)) < 1e-10

    def test_degenerate_hamiltonian(self, rng):
        # a degenerate pair must see an exactly unit resolvent factor
        h = np.diag([0.5, 0.5, 1.5])
        tau = random_density(rng, 3)
        sys = qrm.QrmSystem(h, (qrm.ResetChannel(tau, 0.9),))
        rho = qrm.steady_state(sys)
        assert np.linalg.norm(qrm.apply_generator(sys, rho)) < 1e-12


class TestPropagate:
    def test_time_zero(self, rng):
        sys = random_qrm(rng, 3)
        rho0 = random_density(rng, 3)
        assert_allclose(qrm.propagate(sys, rho0, 0.0), rho0, atol=1e-12)

    def test_long_time_limit(self, rng):
        sys = random_qrm(rng, 3)
        rho0 = random_density(rng, 3)
        t = 50.0 / qrm.recombine(sys).gamma_total
        assert matops.trace_distance(qrm.propagate(sys, rho0, t), qrm.steady_state(sys)) < 1e-10

    def test_commuting_closed_form(self, rng):
        # diagonal H, diagonal reset state: entrywise exponential relaxation
        eps, g, t_a = 1.0, 0.8, 0.9
        sys = qrm.QrmSystem(
            np.diag([0.0, eps]), (qrm.ResetChannel(np.diag([t_a, 1 - t_a]), g),)
        )
        rho0 = random_density(rng, 2)
        t = 0.6
        out = qrm.propagate(sys, rho0, t)
        decay = np.exp(-g * t)
        assert_allclose(out[0, 0], decay * rho0[0, 0] + t_a * (1 - decay), atol=1e-12)
        assert_allclose(out[1, 1], decay * rho0[1, 1] + (1 - t_a) * (1 - decay), atol=1e-12)
        assert_allclose(out[0, 1], rho0[0, 1] * np.exp((1j * eps - g) * t), atol=1e-12)

    def test_semigroup_property(self, rng):
        sys = random_qrm(rng, 3)
        rho0 = random_density(rng, 3)
        once = qrm.propagate(sys, rho0, 0.7 + 0.4)
        twice = qrm.propagate(sys, qrm.propagate(sys, rho0, 0.7), 0.4)
        assert_allclose(once, twice, atol=1e-10)

    def test_rejects_negative_time(self, rng):
        sys = random_qrm(rng, 2)
        with pytest.raises(ContractError):
            qrm.propagate(sys, random_density(rng, 2), -1.0)


class TestGeneratorSpectrum:
    def test_qubit_explicit(self):
        eps = 0.9
        sys = qrm.QrmSystem(
            np.diag([0.0, eps]), (qrm.ResetChannel(np.diag([0.7, 0.3]), 1.1),)
        )
        vals = sorted(qrm.generator_spectrum(sys), key=lambda z: (z.real, z.imag))
        expected = sorted(
            [0, -1.1, -1.1 - 1j * eps, -1.1 + 1j * eps], key=lambda z: (z.real, z.imag)
        )
        assert_allclose(vals, expected, atol=1e-10)

    def test_zero_hamiltonian_multiplicity(self, rng):
        tau = random_density(rng, 3)
        sys = qrm.QrmSystem(np.zeros((3, 3)), (qrm.ResetChannel(tau, 0.6),))
        vals = qrm.generator_spectrum(sys)
        near_minus_gamma = np.sum(np.abs(vals + 0.6) < 1e-8)
        assert near_minus_gamma == 8

    def test_real_parts(self):
        sys = fig1_system()
        vals = qrm.generator_spectrum(sys)
        gamma_total = 11 / 6
        nonzero = [v for v in vals if abs(v) > 1e-10]
        assert all(abs(v.real + gamma_total) < 1e-8 for v in nonzero)

    def test_verifies_law(self, rng):
        for d in (2, 3, 4):
            qrm.generator_spectrum(random_qrm(rng, d))  # must not raise


class TestRhoMap:
    def test_commuting_fixed_point(self):
        h = np.diag([0.3, 1.2])
        t = np.diag([0.6, 0.4]).astype(complex)
        assert_allclose(qrm.rho_map(h, t), t, atol=1e-13)

    def test_conjugation_identity(self, rng):
        # literal form for real symmetric H; the general Hermitian case picks
        # up a conjugation of H as well
        h_real = np.real(random_hermitian(rng, 3))
        h_real = (h_real + h_real.T) / 2
        t = random_density(rng, 3)
        assert_allclose(
            np.conj(qrm.rho_map(h_real, t)), qrm.rho_map(-h_real, np.conj(t)), atol=1e-12
        )
        h = random_hermitian(rng, 3)
        assert_allclose(
            np.conj(qrm.rho_map(h, t)), qrm.rho_map(-np.conj(h), np.conj(t)), atol=1e-12
        )
        assert_allclose(
            qrm.rho_map(h, t).T, qrm.rho_map(-h.T, t.T), atol=1e-12
        )

    def test_unital(self, rng):
        h = random_hermitian(rng, 4)
        assert_allclose(qrm.rho_map(h, np.eye(4) / 4), np.eye(4) / 4, atol=1e-13)

    def test_defining_identity(self, rng):
        h = random_hermitian(rng, 3)
        t = random_density(rng, 3)
        rho = qrm.rho_map(h, t)
        assert_allclose(rho + 1j * (h @ rho - rho @ h), t, atol=1e-10)

    def test_positivity_improving_on_faithful(self, rng):
        h = random_hermitian(rng, 3)
        t = random_density(rng, 3, faithful=True)
        w = np.linalg.eigvalsh(qrm.rho_map(h, t))
        assert w[0] > 0

    def test_log_trace_identity(self, rng):
        # tr(T ln rho_H(T)) equals tr(rho_H(T) ln rho_H(T)) for faithful T
        h = random_hermitian(rng, 3)
        t = random_density(rng, 3)
        rho = qrm.rho_map(h, t)
        ln_rho = matops.logm_psd(rho)
        assert abs(np.trace(t @ ln_rho) - np.trace(rho @ ln_rho)) < 1e-9

    def test_entropy_additivity(self, rng):
        from qrmlab import entropy

        h = random_hermitian(rng, 3)
        t = random_density(rng, 3)
        rho = qrm.rho_map(h, t)
        s_rho = entropy.von_neumann_entropy(rho)
        s_t = entropy.von_neumann_entropy(t)
        rel = entropy.relative_entropy(t, rho)
        assert abs(s_rho - (s_t + rel)) < 1e-9


class TestChoiCptp:
    def test_identity_map_choi(self):
        report = qrm.choi_cptp_check(np.zeros((3, 3)))
        assert report["min_choi_eigenvalue"] > -1e-10
        assert report["trace_preservation_residual"] < 1e-12

    def test_qubit_model(self):
        report = qrm.choi_cptp_check(QUBIT_H)
        assert report["min_choi_eigenvalue"] >= -1e-10

    def test_random_hamiltonians(self, rng):
        for _ in range(5):
            report = qrm.choi_cptp_check(random_hermitian(rng, 3))
            assert report["min_choi_eigenvalue"] >= -1e-10
            assert report["trace_preservation_residual"] < 1e-12


class TestAdjoint:
    def test_identity_observable(self, rng):
        sys = random_qrm(rng, 3)
        assert np.linalg.norm(qrm.adjoint_apply(sys, np.eye(3))) < 1e-13

    def test_hilbert_schmidt_duality(self, rng):
        sys = random_qrm(rng, 3)
        for _ in range(20):
            x = random_hermitian(rng, 3)
            rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            lhs = np.trace(qrm.adjoint_apply(sys, x) @ rho)
            rhs = np.trace(x @ qrm.apply_generator(sys, rho))
            assert abs(lhs - rhs) < 1e-10

    def test_traceless_decay(self, rng):
        sys = qrm.QrmSystem(
            np.zeros((2, 2)), (qrm.ResetChannel(np.eye(2) / 2, 0.7),)
        )
        x = random_hermitian(rng, 2)
        x = x - np.trace(x) * np.eye(2) / 2
        assert_allclose(qrm.adjoint_apply(sys, x), -0.7 * x, atol=1e-13)


class TestDetailedBalance:
    def test_commuting_case(self):
        sys = qrm.QrmSystem(np.diag([0.0, 1.0]), (qrm.ResetChannel(np.diag([0.9, 0.1]), 1.0),))
        assert qrm.detailed_balance(sys)

    def test_tunneling_breaks_it(self):
        assert not qrm.detailed_balance(fig1_system())

    def test_identity_hamiltonian(self, rng):
        sys = qrm.QrmSystem(np.eye(3), (qrm.ResetChannel(random_density(rng, 3), 0.5),))
        assert qrm.detailed_balance(sys)

    def test_requires_positive_t(self):
        tau = np.diag([1.0, 0.0])
        sys = qrm.QrmSystem(QUBIT_H, (qrm.ResetChannel(tau, 1.0),))
        with pytest.raises(ContractError):
            qrm.detailed_balance(sys)
