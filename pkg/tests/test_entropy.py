import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_density, random_hermitian
from qrmlab import affine, entropy, matops, models, qrm
from qrmlab.errors import ContractError


def classical_kl(p, q):
    """Scalar Kullback-Leibler divergence, the diagonal-state oracle."""
    return sum(pi * (math.log(pi) - math.log(qi)) for pi, qi in zip(p, q) if pi > 0)


class TestVonNeumann:
    def test_pure_state(self):
        assert abs(entropy.von_neumann_entropy(np.diag([1.0, 0.0]))) < 1e-12

    def test_maximally_mixed(self):
        for d in (2, 3, 5):
            assert_allclose(entropy.von_neumann_entropy(np.eye(d) / d), np.log(d), atol=1e-12)

    def test_binary_entropy(self):
        t = 0.9
        expected = -t * np.log(t) - (1 - t) * np.log(1 - t)
        assert_allclose(entropy.von_neumann_entropy(np.diag([t, 1 - t])), expected, atol=1e-12)

    def test_nonnegative_on_random_states(self, rng):
        for _ in range(10):
            assert entropy.von_neumann_entropy(random_density(rng, 4)) >= 0

    def test_rejects_non_density(self):
        with pytest.raises(ContractError):
            entropy.von_neumann_entropy(np.diag([1.0, 1.0]))


class TestRelativeEntropy:
    def test_zero_on_equal(self, rng):
        rho = random_density(rng, 3)
        assert abs(entropy.relative_entropy(rho, rho)) < 1e-12

    def test_infinite_for_orthogonal_support(self):
        mu = np.diag([1.0, 0.0])
        nu = np.diag([0.0, 1.0])
        assert entropy.relative_entropy(mu, nu) == math.inf

    def test_infinity_is_a_value(self):
        out = entropy.relative_entropy(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert math.isinf(out) and out > 0

    def test_kernel_inclusion_is_finite(self):
        mu = np.diag([0.0, 1.0])
        nu = np.diag([0.5, 0.5])
        assert_allclose(entropy.relative_entropy(mu, nu), np.log(2), atol=1e-12)

    def test_diagonal_states_reduce_to_kl(self):
        t_a, t_b = 0.9, 0.6
        mu = np.diag([t_a, 1 - t_a])
        nu = np.diag([t_b, 1 - t_b])
        assert_allclose(
            entropy.relative_entropy(mu, nu),
            classical_kl([t_a, 1 - t_a], [t_b, 1 - t_b]),
            atol=1e-12,
        )

    def test_nonnegative(self, rng):
        for _ in range(10):
            mu = random_density(rng, 3)
            nu = random_density(rng, 3)
            assert entropy.relative_entropy(mu, nu) >= -1e-10

    def test_zero_iff_equal_on_faithful_pairs(self, rng):
        mu = random_density(rng, 3)
        nu = random_density(rng, 3)
        if matops.trace_distance(mu, nu) >= 1e-8:
            assert entropy.relative_entropy(mu, nu) > 1e-10
        shifted = mu + 0.0
        assert entropy.relative_entropy(mu, shifted) < 1e-10


def _split_setup(t=(0.9, 0.7, 0.8), lambdas=None):
    p = models.SingleQubitParams(
        epsilon=1.0, delta=0.7, t=t, gamma=(1.0, 0.5, 1 / 3), lambdas=lambdas
    )
    sys = models.build_single_qubit(p)
    split = affine.AffineSplit(p.active_lambdas())
    gens = [
        (lambda r, j=j: affine.split_generator_apply(sys, split, j, r))
        for j in range(len(sys.channels))
    ]
    steady = [affine.split_steady_state(sys, split, j) for j in range(len(sys.channels))]
    return sys, split, gens, steady


class TestEntropyProduction:
    def test_single_reservoir_steady_state(self, rng):
        tau = random_density(rng, 2)
        sys = qrm.QrmSystem(np.array([[0, 0.35], [0.35, 1.0]]), (qrm.ResetChannel(tau, 0.8),))
        rho_plus = qrm.steady_state(sys)
        rep = entropy.entropy_production(
            [lambda r: qrm.apply_generator(sys, r)], rho_plus, [rho_plus]
        )
        assert abs(rep.total) < 1e-10

    def test_zero_weight_channel_relative_entropy_form(self, rng):
        # a channel carrying no Hamiltonian weight contributes
        # gamma_j (S(tau_j|rho) + S(rho|tau_j))
        sys, split, gens, steady = _split_setup(lambdas=(1.0, 0.0, 0.0))
        rho = random_density(rng, 2)
        rep = entropy.entropy_production(gens, rho, steady)
        for j in (1, 2):
            gamma_j = sys.channels[j].gamma
            tau_j = sys.channels[j].tau
            expected = gamma_j * (
                entropy.relative_entropy(tau_j, rho) + entropy.relative_entropy(rho, tau_j)
            )
            assert_allclose(rep.per_reservoir[j], expected, atol=1e-10)

    def test_equal_reset_states_proportional_weights_vanish(self):
        sys, split, gens, steady = _split_setup(t=(0.9, 0.9, 0.9))
        rho_plus = qrm.steady_state(sys)
        rep = entropy.entropy_production(gens, rho_plus, steady)
        assert abs(rep.total) < 1e-10

    def test_report_invariants(self, rng):
        sys, split, gens, steady = _split_setup()
        rho = random_density(rng, 2)
        rep = entropy.entropy_production(gens, rho, steady)
        assert_allclose(rep.total, sum(rep.per_reservoir), atol=1e-9)
        assert rep.total >= -1e-10
        assert all(s >= -1e-10 for s in rep.per_reservoir)

    def test_steady_state_flux_form(self):
        # at the steady state the production equals the summed flux terms
        sys, split, gens, steady = _split_setup()
        rho_plus = qrm.steady_state(sys)
        rep = entropy.entropy_production(gens, rho_plus, steady)
        flux_into = [
            float(np.real(np.trace(gen(rho_plus) @ matops.logm_psd(st))))
            for gen, st in zip(gens, steady)
        ]
        assert_allclose(rep.total, sum(flux_into), atol=1e-9)

    def test_balance_residual_analytic(self, rng):
        sys, split, gens, steady = _split_setup()
        rho = random_density(rng, 2)
        rep = entropy.entropy_production(gens, rho, steady)
        assert rep.balance_residual < 1e-9

    def test_balance_against_finite_difference(self, rng):
        sys, split, gens, steady = _split_setup()
        rho = random_density(rng, 2)
        rep = entropy.entropy_production(gens, rho, steady)
        h = 1e-6
        s_plus = entropy.von_neumann_entropy(qrm.propagate(sys, rho, h))
        # backward step via the generator itself (propagate requires t >= 0)
        rho_minus = rho - h * qrm.apply_generator(sys, rho)
        rho_minus = (rho_minus + rho_minus.conj().T) / 2
        s_minus = entropy.von_neumann_entropy(rho_minus / np.trace(rho_minus).real)
        ds_dt_fd = (s_plus - s_minus) / (2 * h)
        flux_into_sum = -sum(rep.fluxes)
        assert abs(ds_dt_fd - (rep.total - flux_into_sum)) < 1e-4

    def test_convexity_spot_check(self, rng):
        sys, split, gens, steady = _split_setup()
        for _ in range(5):
            rho1 = random_density(rng, 2)
            rho2 = random_density(rng, 2)
            alpha = rng.uniform(0.1, 0.9)
            mix = alpha * rho1 + (1 - alpha) * rho2
            s_mix = entropy.entropy_production(gens, mix, steady).total
            s1 = entropy.entropy_production(gens, rho1, steady).total
            s2 = entropy.entropy_production(gens, rho2, steady).total
            assert s_mix <= alpha * s1 + (1 - alpha) * s2 + 1e-9

    def test_requires_faithful_individual_steady_states(self, rng):
        sys, split, gens, steady = _split_setup()
        singular = [np.diag([1.0, 0.0]).astype(complex)] + list(steady[1:])
        with pytest.raises(ContractError):
            entropy.entropy_production(gens, random_density(rng, 2), singular)


class TestEpSingle:
    def test_zero_at_steady_state(self, rng):
        tau = random_density(rng, 2)
        sys = qrm.QrmSystem(np.array([[0, 0.35], [0.35, 1.0]]), (qrm.ResetChannel(tau, 0.8),))
        rho_plus = qrm.steady_state(sys)
        val = entropy.ep_single(lambda r: qrm.apply_generator(sys, r), rho_plus, rho_plus)
        assert abs(val) < 1e-10

    def test_detailed_balance_relative_entropy_form(self, rng):
        # commuting reset state: sigma = Gamma (S(T|rho) + S(rho|T))
        tau = np.diag([0.85, 0.15]).astype(complex)
        sys = qrm.QrmSystem(np.diag([0.0, 1.0]), (qrm.ResetChannel(tau, 0.9),))
        assert qrm.detailed_balance(sys)
        rho = random_density(rng, 2)
        val = entropy.ep_single(lambda r: qrm.apply_generator(sys, r), rho, qrm.steady_state(sys))
        expected = 0.9 * (
            entropy.relative_entropy(tau, rho) + entropy.relative_entropy(rho, tau)
        )
        assert_allclose(val, expected, atol=1e-10)

    def test_rejects_singular_state(self, rng):
        tau = random_density(rng, 2)
        sys = qrm.QrmSystem(np.zeros((2, 2)), (qrm.ResetChannel(tau, 1.0),))
        with pytest.raises(ContractError):
            entropy.ep_single(
                lambda r: qrm.apply_generator(sys, r), np.diag([1.0, 0.0]), tau
            )
