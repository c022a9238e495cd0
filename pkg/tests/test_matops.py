import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_density, random_hermitian, random_qrm
from qrmlab import matops, qrm
from qrmlab.errors import ContractError, DegeneracyError, DimensionError


def brute_kron(a, b):
    """Index-by-index tensor product, independent of np.kron."""
    da, db = a.shape[0], b.shape[0]
    out = np.zeros((da * db, da * db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    out[i * db + k, j * db + l] = a[i, j] * b[k, l]
    return out


def brute_partial_trace_last(x, d_keep, d_drop):
    """Explicit index-sum partial trace over the trailing factor."""
    out = np.zeros((d_keep, d_keep), dtype=complex)
    for i in range(d_keep):
        for j in range(d_keep):
            for k in range(d_drop):
                out[i, j] += x[i * d_drop + k, j * d_drop + k]
    return out


class TestKron:
    def test_identity(self):
        assert_allclose(matops.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal_structure(self):
        t = 0.3
        out = matops.kron(np.diag([t, 1 - t]), np.eye(2))
        assert_allclose(np.diag(out), [t, t, 1 - t, 1 - t])

    def test_three_factor_product_matches_expansion(self, rng):
        tau_a = random_density(rng, 2)
        rho_c = random_density(rng, 2)
        tau_b = random_density(rng, 2)
        built = matops.kron_all([tau_a, rho_c, tau_b])
        oracle = brute_kron(brute_kron(tau_a, rho_c), tau_b)
        assert_allclose(built, oracle, atol=1e-15)


class TestPartialTrace:
    def test_product_state(self, rng):
        a = random_density(rng, 2)
        b = random_density(rng, 3)
        out = matops.partial_trace(matops.kron(a, b), (2, 3), keep=(0,))
        assert_allclose(out, a * np.trace(b), atol=1e-14)

    def test_drops_unit_trace_factor(self, rng):
        tau_a = random_density(rng, 2)
        rest = matops.kron(random_density(rng, 2), random_density(rng, 2))
        full = matops.kron(tau_a, rest)
        assert_allclose(matops.partial_trace(full, (2, 2, 2), keep=(1, 2)), rest, atol=1e-14)

    def test_trace_everything(self, rng):
        x = random_density(rng, 4)
        out = matops.partial_trace(x, (2, 2), keep=())
        assert out.shape == (1, 1)
        assert_allclose(out[0, 0], np.trace(x), atol=1e-14)

    def test_matches_brute_force(self, rng):
        x = random_hermitian(rng, 6)
        out = matops.partial_trace(x, (2, 3), keep=(0,))
        assert_allclose(out, brute_partial_trace_last(x, 2, 3), atol=1e-14)

    def test_composition_order(self, rng):
        x = random_hermitian(rng, 8)
        via_b = matops.partial_trace(x, (2, 2, 2), keep=(0, 1))
        both = matops.partial_trace(via_b, (2, 2), keep=(1,))
        direct = matops.partial_trace(x, (2, 2, 2), keep=(1,))
        assert_allclose(both, direct, atol=1e-13)
        via_a = matops.partial_trace(x, (2, 2, 2), keep=(1, 2))
        assert_allclose(
            matops.partial_trace(via_a, (2, 2), keep=(0,)), direct, atol=1e-13
        )

    def test_preserves_trace(self, rng):
        x = random_hermitian(rng, 8)
        out = matops.partial_trace(x, (2, 4), keep=(1,))
        assert_allclose(np.trace(out), np.trace(x), atol=1e-13)

    def test_inconsistent_dims(self):
        with pytest.raises(DimensionError):
            matops.partial_trace(np.eye(6), (2, 2), keep=(0,))


class TestHermitianSpectral:
    def test_clustering(self):
        eps = 1e-12
        dec = matops.hermitian_spectral(np.diag([0.0, eps, 1.0]), cluster_tol=1e-9)
        assert len(dec.projectors) == 2
        ranks = sorted(int(round(np.trace(p).real)) for p in dec.projectors)
        assert ranks == [1, 2]

    def test_identity(self):
        dec = matops.hermitian_spectral(np.eye(3))
        assert len(dec.projectors) == 1
        assert_allclose(dec.projectors[0], np.eye(3), atol=1e-14)

    def test_diagonal_qubit_hamiltonian(self):
        dec = matops.hermitian_spectral(np.diag([0.0, 1.3]))
        assert_allclose(dec.projectors[0], np.diag([1.0, 0.0]), atol=1e-14)
        assert_allclose(dec.projectors[1], np.diag([0.0, 1.0]), atol=1e-14)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_reconstruction_and_orthogonality(self, rng, d):
        x = random_hermitian(rng, d)
        dec = matops.hermitian_spectral(x)
        assert_allclose(dec.reconstruct(), x, atol=1e-10)
        total = sum(dec.projectors)
        assert_allclose(total, np.eye(d), atol=1e-10)
        for i, p in enumerate(dec.projectors):
            for j, q in enumerate(dec.projectors):
                expected = p if i == j else np.zeros_like(p)
                assert_allclose(p @ q, expected, atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractError):
            matops.hermitian_spectral(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestMatrixFunctionPsd:
    def test_log_identity(self):
        assert_allclose(matops.logm_psd(np.eye(3)), np.zeros((3, 3)), atol=1e-14)

    def test_log_diagonal(self):
        t = 0.7
        out = matops.logm_psd(np.diag([t, 1 - t]))
        assert_allclose(out, np.diag([np.log(t), np.log(1 - t)]), atol=1e-14)

    def test_sqrt_squares_back(self, rng):
        tau = random_density(rng, 4)
        root = matops.sqrtm_psd(tau)
        assert_allclose(root @ root, tau, atol=1e-12)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ContractError):
            matops.matrix_function_psd(np.diag([1.0, -0.5]), np.log)


class TestVectorizeMap:
    def test_identity_map(self):
        s = matops.vectorize_map(lambda x: x, 3)
        assert_allclose(s.matrix, np.eye(9), atol=1e-14)

    def test_commutator_with_diagonal_h(self):
        e1, e2 = 0.3, 1.1
        h = np.diag([e1, e2])
        s = matops.vectorize_map(lambda x: h @ x - x @ h, 2)
        expected = np.diag([0.0, e2 - e1, e1 - e2, 0.0])
        assert_allclose(s.matrix, expected, atol=1e-14)

    def test_apply_matches_action(self, rng):
        sys = random_qrm(rng, 3)
        s = matops.vectorize_map(lambda x: qrm.apply_generator(sys, x), 3)
        for _ in range(20):
            x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            assert_allclose(s.apply(x), qrm.apply_generator(sys, x), atol=1e-12)

    def test_rejects_nonlinear_action(self):
        with pytest.raises(ContractError):
            matops.vectorize_map(lambda x: x @ x, 2)


class TestNullspaceUnique:
    def test_commuting_reset_state_is_fixed(self, rng):
        h = np.diag([0.0, 1.0, 2.0])
        t = np.diag([0.5, 0.3, 0.2]).astype(complex)
        sys = qrm.QrmSystem(h, (qrm.ResetChannel(t, 0.8),))
        s = matops.vectorize_map(lambda x: qrm.apply_generator(sys, x), 3)
        assert_allclose(matops.nullspace_unique(s), t, atol=1e-12)

    def test_random_qrm_matches_resolvent(self, rng):
        sys = random_qrm(rng, 3)
        s = matops.vectorize_map(lambda x: qrm.apply_generator(sys, x), 3)
        assert matops.trace_distance(matops.nullspace_unique(s), qrm.steady_state(sys)) < 1e-10

    def test_degenerate_kernel_raises(self):
        s = matops.Superoperator(2, np.zeros((4, 4), dtype=complex))
        with pytest.raises(DegeneracyError):
            matops.nullspace_unique(s)


class TestTraceDistance:
    def test_zero_on_equal(self, rng):
        rho = random_density(rng, 3)
        assert matops.trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        a = np.diag([1.0, 0.0])
        b = np.diag([0.0, 1.0])
        assert_allclose(matops.trace_distance(a, b), 1.0, atol=1e-14)

    def test_triangle_inequality(self, rng):
        for _ in range(10):
            a, b, c = (random_density(rng, 3) for _ in range(3))
            dab = matops.trace_distance(a, b)
            assert dab >= 0
            assert_allclose(dab, matops.trace_distance(b, a), atol=1e-14)
            assert dab <= matops.trace_distance(a, c) + matops.trace_distance(c, b) + 1e-12
