import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixhc import matcore
from matrixhc.errors import NumericalError
from matrixhc.matcore import DensityMatrix, Povm, helstrom_bias, schatten_norm, trace_norm
from matrixhc.rng import make_rng

from oracles import charpoly_eval, hermitian_spectrum, power_singular_values, projector_bias


def random_hermitian(rng, d):
    G = matcore.random_ginibre(rng, d)
    return (G + G.conj().T) / 2


class TestEigenvalues:
    def test_identity(self):
        np.testing.assert_array_equal(matcore.hermitian_eigenvalues(np.eye(3)), [1, 1, 1])

    def test_diagonal_sorted_descending(self):
        np.testing.assert_allclose(matcore.hermitian_eigenvalues(np.diag([2.0, -5.0, 0.0])), [2, 0, -5], atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_against_characteristic_polynomial(self, seed):
        M = random_hermitian(make_rng(seed), 6)
        lam = matcore.hermitian_eigenvalues(M)
        assert abs(lam.sum() - np.trace(M).real) <= 1e-10
        scale = np.abs(lam).max() ** 6
        for t in lam:
            assert abs(charpoly_eval(M, t)) <= 1e-8 * scale
        np.testing.assert_allclose(lam, hermitian_spectrum(M), atol=1e-7)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            matcore.hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            matcore.as_matrix(np.zeros((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises((ValueError, NumericalError)):
            matcore.singular_values(np.array([[np.nan, 0], [0, 1]]))


class TestSingularValues:
    def test_identity(self):
        np.testing.assert_array_equal(matcore.singular_values(np.eye(4)), [1, 1, 1, 1])

    def test_diagonal(self):
        np.testing.assert_allclose(matcore.singular_values(np.diag([3.0, -4.0])), [4, 3])

    @pytest.mark.parametrize("seed", range(3))
    def test_random_against_power_iteration(self, seed):
        M = matcore.random_ginibre(make_rng(seed), 5)
        np.testing.assert_allclose(matcore.singular_values(M), power_singular_values(M), rtol=1e-6, atol=1e-8)

    def test_batch_matches_single(self):
        stack = matcore.random_ginibre(make_rng(3), 4, size=(6,))
        batch = matcore.batch_singular_values(stack)
        for M, s in zip(stack, batch):
            np.testing.assert_allclose(s, matcore.singular_values(M), atol=1e-12)


class TestNorms:
    def test_pure_state(self):
        v = np.zeros(8)
        v[3] = 1
        assert schatten_norm(np.outer(v, v), 1.5) == pytest.approx((1 / 8) ** (1 / 1.5), rel=1e-14)

    @pytest.mark.parametrize("d", [1, 3, 7])
    @pytest.mark.parametrize("p", [1.0, 1.3, 2.0, 5.0, np.inf])
    def test_identity_is_one(self, d, p):
        assert schatten_norm(np.eye(d), p) == pytest.approx(1.0, abs=1e-14)

    def test_infinity_is_operator_norm(self):
        M = matcore.random_ginibre(make_rng(1), 4)
        assert schatten_norm(M, np.inf) == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)

    def test_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            schatten_norm(np.eye(2), 0.5)

    def test_trace_norm_examples(self):
        rho = matcore.random_density(make_rng(2), 5)
        assert trace_norm(rho) == pytest.approx(1.0, abs=1e-12)
        assert trace_norm(np.diag([1.0, -1.0]) / 2) == pytest.approx(1.0)

    def test_trace_norm_random_hermitian(self):
        M = random_hermitian(make_rng(4), 6)
        assert trace_norm(M) == pytest.approx(np.abs(hermitian_spectrum(M)).sum(), rel=1e-8)

    def test_trace_norm_is_d_times_normalized_one_norm(self):
        M = matcore.random_ginibre(make_rng(5), 6)
        assert trace_norm(M) == pytest.approx(6 * schatten_norm(M, 1), rel=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 8),
           p=st.floats(1, 4), q=st.floats(1, 4))
    def test_nondecreasing_in_p(self, seed, d, p, q):
        M = matcore.random_ginibre(make_rng(seed), d)
        lo, hi = sorted((p, q))
        assert schatten_norm(M, lo) <= schatten_norm(M, hi) * (1 + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6), p=st.floats(1, 3))
    def test_unitary_invariance(self, seed, d, p):
        rng = make_rng(seed)
        M = matcore.random_ginibre(rng, d)
        U, V = matcore.random_unitary(rng, d), matcore.random_unitary(rng, d)
        assert schatten_norm(U @ M @ V, p) == pytest.approx(schatten_norm(M, p), rel=1e-10)


class TestStatesAndMeasurements:
    def test_density_validation(self):
        DensityMatrix(np.eye(2) / 2)
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(2))
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_povm_validation(self):
        Povm((np.eye(2), np.zeros((2, 2))))
        with pytest.raises(ValueError):
            Povm((np.eye(2), np.eye(2)))
        with pytest.raises(ValueError):
            Povm((np.diag([2.0, 1.0]), np.diag([-1.0, 0.0])))

    def test_random_povm_probabilities_sum_to_one(self):
        rng = make_rng(6)
        povm = Povm(tuple(matcore.random_povm(rng, 4, 3)))
        probs = povm.probabilities(matcore.random_density(rng, 4))
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(probs >= -1e-12)


class TestHelstrom:
    def test_equal_states(self):
        rho = matcore.random_density(make_rng(0), 3)
        bias, _ = helstrom_bias(rho, rho)
        assert bias == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        bias, povm = helstrom_bias(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert bias == pytest.approx(1.0)
        np.testing.assert_allclose(povm.outcomes[0], np.diag([1.0, 0.0]), atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_returned_measurement_achieves_bias(self, seed):
        rng = make_rng(seed)
        rho0, rho1 = matcore.random_density(rng, 4), matcore.random_density(rng, 4)
        bias, povm = helstrom_bias(rho0, rho1)
        assert projector_bias(rho0, rho1, povm.outcomes[0]) == pytest.approx(bias, abs=1e-9)
        assert bias == pytest.approx(0.5 * np.abs(hermitian_spectrum(rho0 - rho1)).sum(), abs=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_no_random_projector_beats_it(self, seed):
        rng = make_rng(seed)
        rho0, rho1 = matcore.random_density(rng, 3), matcore.random_density(rng, 3)
        bias, _ = helstrom_bias(rho0, rho1)
        for _ in range(50):
            U = matcore.random_unitary(rng, 3)
            r = int(rng.integers(0, 4))
            E0 = U[:, :r] @ U[:, :r].conj().T
            assert projector_bias(rho0, rho1, E0) <= bias + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            helstrom_bias(np.eye(2) / 2, np.eye(3) / 3)
