import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn, random_hermitian, random_pd
from irs_wiretap.numerics import (DimensionError, IllConditionedError, NotHermitianError,
                                  NotPositiveDefiniteError, hermitian_evd, inv_sqrt_hpd,
                                  logdet_pd, sqrtm_psd)

seeds = st.integers(0, 2 ** 32 - 1)
sizes = st.integers(1, 6)


def fro_rel(A, B):
    return np.linalg.norm(A - B) / max(np.linalg.norm(B), 1e-300)


class TestHermitianEvd:
    def test_identity(self):
        U, w = hermitian_evd(np.eye(3))
        assert np.allclose(w, [1, 1, 1])
        assert np.allclose(U.conj().T @ U, np.eye(3), atol=1e-12)

    def test_diagonal_descending_without_permutation(self):
        U, w = hermitian_evd(np.diag([2.0, 5.0]))
        assert np.allclose(w, [5, 2])
        # descending order swaps the axes; the phase convention makes entries +1
        assert np.allclose(U, [[0, 1], [1, 0]])
        U, w = hermitian_evd(np.diag([5.0, 2.0]))
        assert np.allclose(U, np.eye(2))

    def test_random_reconstruction(self, rng):
        M = random_hermitian(rng, 4)
        U, w = hermitian_evd(M)
        assert fro_rel(U @ np.diag(w) @ U.conj().T, M) < 1e-10
        assert np.linalg.norm(U.conj().T @ U - np.eye(4)) < 1e-10

    @given(seed=seeds, n=sizes)
    def test_properties(self, seed, n):
        M = random_hermitian(np.random.default_rng(seed), n)
        U, w = hermitian_evd(M)
        assert fro_rel(U @ np.diag(w) @ U.conj().T, M) < 1e-10
        assert np.linalg.norm(U.conj().T @ U - np.eye(n)) < 1e-10
        assert np.all(np.diff(w) <= 0)
        # largest-magnitude component of every eigenvector is real positive
        pivots = U[np.argmax(np.abs(U), axis=0), np.arange(n)]
        assert np.all(pivots.real > 0)
        assert np.allclose(pivots.imag, 0, atol=1e-14)

    def test_deterministic(self, rng):
        M = random_hermitian(rng, 5)
        a, b = hermitian_evd(M), hermitian_evd(M.copy())
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            hermitian_evd(np.zeros((2, 3)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_evd(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestLogdet:
    @pytest.mark.parametrize("n", [1, 2, 7])
    def test_identity(self, n):
        assert logdet_pd(np.eye(n)) == 0.0

    def test_log_of_product(self):
        assert logdet_pd(np.diag([np.e, np.e ** 2])) == pytest.approx(3.0, abs=1e-14)

    def test_matches_eigenvalues(self, rng):
        M = random_pd(rng, 5)
        _, w = hermitian_evd(M)
        assert abs(logdet_pd(M) - np.sum(np.log(w))) < 1e-10

    @given(seed=seeds, n=sizes)
    def test_exp_matches_eigenvalue_product(self, seed, n):
        M = random_pd(np.random.default_rng(seed), n)
        _, w = hermitian_evd(M)
        assert np.exp(logdet_pd(M)) == pytest.approx(np.prod(w), rel=1e-8)

    def test_empty(self):
        assert logdet_pd(np.zeros((0, 0))) == 0.0

    @pytest.mark.parametrize("M", [np.diag([1.0, -1.0]), np.zeros((2, 2)), np.diag([1.0, 0.0])])
    def test_not_pd(self, M):
        with pytest.raises(NotPositiveDefiniteError):
            logdet_pd(M)


class TestInvSqrt:
    def test_identity(self):
        assert np.allclose(inv_sqrt_hpd(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        assert np.allclose(inv_sqrt_hpd(np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]), atol=1e-15)

    def test_sandwich(self, rng):
        M = random_pd(rng, 4)
        T = inv_sqrt_hpd(M)
        assert np.linalg.norm(T @ M @ T - np.eye(4)) < 1e-9

    @given(seed=seeds, n=sizes)
    def test_properties(self, seed, n):
        M = random_pd(np.random.default_rng(seed), n)
        T = inv_sqrt_hpd(M)
        assert np.allclose(T, T.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(T)[0] > 0
        assert np.linalg.norm(T @ M @ T - np.eye(n)) < 1e-9
        assert np.linalg.norm(T @ M - M @ T) < 1e-9 * max(1.0, np.linalg.norm(M))

    def test_ill_conditioned(self):
        with pytest.raises(IllConditionedError):
            inv_sqrt_hpd(np.diag([1.0, 1e-15]))
        with pytest.raises(IllConditionedError):
            inv_sqrt_hpd(np.diag([1.0, 0.0]))


class TestSqrtPsd:
    def test_rank_deficient(self, rng):
        a = crandn(rng, 3, 1)
        M = a @ a.conj().T
        S = sqrtm_psd(M)
        assert np.linalg.norm(S @ S - M) < 1e-12 * np.linalg.norm(M) + 1e-14

    def test_clamps_roundoff(self):
        S = sqrtm_psd(np.diag([1.0, -1e-13]))
        assert np.allclose(S, np.diag([1.0, 0.0]))

    def test_rejects_negative(self):
        with pytest.raises(NotPositiveDefiniteError):
            sqrtm_psd(np.diag([1.0, -1e-3]))
