import numpy as np
import pytest

from royexact.matrix_core import (
    DomainError,
    RankDeficient,
    pfaffian,
    pfaffian_sign_logmag,
    pseudoinverse,
    reg_inc_beta,
    reg_inc_gamma,
    sym_eigen_rank,
)


class TestSymEigenRank:
    def test_identity_factor(self):
        H, L = sym_eigen_rank(np.eye(3))
        np.testing.assert_allclose(H, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(L, np.ones(3), atol=1e-14)

    def test_unit_vector(self):
        z = np.zeros((7, 1))
        z[0, 0] = 1.0
        H, L = sym_eigen_rank(z)
        np.testing.assert_allclose(H, z, atol=1e-14)
        np.testing.assert_allclose(L, [1.0], atol=1e-14)

    def test_reconstructs_gram_matrix(self):
        # oracle: direct dense eigendecomposition of Z Z^T
        rng = np.random.default_rng(5)
        Z = rng.standard_normal((50, 10))
        H, L = sym_eigen_rank(Z)
        A = Z @ Z.T
        np.testing.assert_allclose(
            H @ np.diag(L) @ H.T, A, atol=1e-8 * np.linalg.norm(A))
        w = np.linalg.eigvalsh(A)[::-1][:10]
        np.testing.assert_allclose(L, w, rtol=1e-10)

    @pytest.mark.parametrize("p,n,seed", [(40, 6, 0), (200, 50, 1), (2000, 100, 2)])
    def test_orthonormal_columns(self, p, n, seed):
        Z = np.random.default_rng(seed).standard_normal((p, n))
        H, L = sym_eigen_rank(Z)
        np.testing.assert_allclose(H.T @ H, np.eye(n), atol=1e-10)
        assert np.all(L > 0) and np.all(np.diff(L) <= 0)

    def test_rank_deficient_raises(self):
        Z = np.ones((20, 3))  # columns identical
        with pytest.raises(RankDeficient):
            sym_eigen_rank(Z)

    def test_wide_factor_rejected(self):
        with pytest.raises(DomainError):
            sym_eigen_rank(np.ones((2, 5)))


class TestPseudoinverse:
    def test_identity(self):
        np.testing.assert_allclose(pseudoinverse(np.eye(5)), np.eye(5), atol=1e-14)

    def test_rank_one_projector_is_fixed_point(self):
        v = np.array([1.0, 2.0, 2.0]) / 3.0
        P = np.outer(v, v)
        np.testing.assert_allclose(pseudoinverse(P), P, atol=1e-12)

    def test_moore_penrose_property(self):
        rng = np.random.default_rng(7)
        Z = rng.standard_normal((20, 8))
        M = Z @ Z.T  # rank 8 PSD
        Mp = pseudoinverse(M)
        err = np.linalg.norm(M @ Mp @ M - M) / np.linalg.norm(M)
        assert err <= 1e-10

    @pytest.mark.parametrize("seed", range(12))
    def test_all_four_identities(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = rng.integers(3, 25)
        r = rng.integers(1, n + 1)
        Z = rng.standard_normal((n, r))
        M = Z @ Z.T
        Mp = pseudoinverse(M)
        scale = np.linalg.norm(M)
        assert np.linalg.norm(M @ Mp @ M - M) <= 1e-9 * scale
        assert np.linalg.norm(Mp @ M @ Mp - Mp) <= 1e-9 * np.linalg.norm(Mp)
        assert np.linalg.norm((M @ Mp).T - M @ Mp) <= 1e-9
        assert np.linalg.norm((Mp @ M).T - Mp @ M) <= 1e-9

    def test_zero_matrix(self):
        np.testing.assert_array_equal(pseudoinverse(np.zeros((4, 4))), np.zeros((4, 4)))

    def test_asymmetric_rejected(self):
        M = np.arange(9.0).reshape(3, 3)
        with pytest.raises(DomainError):
            pseudoinverse(M)


class TestPfaffian:
    def test_two_by_two(self):
        a = 1.375
        assert pfaffian(np.array([[0.0, a], [-a, 0.0]])) == pytest.approx(a, rel=1e-14)

    def test_block_diagonal_canonical_form(self):
        S = np.zeros((4, 4))
        S[0, 1], S[1, 0] = 2.0, -2.0
        S[2, 3], S[3, 2] = 3.0, -3.0
        assert pfaffian(S) == pytest.approx(6.0, rel=1e-13)

    def test_squares_to_determinant(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((8, 8))
        S = M - M.T
        pf = pfaffian(S)
        assert pf**2 == pytest.approx(np.linalg.det(S), rel=1e-8)

    @pytest.mark.parametrize("n", range(2, 42, 2))
    def test_square_identity_over_orders(self, n):
        rng = np.random.default_rng(n)
        M = rng.standard_normal((n, n))
        S = M - M.T
        sign, logmag = pfaffian_sign_logmag(S)
        logdet = np.linalg.slogdet(S)[1]
        assert 2.0 * logmag == pytest.approx(logdet, abs=1e-8)
        assert sign in (-1.0, 1.0)

    def test_row_column_swap_flips_sign(self):
        rng = np.random.default_rng(11)
        M = rng.standard_normal((10, 10))
        S = M - M.T
        P = S.copy()
        P[[2, 7], :] = P[[7, 2], :]
        P[:, [2, 7]] = P[:, [7, 2]]
        assert pfaffian(P) == pytest.approx(-pfaffian(S), rel=1e-12)

    def test_odd_order_bordering_convention(self):
        # odd input is bordered by the first standard basis vector
        rng = np.random.default_rng(13)
        M = rng.standard_normal((5, 5))
        S = M - M.T
        B = np.zeros((6, 6))
        B[:5, :5] = S
        B[0, 5], B[5, 0] = 1.0, -1.0
        assert pfaffian(S) == pytest.approx(pfaffian(B), rel=1e-12)

    def test_odd_one_by_one(self):
        assert pfaffian(np.zeros((1, 1))) == pytest.approx(1.0)

    def test_singular_even_matrix(self):
        assert pfaffian(np.zeros((4, 4))) == 0.0

    def test_not_skew_rejected(self):
        with pytest.raises(DomainError):
            pfaffian(np.eye(4))


class TestRegIncBeta:
    def test_uniform_cdf(self):
        for x in np.linspace(0.0, 1.0, 11):
            assert reg_inc_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-14)

    def test_beta22_symmetry_point(self):
        assert reg_inc_beta(2.0, 2.0, 0.5) == pytest.approx(0.5, abs=1e-14)

    def test_against_quadrature_oracle(self):
        # frozen: quad of t^2.5 (1-t)^6.25 over [0, 0.3], normalized over [0, 1]
        assert reg_inc_beta(3.5, 7.25, 0.3) == pytest.approx(
            0.4599498772165031, abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_reflection_identity(self, seed):
        rng = np.random.default_rng(40 + seed)
        a, b = rng.uniform(0.2, 20.0, 2)
        x = rng.uniform(0.0, 1.0)
        assert reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x) == pytest.approx(
            1.0, abs=1e-12)

    def test_endpoints_and_monotone(self):
        vals = [reg_inc_beta(2.5, 4.0, x) for x in np.linspace(0, 1, 33)]
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert np.all(np.diff(vals) >= 0)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            reg_inc_beta(0.0, 1.0, 0.5)
        with pytest.raises(DomainError):
            reg_inc_beta(1.0, -1.0, 0.5)
        with pytest.raises(DomainError):
            reg_inc_beta(1.0, 1.0, 1.5)


class TestRegIncGamma:
    def test_exponential_cdf(self):
        for x in [0.0, 0.3, 1.0, 4.5]:
            assert reg_inc_gamma(1.0, x) == pytest.approx(1.0 - np.exp(-x), abs=1e-13)

    def test_zero_at_origin(self):
        assert reg_inc_gamma(0.5, 0.0) == 0.0

    def test_against_quadrature_oracle(self):
        # frozen: quad of t^1.5 e^-t over [0, 1.7] / Gamma(2.5)
        assert reg_inc_gamma(2.5, 1.7) == pytest.approx(0.36143007689620477, abs=1e-12)

    def test_monotone_with_unit_limit(self):
        vals = [reg_inc_gamma(3.0, x) for x in np.linspace(0, 40, 60)]
        assert np.all(np.diff(vals) >= 0)
        assert vals[-1] == pytest.approx(1.0, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            reg_inc_gamma(-1.0, 1.0)
        with pytest.raises(DomainError):
            reg_inc_gamma(1.0, -0.1)
