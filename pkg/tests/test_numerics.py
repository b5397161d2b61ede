import numpy as np
import pytest

from irmite.errors import InvalidArg, NotPD, NotPSD, SingularInput
from irmite.numerics import Rng, cholesky, derive_seed, qr_orthonormal, solve_spd


class TestRng:
    def test_uniform_range(self):
        u = Rng(3).uniform(0.0, 1.0, 3)
        assert u.shape == (3,)
        assert np.all((u >= 0.0) & (u < 1.0))

    def test_uniform_determinism(self):
        assert np.array_equal(Rng(3).uniform(0, 1, 3), Rng(3).uniform(0, 1, 3))

    def test_uniform_mean(self):
        u = Rng(11).uniform(-1.0, 1.0, 10_000)
        assert abs(u.mean()) < 0.05

    def test_uniform_bad_args(self):
        with pytest.raises(InvalidArg):
            Rng(0).uniform(1.0, 0.0, 5)
        with pytest.raises(InvalidArg):
            Rng(0).uniform(0.0, 1.0, 0)

    def test_normal_moments(self):
        z = Rng(5).normal(10_000)
        assert abs(z.mean()) < 0.05
        assert abs(z.var() - 1.0) < 0.1

    def test_normal_determinism(self):
        assert Rng(7).normal(1)[0] == Rng(7).normal(1)[0]

    def test_normal_zero_rejected(self):
        with pytest.raises(InvalidArg):
            Rng(7).normal(0)

    def test_bernoulli_endpoints(self):
        assert np.array_equal(Rng(1).bernoulli(0.0, 5), np.zeros(5))
        assert np.array_equal(Rng(1).bernoulli(1.0, 5), np.ones(5))

    def test_bernoulli_concentration(self):
        frac = Rng(9).bernoulli(0.5, 10_000).mean()
        assert abs(frac - 0.5) < 0.02

    def test_bernoulli_bad_p(self):
        with pytest.raises(InvalidArg):
            Rng(0).bernoulli(1.5, 3)

    def test_split_is_deterministic_and_distinct(self):
        r = Rng(42)
        a = r.split("a").normal(4)
        b = r.split("b").normal(4)
        assert np.array_equal(a, Rng(42).split("a").normal(4))
        assert not np.array_equal(a, b)

    def test_derive_seed_stable(self):
        assert derive_seed(42, "x") == derive_seed(42, "x")
        assert derive_seed(42, "x") != derive_seed(42, "y")

    def test_split_does_not_consume_parent_stream(self):
        r1 = Rng(5)
        r1.split("child")
        r2 = Rng(5)
        assert np.array_equal(r1.normal(3), r2.normal(3))


class TestQrOrthonormal:
    def test_identity(self):
        q = qr_orthonormal(np.eye(4))
        assert np.allclose(np.abs(q), np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 5, 10, 25, 50])
    def test_orthonormality(self, d):
        q = qr_orthonormal(Rng(d).normal_matrix(d, d))
        assert np.max(np.abs(q.T @ q - np.eye(d))) <= 1e-10

    def test_determinant_magnitude(self):
        q = qr_orthonormal(Rng(77).normal_matrix(3, 3))
        assert abs(abs(np.linalg.det(q)) - 1.0) <= 1e-10

    def test_singular_input(self):
        g = np.ones((3, 3))
        with pytest.raises(SingularInput):
            qr_orthonormal(g)

    def test_non_square_rejected(self):
        with pytest.raises(InvalidArg):
            qr_orthonormal(np.ones((2, 3)))


class TestCholesky:
    def test_identity(self):
        assert np.allclose(cholesky(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        assert np.allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reconstruction(self):
        g = Rng(13).normal_matrix(6, 6)
        sigma = g @ g.T + 0.1 * np.eye(6)
        l = cholesky(sigma)
        assert np.max(np.abs(l @ l.T - sigma)) <= 1e-8

    def test_rounding_noise_jittered(self):
        # symmetric with a ~ -1e-12 eigenvalue: within the jitter tolerance
        q = qr_orthonormal(Rng(4).normal_matrix(3, 3))
        sigma = (q * np.array([1.0, 0.5, -1e-12])) @ q.T
        sigma = 0.5 * (sigma + sigma.T)
        l = cholesky(sigma)
        assert np.max(np.abs(l @ l.T - sigma)) <= 1e-8

    def test_not_psd(self):
        with pytest.raises(NotPSD):
            cholesky(np.diag([1.0, -0.5]))


class TestSolveSpd:
    def test_identity(self):
        b = np.array([1.0, -2.0, 3.0])
        assert np.allclose(solve_spd(np.eye(3), b), b)

    def test_diagonal(self):
        x = solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 8.0]))
        assert np.allclose(x, [1.0, 2.0])

    def test_residual_bound(self):
        g = Rng(21).normal_matrix(8, 8)
        a = g @ g.T + 0.5 * np.eye(8)
        b = Rng(22).normal(8)
        x = solve_spd(a, b)
        resid = np.max(np.abs(a @ x - b))
        assert resid <= 1e-8 * (1.0 + np.max(np.abs(b)))

    def test_agrees_with_cholesky_substitution(self):
        g = Rng(31).normal_matrix(5, 5)
        a = g @ g.T + np.eye(5)
        b = Rng(32).normal(5)
        l = cholesky(a)
        via_chol = np.linalg.solve(l.T, np.linalg.solve(l, b))
        assert np.max(np.abs(solve_spd(a, b) - via_chol)) <= 1e-8

    def test_not_pd(self):
        with pytest.raises(NotPD):
            solve_spd(np.diag([1.0, 0.0]), np.array([1.0, 1.0]))
