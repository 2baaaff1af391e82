import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopx.functions import (
    L1Norm,
    LinearFunction,
    PointIndicator,
    QuadraticFunction,
    logsumexp_instance,
    prox_l1,
    prox_linear,
    prox_point,
    prox_quadratic,
)

from conftest import psd_quadratic


def catalog(rng, n):
    return {
        "quadratic": psd_quadratic(rng, n),
        "quadratic-lowrank": psd_quadratic(rng, n, rank=1),
        "l1": L1Norm(n),
        "linear": LinearFunction(rng.standard_normal(n)),
        "point": PointIndicator(rng.standard_normal(n)),
    }


class TestQuadraticProx:
    def test_zero_matrix_is_linear_prox(self, rng):
        b, c = rng.standard_normal(3), rng.standard_normal(3)
        q = QuadraticFunction(np.zeros((3, 3)), b)
        np.testing.assert_allclose(prox_quadratic(q, 0.7, c), c - 0.7 * b, atol=1e-15)

    def test_identity(self, rng):
        c = rng.standard_normal(4)
        q = QuadraticFunction(np.eye(4), np.zeros(4))
        np.testing.assert_allclose(q.prox(1.0, c), c / 2, rtol=1e-14)

    def test_two_by_two(self):
        # [[2, 0], [0, 1.5]] y = (0.5, 1.5) solved by hand
        q = QuadraticFunction([[2.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
        np.testing.assert_allclose(q.prox(0.5, [1.0, 1.0]), [0.25, 1.0], rtol=1e-14)

    def test_t_zero_is_identity(self, rng):
        q = psd_quadratic(rng, 5)
        c = rng.standard_normal(5)
        np.testing.assert_array_equal(q.prox(0.0, c), c)

    def test_stationary_center_is_exact(self, rng):
        q0 = psd_quadratic(rng, 6)
        c = rng.standard_normal(6)
        q = QuadraticFunction(q0.A, -(q0.A @ c))
        np.testing.assert_array_equal(q.prox(3.7, c), c)

    def test_matches_dense_solve(self, rng):
        q = psd_quadratic(rng, 8)
        c = rng.standard_normal(8)
        for t in (1e-6, 0.3, 10.0, 1e6):
            y = np.linalg.solve(np.eye(8) + t * q.A, c - t * q.b)
            np.testing.assert_allclose(q.prox(t, c), y, rtol=1e-8, atol=1e-12)

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="semidefinite"):
            QuadraticFunction([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            QuadraticFunction([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0])

    def test_clamps_roundoff_eigenvalues(self):
        q = QuadraticFunction([[1.0, 1.0], [1.0, 1.0 - 1e-13]], [0.0, 0.0])
        assert q.eigenvalues.min() >= 0.0

    def test_negative_t(self, rng):
        with pytest.raises(ValueError):
            psd_quadratic(rng, 2).prox(-1.0, np.zeros(2))


class TestSimpleProx:
    @pytest.mark.parametrize("t,c,expected", [
        (1.0, [2.0, -0.5, 0.0], [1.0, 0.0, 0.0]),
        (0.0, [2.0, -0.5, 0.0], [2.0, -0.5, 0.0]),
        (0.5, [1.0, -2.0], [0.5, -1.5]),
    ])
    def test_soft_threshold(self, t, c, expected):
        np.testing.assert_array_equal(prox_l1(t, c), expected)

    @pytest.mark.parametrize("a,t,c,expected", [
        ([1.0, 2.0], 0.0, [3.0, 4.0], [3.0, 4.0]),
        ([0.0, 0.0], 5.0, [3.0, 4.0], [3.0, 4.0]),
        ([1.0, 2.0], 2.0, [0.0, 0.0], [-2.0, -4.0]),
    ])
    def test_linear(self, a, t, c, expected):
        np.testing.assert_array_equal(prox_linear(a, t, c), expected)

    @pytest.mark.parametrize("t", [1.0, 1e-9, 0.0])
    def test_point(self, t):
        b = np.array([1.0, -1.0])
        np.testing.assert_array_equal(prox_point(b, t, [5.0, 5.0]), b)
        np.testing.assert_array_equal(prox_point(b, t, b), b)


class TestProxProperties:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_firmly_nonexpansive(self, seed, t):
        rng = np.random.default_rng(seed)
        for name, f in catalog(rng, 5).items():
            c1, c2 = 3 * rng.standard_normal(5), 3 * rng.standard_normal(5)
            d = f.prox(t, c1) - f.prox(t, c2)
            assert d @ d <= d @ (c1 - c2) + 1e-10, name

    @pytest.mark.parametrize("t", [0.05, 1.0, 20.0])
    def test_prox_is_optimal(self, rng, t):
        for name, f in catalog(rng, 4).items():
            c = 2 * rng.standard_normal(4)
            z = f.prox(t, c)
            fz = f(z) + (z - c) @ (z - c) / (2 * t)
            ys = z + rng.standard_normal((100, 4)) * rng.uniform(1e-4, 2, size=(100, 1))
            for y in ys:
                assert fz <= f(y) + (y - c) @ (y - c) / (2 * t) + 1e-10, name

    def test_prox_at_zero_t_is_identity(self, rng):
        for name, f in catalog(rng, 3).items():
            if name == "point":
                continue
            c = rng.standard_normal(3)
            np.testing.assert_array_equal(f.prox(0.0, c), c)


class TestConjugates:
    def test_l1_conjugate_is_ball_indicator(self):
        f = L1Norm(3)
        assert f.conjugate([0.5, -1.0, 0.0]) == 0.0
        assert f.conjugate([1.5, 0.0, 0.0]) == np.inf

    def test_quadratic_conjugate_matches_supremum(self, rng):
        q = psd_quadratic(rng, 4)
        y = rng.standard_normal(4)
        x = np.linalg.solve(q.A, y - q.b)
        assert q.conjugate(y) == pytest.approx(x @ y - q(x), rel=1e-9)

    def test_singular_quadratic_conjugate_off_range(self):
        q = QuadraticFunction(np.diag([1.0, 0.0]), [0.0, 0.0])
        assert q.conjugate([1.0, 0.0]) == pytest.approx(0.5)
        assert q.conjugate([0.0, 1.0]) == np.inf


def _grad_logsumexp(a_rows, b_shift, x):
    z = a_rows @ x - b_shift
    w = np.exp(z - np.logaddexp.reduce(z))
    return a_rows.T @ w


class TestLogSumExp:
    def test_single_term_is_degenerate(self, rng):
        a = rng.standard_normal((1, 3))
        q = logsumexp_instance(a, [0.4], rng.standard_normal(3))
        np.testing.assert_allclose(q.A, 0.0, atol=1e-14)
        np.testing.assert_allclose(q.b, a[0], rtol=1e-15)

    def test_two_symmetric_terms(self):
        # w = (1/2, 1/2): gradient 0, Hessian sum w a^2 - (sum w a)^2 = 1
        q = logsumexp_instance([[1.0], [-1.0]], [0.0, 0.0], [0.0])
        np.testing.assert_allclose(q.b, [0.0], atol=1e-16)
        np.testing.assert_allclose(q.A, [[1.0]], rtol=1e-15)

    def test_psd(self, rng):
        for _ in range(5):
            q = logsumexp_instance(rng.standard_normal((30, 10)), rng.standard_normal(30),
                                   rng.standard_normal(10))
            assert np.linalg.eigvalsh(q.A).min() >= -1e-10

    def test_no_overflow_with_large_exponents(self, rng):
        a = 400 * rng.standard_normal((50, 4))
        q = logsumexp_instance(a, rng.standard_normal(50), rng.standard_normal(4))
        assert np.all(np.isfinite(q.A))

    @pytest.mark.parametrize("n,m", [(3, 5), (10, 40), (20, 60)])
    def test_matches_finite_differences(self, rng, n, m):
        a, s, c = rng.standard_normal((m, n)), rng.standard_normal(m), rng.standard_normal(n)
        q = logsumexp_instance(a, s, c)
        np.testing.assert_allclose(q.b, _grad_logsumexp(a, s, c), rtol=1e-12, atol=1e-14)
        h = 1e-5
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            fd = (_grad_logsumexp(a, s, c + e) - _grad_logsumexp(a, s, c - e)) / (2 * h)
            col = q.A[:, j]
            assert np.linalg.norm(col - fd) <= 1e-5 * max(np.linalg.norm(col), 1e-3)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            logsumexp_instance(np.ones((2, 3)), [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
