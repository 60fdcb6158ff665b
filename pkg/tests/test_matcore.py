import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurlab.errors import InvalidExponent, NonFinite, ShapeMismatch
from schurlab.matcore import (
    multiplier_norm_lower_bound,
    schatten_norm,
    schur_product,
    singular_spectrum,
    svd_factors,
)


class TestSingularSpectrum:
    def test_identity(self):
        np.testing.assert_allclose(singular_spectrum(np.eye(3)), [1.0, 1.0, 1.0])

    def test_rank_one_all_ones(self):
        s = singular_spectrum(np.ones((2, 2)))
        np.testing.assert_allclose(s, [2.0, 0.0], atol=1e-12)

    def test_jordan_block_against_characteristic_polynomial(self):
        # oracle: eigenvalues of A^T A = [[1,1],[1,2]] solve l^2 - 3l + 1 = 0
        lam_plus = (3.0 + math.sqrt(5.0)) / 2.0
        lam_minus = (3.0 - math.sqrt(5.0)) / 2.0
        s = singular_spectrum([[1.0, 1.0], [0.0, 1.0]])
        np.testing.assert_allclose(s, [math.sqrt(lam_plus), math.sqrt(lam_minus)], rtol=1e-12)
        assert abs(s[0] ** 2 + s[1] ** 2 - 3.0) < 1e-12
        assert abs(s[0] * s[1] - 1.0) < 1e-12

    def test_sorted_nonincreasing_and_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
            s = singular_spectrum(a)
            assert s.shape == (3,)
            assert np.all(s[:-1] >= s[1:])
            assert np.all(s >= 0)

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFinite):
            singular_spectrum([[1.0, np.nan], [0.0, 1.0]])
        with pytest.raises(NonFinite):
            singular_spectrum([[np.inf, 0.0], [0.0, 1.0]])

    def test_reconstruction_contract(self):
        rng = np.random.default_rng(1)
        for shape in [(4, 4), (6, 3), (3, 7)]:
            a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            u, s, vh = svd_factors(a)
            resid = np.linalg.norm(a - (u * s) @ vh)
            assert resid <= 1e-10 * np.linalg.norm(a)


class TestSchattenNorm:
    def test_identity_all_p(self):
        for n in (2, 5, 8):
            for p in (1.0, 2.0, 4.0, math.inf):
                expected = 1.0 if math.isinf(p) else n ** (1.0 / p)
                assert abs(schatten_norm(np.eye(n), p) - expected) < 1e-12

    def test_p2_is_frobenius(self):
        # oracle: sqrt of the sum of squared entries
        a = [[1.0, 1.0], [0.0, 1.0]]
        assert abs(schatten_norm(a, 2) - math.sqrt(3.0)) < 1e-14
        rng = np.random.default_rng(2)
        b = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        assert abs(schatten_norm(b, 2) - math.sqrt(np.sum(np.abs(b) ** 2))) < 1e-10

    def test_spectrum_lp_monotonicity(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            a = rng.standard_normal((5, 5))
            assert schatten_norm(a, 4) <= schatten_norm(a, 2) + 1e-12

    def test_invalid_exponent(self):
        for p in (0.5, 0.0, -1.0, np.nan):
            with pytest.raises(InvalidExponent):
                schatten_norm(np.eye(2), p)

    def test_triangle_inequality_200_pairs(self):
        rng = np.random.default_rng(4)
        for k in range(200):
            n = int(rng.integers(2, 7))
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            p = rng.choice([1.0, 1.5, 2.0, 3.0, 4.0, math.inf])
            slack = schatten_norm(a, p) + schatten_norm(b, p) - schatten_norm(a + b, p)
            assert slack >= -1e-9

    def test_unitary_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            qu, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            qv, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            for p in (1.0, 2.5, math.inf):
                assert abs(schatten_norm(qu @ a @ qv, p) - schatten_norm(a, p)) < 1e-8


class TestSchurProduct:
    def test_all_ones_is_identity(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        np.testing.assert_array_equal(schur_product(np.ones((3, 4)), a), a)

    def test_zero_annihilates(self):
        a = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(schur_product(np.zeros((2, 3)), a), np.zeros((2, 3)))

    def test_triangular_pattern(self):
        m = np.tril(np.ones((3, 3)))
        out = schur_product(m, np.ones((3, 3)))
        np.testing.assert_array_equal(out.real, np.tril(np.ones((3, 3))))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            schur_product(np.ones((2, 2)), np.ones((2, 3)))

    def test_idempotent_symbol_is_projection(self):
        rng = np.random.default_rng(7)
        m = (rng.random((4, 4)) < 0.5).astype(float)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        once = schur_product(m, a)
        np.testing.assert_array_equal(schur_product(m, once), once)

    @given(
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=1, max_value=4),
        st.floats(min_value=-5, max_value=5, allow_nan=False),
        st.floats(min_value=-5, max_value=5, allow_nan=False),
    )
    @settings(max_examples=50, deadline=None)
    def test_bilinearity(self, rows, cols, alpha, beta):
        rng = np.random.default_rng(rows * 7 + cols)
        m = rng.standard_normal((rows, cols))
        a = rng.standard_normal((rows, cols))
        b = rng.standard_normal((rows, cols))
        np.testing.assert_allclose(
            schur_product(m, alpha * a + beta * b),
            alpha * schur_product(m, a) + beta * schur_product(m, b),
            atol=1e-9,
        )


def _brute_force_2x2_oracle():
    """Net of random 2x2 contractions plus alternating polish of the best.

    Independent reference for the p=inf multiplier norm of [[1,0],[1,1]].
    """
    m = np.array([[1.0, 0.0], [1.0, 1.0]])
    rng = np.random.default_rng(20240601)
    best, best_a = 0.0, None
    chunk = 100_000
    for _ in range(10):  # 1e6-point net, vectorized
        a = rng.standard_normal((chunk, 2, 2)) + 1j * rng.standard_normal((chunk, 2, 2))
        top_num = np.linalg.svd(m[None, :, :] * a, compute_uv=False)[:, 0]
        top_den = np.linalg.svd(a, compute_uv=False)[:, 0]
        ratios = top_num / top_den
        k = int(np.argmax(ratios))
        if ratios[k] > best:
            best, best_a = float(ratios[k]), a[k]
    a = best_a
    for _ in range(300):
        u, _, vh = np.linalg.svd(m * a)
        z = np.outer(u[:, 0], vh[0, :])
        uw, _, vwh = np.linalg.svd(np.conj(m) * z)
        a = uw @ vwh
    return float(
        np.linalg.svd(m * a, compute_uv=False)[0] / np.linalg.svd(a, compute_uv=False)[0]
    )


class TestMultiplierNormLowerBound:
    def test_p2_binary_symbol_is_exactly_one(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(2, 12))
            m = (rng.random((n, n)) < 0.4).astype(float)
            if not m.any():
                m[0, 0] = 1.0
            v = multiplier_norm_lower_bound(m, 2.0, budget=2, seed=1)
            assert abs(v - 1.0) <= 1e-9

    def test_all_ones_any_p(self):
        m = np.ones((5, 5))
        for p in (1.0, 2.0, 3.0, math.inf):
            assert abs(multiplier_norm_lower_bound(m, p, budget=2, seed=0) - 1.0) <= 1e-9

    def test_2x2_triangular_pinf_against_brute_force(self):
        oracle = _brute_force_2x2_oracle()
        v = multiplier_norm_lower_bound([[1.0, 0.0], [1.0, 1.0]], math.inf, budget=6, seed=0)
        assert 1.0 <= v <= oracle * (1.0 + 1e-9)

    def test_p2_never_exceeds_sup(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            m = rng.standard_normal((6, 6))
            v = multiplier_norm_lower_bound(m, 2.0, budget=3, seed=2)
            assert v <= np.max(np.abs(m)) + 1e-9

    def test_monotone_in_budget_with_nested_seeds(self):
        rng = np.random.default_rng(10)
        m = (rng.random((8, 8)) < 0.5).astype(float)
        vals = [
            multiplier_norm_lower_bound(m, 4.0, budget=b, seed=3) for b in (1, 2, 4, 8)
        ]
        for small, big in zip(vals, vals[1:]):
            assert big >= small - 1e-12

    def test_deterministic_given_seed(self):
        m = np.tril(np.ones((6, 6)))
        a = multiplier_norm_lower_bound(m, 4.0, budget=4, seed=11)
        b = multiplier_norm_lower_bound(m, 4.0, budget=4, seed=11)
        assert a == b

    def test_jobs_do_not_change_the_result(self):
        m = np.tril(np.ones((6, 6)))
        a = multiplier_norm_lower_bound(m, math.inf, budget=4, seed=5)
        b = multiplier_norm_lower_bound(m, math.inf, budget=4, seed=5, jobs=4)
        assert abs(a - b) < 1e-12
