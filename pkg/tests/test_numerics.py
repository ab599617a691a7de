"""Unit tests for the special-function and combinatorial primitives."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from noma_perf.numerics import (
    QuadratureError,
    bessel_k,
    bessel_k_scaled,
    compositions,
    integrate_semi_infinite,
    log_binomial,
    log_gamma,
    log_multinomial,
    sum_signed_exp,
)

# Frozen reference values for K_v(x), computed once from the integral
# representation int_0^inf exp(-x cosh t) cosh(v t) dt with adaptive
# quadrature at 1e-13 relative tolerance.
BESSEL_K_REFERENCE = {
    (0, 0.5): 0.9244190712276659,
    (1, 1.0): 0.6019072301972347,
    (2, 3.0): 0.06151045847174204,
    (3, 1.5): 1.8338037024745795,
}


class TestLogGamma:
    def test_matches_factorials(self):
        for n in range(1, 15):
            assert_allclose(log_gamma(n + 1), math.log(math.factorial(n)), rtol=1e-14)

    def test_half_integer(self):
        # Gamma(1/2) = sqrt(pi)
        assert_allclose(log_gamma(0.5), 0.5 * math.log(math.pi), rtol=1e-14)

    def test_rejects_nonpositive(self):
        for bad in (0.0, -1.0, -3.5):
            with pytest.raises(ValueError):
                log_gamma(bad)


class TestLogBinomial:
    def test_matches_comb(self):
        for n in range(0, 20):
            for k in range(0, n + 1):
                assert_allclose(log_binomial(n, k), math.log(math.comb(n, k)), atol=1e-12)

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            log_binomial(3, 4)
        with pytest.raises(ValueError):
            log_binomial(3, -1)


class TestBesselK:
    def test_frozen_integral_representation_values(self):
        for (v, x), ref in BESSEL_K_REFERENCE.items():
            assert_allclose(bessel_k(v, x), ref, rtol=1e-12)

    def test_integral_representation_fresh(self):
        # recompute the representation with the package quadrature; caps the
        # hyperbolic cosine so the integrand underflows cleanly
        def oracle(v, x):
            def f(t):
                if t > 700.0:
                    return 0.0
                a = -x * math.cosh(t)
                return math.exp(a) * math.cosh(v * t) if a > -745 else 0.0

            return integrate_semi_infinite(f, 0.0, rel_tol=1e-12).value

        for v in (0, 1, 2, 4):
            for x in (0.3, 1.0, 2.5, 8.0):
                assert_allclose(bessel_k(v, x), oracle(v, x), rtol=1e-10)

    def test_scaled_consistency(self):
        for v in (0, 1, 3):
            for x in (0.5, 2.0, 30.0):
                assert_allclose(bessel_k_scaled(v, x), bessel_k(v, x) * math.exp(x),
                                rtol=1e-12)

    def test_scaled_survives_huge_argument(self):
        # plain K underflows around x ~ 700; the scaled form must not
        assert bessel_k(1, 800.0) == 0.0
        val = bessel_k_scaled(1, 1e8)
        assert 0 < val < 1
        # asymptotically kve -> sqrt(pi / (2 x))
        assert_allclose(val, math.sqrt(math.pi / 2e8), rtol=1e-6)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            bessel_k(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_k(1, 0.0)
        with pytest.raises(ValueError):
            bessel_k_scaled(2, -3.0)


class TestIntegrateSemiInfinite:
    def test_exponential_tail(self):
        for a in (0.0, 0.7, 5.0):
            res = integrate_semi_infinite(lambda x: math.exp(-x), a)
            assert res.converged
            assert_allclose(res.value, math.exp(-a), rtol=1e-12)

    def test_gaussian_tail_matches_erfc(self):
        res = integrate_semi_infinite(lambda x: math.exp(-x * x), 1.0)
        assert_allclose(res.value, 0.5 * math.sqrt(math.pi) * math.erfc(1.0), rtol=1e-12)

    def test_tiny_tail_keeps_relative_accuracy(self):
        # absolute tolerance floor must not swallow a ~1e-12 integral
        res = integrate_semi_infinite(lambda x: math.exp(-x), 27.0)
        assert_allclose(res.value, math.exp(-27.0), rtol=1e-9)

    def test_divergent_integrand_raises(self):
        with pytest.raises(QuadratureError) as info:
            integrate_semi_infinite(math.sin, 0.0)
        assert math.isfinite(info.value.error)

    def test_failure_can_be_returned(self):
        res = integrate_semi_infinite(math.sin, 0.0, raise_on_failure=False)
        assert not res.converged

    def test_rejects_nonfinite_lower(self):
        with pytest.raises(ValueError):
            integrate_semi_infinite(lambda x: 0.0, math.inf)


class TestCompositions:
    def test_counts(self):
        for total in range(0, 7):
            for parts in range(1, 5):
                got = list(compositions(total, parts))
                assert len(got) == math.comb(total + parts - 1, parts - 1)

    def test_each_tuple_valid_and_unique(self):
        got = list(compositions(5, 3))
        assert len(set(got)) == len(got)
        for tup in got:
            assert len(tup) == 3
            assert sum(tup) == 5
            assert all(v >= 0 for v in tup)

    def test_single_part(self):
        assert list(compositions(4, 1)) == [(4,)]

    def test_order_deterministic(self):
        assert list(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            list(compositions(-1, 2))
        with pytest.raises(ValueError):
            list(compositions(2, 0))


class TestLogMultinomial:
    def test_binomial_special_case(self):
        for n in range(0, 10):
            for k in range(0, n + 1):
                assert_allclose(
                    log_multinomial(n, (k, n - k)),
                    log_binomial(n, k),
                    atol=1e-12,
                )

    def test_power_sum_identity(self):
        # sum over all compositions of q into p parts of the multinomial
        # coefficients equals p**q
        for q in range(0, 6):
            for p in range(1, 4):
                total = math.fsum(
                    math.exp(log_multinomial(q, parts)) for parts in compositions(q, p)
                )
                assert_allclose(total, float(p**q), rtol=1e-12)

    def test_rejects_mismatched_sum(self):
        with pytest.raises(ValueError):
            log_multinomial(4, (1, 2))
        with pytest.raises(ValueError):
            log_multinomial(1, (2, -1))


class TestSumSignedExp:
    def test_alternating_exponential_series(self):
        # sum_k (-1)^k / k! = exp(-1), a heavily cancelling series
        logs = [-log_gamma(k + 1) for k in range(30)]
        signs = [1 if k % 2 == 0 else -1 for k in range(30)]
        assert_allclose(sum_signed_exp(logs, signs), math.exp(-1), rtol=1e-14)

    def test_handles_scale(self):
        # same series scaled by e^600: terms overflow naive exponentiation
        logs = [600.0 - log_gamma(k + 1) for k in range(30)]
        signs = [1 if k % 2 == 0 else -1 for k in range(30)]
        assert_allclose(sum_signed_exp(logs, signs), math.exp(599.0), rtol=1e-13)

    def test_empty_and_all_negligible(self):
        assert sum_signed_exp([], []) == 0.0
        assert sum_signed_exp([-math.inf, -math.inf], [1, -1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            sum_signed_exp([0.0], [1, -1])
