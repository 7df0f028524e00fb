"""Monotone and maximal coupling tests."""

import math

import numpy as np
import pytest
from scipy.stats import binom, poisson

from avalanche.coupling import (CoupledPath, check_coupling_constant,
                                coupled_step_monotone,
                                _poisson_pmf_truncated, simulate_coupled,
                                step_coupled_maximal, step_divergence_bound,
                                tv_binomial_poisson, tv_exact,
                                tv_poisson_poisson)
from avalanche.model import ModelParams, kernel_row
from avalanche.rng import replicate_rng


class TestCouplingConstant:
    def test_accepts_matching_intensity(self):
        params = ModelParams.from_intensity(100, 1.2)
        # -log(1-p) <= c/(n-1) holds with the chain's own intensity
        # only if p is small enough; the standard choice passes here
        check_coupling_constant(params, 1.2 * 100 / 99 * 1.001)

    def test_rejects_too_small_constant(self):
        params = ModelParams.from_intensity(100, 1.2)
        with pytest.raises(ValueError):
            check_coupling_constant(params, 1.0)


class TestMonotoneCoupling:
    def test_pathwise_dominance(self):
        params = ModelParams.from_intensity(60, 0.9)
        c = params.alpha * (params.n - 1) / params.n  # safely admissible
        c = max(c, params.c) * 1.01
        rng = replicate_rng(17, 0)
        for r in range(300):
            path = simulate_coupled(params, c, 2, rng)
            assert path.dominated
            assert path.x_seq[0] == path.z_seq[0] == 2

    def test_stepwise_dominance_random_states(self):
        params = ModelParams.from_intensity(80, 1.1)
        c = params.c * 1.05
        rng = replicate_rng(29, 0)
        for _ in range(2000):
            x = int(rng.integers(0, 40))
            z = x + int(rng.integers(0, 10))
            xn, qn, zn = coupled_step_monotone(params, c, x, z, rng)
            assert xn <= qn <= zn

    def test_marginal_mean_of_x(self):
        # the x-marginal must be the avalanche kernel: check its mean
        params = ModelParams.from_intensity(50, 0.8)
        c = params.c * 1.05
        rng = replicate_rng(31, 0)
        i = 5
        draws = np.array([coupled_step_monotone(params, c, i, i, rng)[0]
                          for _ in range(20000)])
        j = np.arange(params.n + 1)
        ref = float(kernel_row(params, i) @ j)
        var = float(kernel_row(params, i) @ j ** 2) - ref ** 2
        assert abs(draws.mean() - ref) < 4 * math.sqrt(var / len(draws))

    def test_marginal_mean_of_z(self):
        # the z-marginal is Poisson(c*z)
        params = ModelParams.from_intensity(50, 0.8)
        c = params.c * 1.05
        rng = replicate_rng(37, 0)
        z0 = 7
        draws = np.array([coupled_step_monotone(params, c, 3, z0, rng)[2]
                          for _ in range(20000)])
        assert abs(draws.mean() - c * z0) < 4 * math.sqrt(
            c * z0 / len(draws))

    def test_rejects_inverted_states(self):
        params = ModelParams.from_intensity(50, 0.8)
        with pytest.raises(ValueError):
            coupled_step_monotone(params, 1.0, 5, 3, replicate_rng(0, 0))

    def test_dominated_property(self):
        good = CoupledPath(np.array([1, 0]), np.array([1, 1]),
                           np.array([1, 2]))
        bad = CoupledPath(np.array([1, 3]), np.array([1, 1]),
                          np.array([1, 2]))
        assert good.dominated
        assert not bad.dominated


class TestTvBounds:
    def test_exact_tv_properties(self):
        p1 = np.array([0.5, 0.5])
        p2 = np.array([0.25, 0.25, 0.5])
        assert tv_exact(p1, p1) == 0.0
        assert tv_exact(p1, p2) == pytest.approx(0.5)
        assert tv_exact(p1, p2) == pytest.approx(tv_exact(p2, p1))

    def test_binomial_poisson_bound_dominates(self):
        # the (p/2)*min(1, np) envelope applies in the moderate-np
        # regime the couplings operate in (np of order 1 and above)
        for m, p in [(200, 0.01), (100, 0.02), (400, 0.005), (300, 0.02)]:
            grid = np.arange(m + 1)
            true_tv = tv_exact(binom.pmf(grid, m, p),
                               poisson.pmf(np.arange(m + 1), m * p))
            assert true_tv <= tv_binomial_poisson(m, p) + 1e-12

    def test_poisson_poisson_bound_dominates(self):
        for mu, c in [(0.5, 0.6), (1.0, 1.3), (2.0, 2.5)]:
            grid = np.arange(100)
            true_tv = tv_exact(poisson.pmf(grid, mu), poisson.pmf(grid, c))
            assert true_tv <= tv_poisson_poisson(mu, c) + 1e-12

    def test_input_validation(self):
        with pytest.raises(ValueError):
            tv_binomial_poisson(-1, 0.5)
        with pytest.raises(ValueError):
            tv_poisson_poisson(2.0, 1.0)

    def test_truncated_poisson_pmf(self):
        pmf = _poisson_pmf_truncated(3.0)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-10)
        assert _poisson_pmf_truncated(0.0).tolist() == [1.0]


class TestMaximalCoupling:
    def test_divergence_rate_equals_tv(self):
        params = ModelParams.from_intensity(60, 1.1)
        i = 4
        tv = tv_exact(kernel_row(params, i),
                      _poisson_pmf_truncated(params.c * i))
        rng = replicate_rng(43, 0)
        probes = 20000
        diverged = sum(step_coupled_maximal(params, i, rng)[2]
                       for _ in range(probes))
        rate = diverged / probes
        stderr = math.sqrt(tv * (1 - tv) / probes)
        assert abs(rate - tv) < 4 * stderr

    def test_glued_when_not_diverged(self):
        params = ModelParams.from_intensity(40, 0.9)
        rng = replicate_rng(47, 0)
        for _ in range(500):
            x, z, dv = step_coupled_maximal(params, 3, rng)
            if not dv:
                assert x == z
            else:
                assert x != z

    def test_marginal_of_x_is_kernel(self):
        params = ModelParams.from_intensity(40, 0.9)
        i = 3
        rng = replicate_rng(53, 0)
        draws = np.array([step_coupled_maximal(params, i, rng)[0]
                          for _ in range(20000)])
        row = kernel_row(params, i)
        j = np.arange(len(row))
        ref = float(row @ j)
        var = float(row @ j ** 2) - ref ** 2
        assert abs(draws.mean() - ref) < 4 * math.sqrt(var / len(draws))

    def test_zero_state_fixed(self):
        params = ModelParams.from_intensity(40, 0.9)
        assert step_coupled_maximal(params, 0, replicate_rng(0, 0)) \
            == (0, 0, False)

    def test_tv_below_divergence_envelope(self):
        for n, c, i in [(200, 0.8, 3), (200, 1.0, 4), (400, 1.5, 5)]:
            params = ModelParams.from_intensity(n, c)
            tv = tv_exact(kernel_row(params, i),
                          _poisson_pmf_truncated(c * i))
            assert tv <= step_divergence_bound(c, i, n) + 1e-12

    def test_envelope_formulas(self):
        assert step_divergence_bound(0.5, 2, 100) == pytest.approx(
            1.5 * 0.5 * 4 / 100)
        assert step_divergence_bound(2.0, 2, 100) == pytest.approx(
            1.5 * 2 ** 1.5 * 2 ** 1.5 / 100)
