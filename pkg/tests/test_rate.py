"""Capacity, dispersion, and finite-blocklength rate tests.

The end-to-end chain value was frozen from an independent route: sigma^2
and rho_eff by hand, capacity via scipy.special.exp1, dispersion by
mpmath adaptive quadrature at 30 digits, the tail inverse via
scipy.special.erfcinv.
"""

import math

import numpy as np
import pytest

from trainopt import (DISPERSION_HIGH_SNR_LIMIT, DomainError, Fading,
                      McOracle, PilotScenario, channel_dispersion,
                      ergodic_capacity, ergodic_rate, expect_exp,
                      finite_block_rate, mc_expect, mean_inverse_one_plus,
                      q_inv)
from trainopt.specfun import exp_integral_e1_scaled, exponential_samples

# Chain oracle at n=30, alpha=4/30, rho=10^1.5, epsilon=1e-9, block fading.
CHAIN_SIGMA2 = 0.007843684380694741
CHAIN_RHO_EFF = 25.139226850421053
CHAIN_CAPACITY = 4.033231431001973
CHAIN_DISPERSION = 3.329638781494332
CHAIN_RATE = 1.6352808280152606


class TestErgodicCapacity:
    def test_zero_snr_limit(self):
        assert ergodic_capacity(1e-12) == pytest.approx(0.0, abs=1e-11)

    def test_monte_carlo_oracle(self):
        for seed, rho in ((21, 10.0), (22, 31.6227766)):
            est, se = mc_expect(lambda t: np.log2(1.0 + rho * t),
                                McOracle(seed=seed, sample_count=1_000_000))
            assert abs(ergodic_capacity(rho) - est) <= 3 * se

    def test_quadrature_consistency(self):
        # closed form against expect_exp of log2(1 + rho t), 1e-6 relative
        for rho in (0.1, 1.0, 10.0, 100.0, 1e4):
            quad_val = expect_exp(lambda t: np.log2(1.0 + rho * t))
            assert ergodic_capacity(rho) == pytest.approx(quad_val, rel=1e-6)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            ergodic_capacity(0.0)


class TestChannelDispersion:
    def test_zero_snr_limit(self):
        assert channel_dispersion(1e-7) <= 1e-6

    def test_high_snr_asymptote(self):
        limit = DISPERSION_HIGH_SNR_LIMIT
        assert limit == pytest.approx(4.4643992330401075, rel=1e-12)
        assert channel_dispersion(1e6) == pytest.approx(limit, rel=0.01)

    def test_monte_carlo_oracle(self):
        rho = 10.0
        t = exponential_samples(33, 1_000_000)
        f = np.log2(1.0 + rho * t)
        g = 1.0 / (1.0 + rho * t)
        batches = 50
        fb = f.reshape(batches, -1)
        gb = g.reshape(batches, -1)
        per_batch = fb.var(axis=1, ddof=1) + \
            0.5 / math.log(2.0) ** 2 * (1.0 - gb.mean(axis=1) ** 2)
        est = per_batch.mean()
        se = per_batch.std(ddof=1) / math.sqrt(batches)
        assert abs(channel_dispersion(rho) - est) <= 3 * se

    def test_inner_expectation_identity(self):
        # E[1/(1 + rho H^2)] = e^(1/rho) E1(1/rho) / rho to 1e-8 relative
        for rho in (0.1, 1.0, 10.0, 100.0, 1e3, 1e4):
            closed = exp_integral_e1_scaled(1.0 / rho) / rho
            assert mean_inverse_one_plus(rho) == pytest.approx(closed, rel=1e-8)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            channel_dispersion(-1.0)


class TestFiniteBlockRate:
    def test_penalty_vanishes_at_half(self):
        s = PilotScenario(n=24, alpha=0.25, epsilon=0.5, rho=10.0)
        bd = finite_block_rate(s)
        assert bd.penalty_bits == 0.0
        assert bd.rate_bits == ergodic_rate(s)

    def test_long_packet_limit(self):
        # n -> inf at fixed alpha: estimation error and penalty both vanish
        s = PilotScenario(n=10 ** 9, alpha=0.2, epsilon=1e-9, rho=10.0)
        bd = finite_block_rate(s)
        assert bd.rate_bits == pytest.approx(0.8 * ergodic_capacity(10.0), rel=1e-3)

    def test_end_to_end_chain_oracle(self):
        s = PilotScenario(n=30, alpha=4.0 / 30.0, epsilon=1e-9, rho=10 ** 1.5)
        bd = finite_block_rate(s)
        assert bd.estimation.sigma2 == pytest.approx(CHAIN_SIGMA2, rel=1e-13)
        assert bd.rho_eff == pytest.approx(CHAIN_RHO_EFF, rel=1e-13)
        assert bd.capacity_bits == pytest.approx(CHAIN_CAPACITY, rel=1e-12)
        assert bd.dispersion_bits2 == pytest.approx(CHAIN_DISPERSION, rel=1e-10)
        assert bd.rate_bits == pytest.approx(CHAIN_RATE, rel=1e-12)
        assert not bd.negative_clamped

    def test_negative_rate_clamped_and_flagged(self):
        s = PilotScenario(n=4, alpha=0.25, epsilon=1e-12, rho=0.5)
        bd = finite_block_rate(s)
        assert bd.rate_bits == 0.0
        assert bd.negative_clamped

    def test_continuity_in_alpha(self):
        s = PilotScenario(n=25, alpha=0.2, epsilon=1e-6, rho=10.0)
        alphas = np.linspace(1.0 / 25.0, 1.0 - 1e-9, 1500)
        rates = np.array([finite_block_rate(s.with_alpha(float(a))).rate_bits
                          for a in alphas])
        jumps = np.abs(np.diff(rates))
        # numerical Lipschitz estimate: central-difference slope bound
        slopes = np.abs(rates[2:] - rates[:-2]) / (alphas[2] - alphas[0])
        bound = (slopes.max() * 1.5 + 1e-9) * (alphas[1] - alphas[0])
        assert jumps.max() <= bound

    def test_penalty_inverse_sqrt_n_scaling(self):
        # alpha n rho held equal keeps sigma^2 fixed; correct the (1-alpha)
        # factor analytically and the penalty must scale exactly as 1/sqrt(n)
        n, alpha, rho, eps = 24, 0.5, 8.0, 1e-6
        s1 = PilotScenario(n=n, alpha=alpha, epsilon=eps, rho=rho)
        s2 = PilotScenario(n=4 * n, alpha=alpha / 4.0, epsilon=eps, rho=rho)
        b1, b2 = finite_block_rate(s1), finite_block_rate(s2)
        assert b1.rho_eff == pytest.approx(b2.rho_eff, rel=1e-14)
        corrected = b2.penalty_bits * 2.0 * math.sqrt(
            (1.0 - alpha) / (1.0 - alpha / 4.0))
        assert corrected == pytest.approx(b1.penalty_bits, rel=1e-9)


class TestErgodicRate:
    def test_equals_finite_block_at_half(self):
        for n, alpha, rho in ((12, 0.25, 3.0), (64, 0.125, 30.0)):
            s = PilotScenario(n=n, alpha=alpha, epsilon=0.5, rho=rho)
            assert ergodic_rate(s) == finite_block_rate(s).rate_bits

    def test_strictly_above_finite_block_for_small_epsilon(self):
        s = PilotScenario(n=30, alpha=0.2, epsilon=1e-6, rho=10.0)
        assert ergodic_rate(s) > finite_block_rate(s).rate_bits

    def test_all_pilots_limit(self):
        s = PilotScenario(n=1000, alpha=1.0 - 1e-9, epsilon=1e-3, rho=10.0)
        assert ergodic_rate(s) == pytest.approx(0.0, abs=1e-6)

    def test_doppler_penalty_lowers_rate(self):
        b = PilotScenario(n=30, alpha=0.2, epsilon=1e-6, rho=10.0)
        c = PilotScenario(n=30, alpha=0.2, epsilon=1e-6, rho=10.0, f_d=0.01,
                          fading=Fading.CONTINUOUS)
        assert ergodic_rate(c) < ergodic_rate(b)
