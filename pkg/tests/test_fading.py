"""Estimation-error variance and effective-SNR tests."""

import math
from dataclasses import replace

import pytest

from trainopt import (EstimationError, Fading, InvalidScenarioError,
                      PilotScenario, block_error_var, doppler_var,
                      effective_snr, total_error_var)
from trainopt.errors import DomainError

# Hand substitution of the closed form at n=10, alpha=0.2, rho=10, f_d=0.02:
# 2 (pi * 20 * 0.02 / 21)^2 * 9^2.
DOPPLER_ORACLE = 0.5800910341864766


def block(n=20, alpha=0.25, epsilon=1e-6, rho=10.0):
    return PilotScenario(n=n, alpha=alpha, epsilon=epsilon, rho=rho)


def continuous(n=20, alpha=0.25, epsilon=1e-6, rho=10.0, f_d=0.01):
    return PilotScenario(n=n, alpha=alpha, epsilon=epsilon, rho=rho, f_d=f_d,
                         fading=Fading.CONTINUOUS)


class TestScenarioValidation:
    def test_alpha_bounds(self):
        with pytest.raises(InvalidScenarioError):
            PilotScenario(n=10, alpha=0.05, epsilon=0.1, rho=1.0)
        with pytest.raises(InvalidScenarioError):
            PilotScenario(n=10, alpha=1.0, epsilon=0.1, rho=1.0)

    def test_epsilon_and_rho(self):
        with pytest.raises(InvalidScenarioError):
            PilotScenario(n=10, alpha=0.2, epsilon=0.0, rho=1.0)
        with pytest.raises(InvalidScenarioError):
            PilotScenario(n=10, alpha=0.2, epsilon=0.5, rho=-2.0)

    def test_block_requires_zero_doppler(self):
        with pytest.raises(InvalidScenarioError):
            PilotScenario(n=10, alpha=0.2, epsilon=0.1, rho=1.0, f_d=0.01,
                          fading=Fading.BLOCK)

    def test_continuous_zero_doppler_allowed(self):
        continuous(f_d=0.0)


class TestBlockErrorVar:
    def test_vanishing_training_energy_limit(self):
        # alpha n rho -> 0 leaves the unit prior variance
        s = block(n=2, alpha=0.5, rho=1e-9)
        assert block_error_var(s).sigma2 == pytest.approx(1.0, abs=1e-8)

    def test_frozen_value(self):
        # alpha n = 10, rho = 10 -> 1/101
        s = block(n=40, alpha=0.25, rho=10.0)
        assert block_error_var(s).sigma2 == pytest.approx(1.0 / 101.0, rel=1e-14)

    def test_monotone_in_each_argument(self):
        base = block(n=20, alpha=0.25, rho=10.0)
        v = block_error_var(base).sigma2
        assert block_error_var(replace(base, alpha=0.3)).sigma2 < v
        assert block_error_var(replace(base, n=30)).sigma2 < v
        assert block_error_var(replace(base, rho=20.0)).sigma2 < v

    def test_closed_form_identity(self):
        for s in (block(), block(n=64, alpha=0.5, rho=3.0)):
            sigma2 = block_error_var(s).sigma2
            assert sigma2 * (1.0 + s.alpha * s.n * s.rho) == pytest.approx(1.0, abs=1e-15)

    def test_wrong_fading_kind(self):
        with pytest.raises(InvalidScenarioError):
            block_error_var(continuous())


class TestDopplerVar:
    def test_static_channel(self):
        assert doppler_var(continuous(f_d=0.0)) == 0.0

    def test_frozen_hand_value(self):
        s = continuous(n=10, alpha=0.2, rho=10.0, f_d=0.02)
        assert doppler_var(s) == pytest.approx(DOPPLER_ORACLE, rel=1e-14)

    def test_all_pilot_specialization(self):
        # algebraic limit alpha -> 1: 2 (pi n rho f_d / (1 + n rho))^2 (n/2)^2
        n, rho, f_d = 12, 5.0, 0.01
        s = continuous(n=n, alpha=1.0 - 1e-12, rho=rho, f_d=f_d)
        expected = 2.0 * (math.pi * n * rho * f_d / (1.0 + n * rho)) ** 2 * (n / 2.0) ** 2
        assert doppler_var(s) == pytest.approx(expected, rel=1e-9)

    def test_wrong_fading_kind(self):
        with pytest.raises(InvalidScenarioError):
            doppler_var(block())


class TestTotalErrorVar:
    def test_continuous_reduces_to_block_at_zero_doppler(self):
        c = continuous(f_d=0.0)
        b = block(n=c.n, alpha=c.alpha, epsilon=c.epsilon, rho=c.rho)
        assert total_error_var(c).sigma2 == total_error_var(b).sigma2

    def test_clamping(self):
        s = continuous(n=200, alpha=0.25, rho=100.0, f_d=0.05)
        err = total_error_var(s)
        assert err.sigma2 == 1.0
        assert err.clamped
        assert err.doppler_part > 1.0

    def test_additivity_before_clamp(self):
        s = continuous(n=10, alpha=0.2, rho=10.0, f_d=0.005)
        err = total_error_var(s)
        noise = 1.0 / (1.0 + s.alpha * s.n * s.rho)
        assert not err.clamped
        assert err.sigma2 == pytest.approx(noise + err.doppler_part, abs=1e-16)

    def test_monotone_in_doppler(self):
        values = [total_error_var(continuous(f_d=f)).sigma2
                  for f in (0.0, 0.005, 0.01, 0.02, 0.05)]
        assert all(a <= b for a, b in zip(values, values[1:]))


class TestEffectiveSnr:
    def test_perfect_estimate(self):
        err = EstimationError(sigma2=0.0, doppler_part=0.0, clamped=False)
        assert effective_snr(7.5, err) == 7.5

    def test_no_channel_knowledge(self):
        err = EstimationError(sigma2=1.0, doppler_part=0.0, clamped=True)
        assert effective_snr(7.5, err) == 0.0

    def test_frozen_value(self):
        err = EstimationError(sigma2=0.5, doppler_part=0.0, clamped=False)
        assert effective_snr(1.0, err) == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_never_exceeds_rho(self):
        for sigma2 in (0.0, 1e-4, 0.3, 0.99, 1.0):
            err = EstimationError(sigma2=sigma2, doppler_part=0.0, clamped=False)
            for rho in (0.1, 1.0, 100.0):
                val = effective_snr(rho, err)
                assert 0.0 <= val <= rho
                if sigma2 == 0.0:
                    assert val == rho

    def test_domain_errors(self):
        err = EstimationError(sigma2=1.5, doppler_part=0.0, clamped=False)
        with pytest.raises(DomainError):
            effective_snr(1.0, err)
        good = EstimationError(sigma2=0.5, doppler_part=0.0, clamped=False)
        with pytest.raises(DomainError):
            effective_snr(0.0, good)
