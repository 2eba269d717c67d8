"""Channel-estimation error variances and the resulting effective SNR.

A packet of n symbols carries n_t = alpha * n known pilot symbols. The
receiver forms an MMSE channel estimate from them; the residual estimation
error acts as extra noise during data detection. Two fading models are
covered:

  block       the gain is constant over the packet; estimation error comes
              from noise only, sigma^2 = 1 / (1 + alpha n rho)
  continuous  the gain drifts within the packet; a Doppler term that grows
              with the packet length adds to the noise term

The Doppler term is implemented exactly as printed in its source,
2 (pi alpha n rho f_d / (1 + alpha n rho))^2 (n - alpha n / 2)^2 with f_d
normalized to the symbol rate. For large n * f_d the sum can exceed the
unit prior variance; it is then clamped to 1 (and flagged), since a
mismatch variance above the prior is physically meaningless and would make
the effective SNR negative.

All SNRs are linear; dB conversion happens only at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import DomainError, InvalidScenarioError


class Fading(str, Enum):
    BLOCK = "block"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class PilotScenario:
    """One short-packet transmission setup.

    n        packet length in symbols
    alpha    pilot fraction, alpha * n pilot symbols; 1/n <= alpha < 1
    epsilon  target packet error probability, in (0, 1)
    rho      receive SNR, linear
    f_d      Doppler frequency normalized to the symbol rate (0 for block)
    fading   Fading.BLOCK or Fading.CONTINUOUS
    """

    n: int
    alpha: float
    epsilon: float
    rho: float
    f_d: float = 0.0
    fading: Fading = Fading.BLOCK

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise InvalidScenarioError(f"packet length n must be an integer >= 2, got {self.n!r}")
        if not (1.0 / self.n <= self.alpha < 1.0):
            raise InvalidScenarioError(
                f"alpha must lie in [1/n, 1) = [{1.0 / self.n:.6g}, 1), got {self.alpha!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidScenarioError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise InvalidScenarioError(f"rho must be a positive linear SNR, got {self.rho!r}")
        if self.f_d < 0.0 or not math.isfinite(self.f_d):
            raise InvalidScenarioError(f"f_d must be nonnegative, got {self.f_d!r}")
        if self.fading is Fading.BLOCK and self.f_d != 0.0:
            raise InvalidScenarioError("block fading requires f_d = 0")

    def with_alpha(self, alpha: float) -> "PilotScenario":
        return replace(self, alpha=alpha)

    @property
    def pilot_count(self) -> float:
        return self.alpha * self.n


@dataclass(frozen=True)
class EstimationError:
    """Variance of the channel-estimate mismatch, split into its parts.

    sigma2 = min(1, noise part + doppler part); `clamped` records whether
    the raw sum exceeded the unit prior variance.
    """

    sigma2: float
    doppler_part: float
    clamped: bool


def block_error_var(s: PilotScenario) -> EstimationError:
    """Noise-only mismatch variance 1 / (1 + alpha n rho) for block fading."""
    if s.fading is not Fading.BLOCK:
        raise InvalidScenarioError("block_error_var requires a block-fading scenario")
    return EstimationError(sigma2=1.0 / (1.0 + s.alpha * s.n * s.rho),
                           doppler_part=0.0, clamped=False)


def doppler_var(s: PilotScenario) -> float:
    """Doppler-induced mismatch variance for continuous fading.

    2 (pi alpha n rho f_d / (1 + alpha n rho))^2 (n - alpha n / 2)^2
    """
    if s.fading is not Fading.CONTINUOUS:
        raise InvalidScenarioError("doppler_var requires a continuous-fading scenario")
    anr = s.alpha * s.n * s.rho
    gain = math.pi * anr * s.f_d / (1.0 + anr)
    lag = s.n - s.alpha * s.n / 2.0
    return 2.0 * gain * gain * lag * lag


def total_error_var(s: PilotScenario) -> EstimationError:
    """Total mismatch variance: noise part plus Doppler part, clamped at 1."""
    if s.fading is Fading.BLOCK:
        return block_error_var(s)
    noise = 1.0 / (1.0 + s.alpha * s.n * s.rho)
    doppler = doppler_var(s)
    raw = noise + doppler
    if raw > 1.0:
        return EstimationError(sigma2=1.0, doppler_part=doppler, clamped=True)
    return EstimationError(sigma2=raw, doppler_part=doppler, clamped=False)


def effective_snr(rho: float, err: EstimationError) -> float:
    """Post-estimation SNR rho (1 - sigma^2) / (1 + rho sigma^2), in [0, rho]."""
    if not (math.isfinite(rho) and rho > 0.0):
        raise DomainError(f"rho must be a positive linear SNR, got {rho!r}")
    sigma2 = err.sigma2
    if not 0.0 <= sigma2 <= 1.0:
        raise DomainError(f"sigma2 must lie in [0, 1], got {sigma2!r}")
    return rho * (1.0 - sigma2) / (1.0 + rho * sigma2)
