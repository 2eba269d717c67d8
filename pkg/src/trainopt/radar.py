"""Timing and range feasibility for the combined sensing protocol.

The base station hears the user's uplink packet and the echo of its own
downlink packet at the same time. They stay separable as long as their
arrival-time difference fits inside the k-lag zero-correlation zone of
the training pair, which bounds the detectable object distance:

  d_object <= d_user + v T_s (t_pr + k) / 2

All protocol times are expressed in symbol periods (the end-user
processing time t_pr included), which reproduces the reference worked
example: 25 km user, 25 us symbols, one-symbol processing, k = 4 gives a
43.75 km sensing range.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class RadarScenario:
    """d_user in meters, t_proc in symbol periods, T_s in seconds."""

    d_user: float
    t_proc_symbols: float
    T_s: float
    k: int
    wave_speed: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.d_user < 0 or self.t_proc_symbols < 0 or self.k < 0:
            raise DomainError("distances, processing time, and k must be nonnegative")
        if self.T_s <= 0 or self.wave_speed <= 0:
            raise DomainError("T_s and wave_speed must be positive")


def max_sensing_range(s: RadarScenario) -> float:
    """Largest detectable object distance, d_user + v T_s (t_pr + k) / 2."""
    return s.d_user + s.wave_speed * s.T_s * (s.t_proc_symbols + s.k) / 2.0


def is_detectable(d_object: float, s: RadarScenario) -> bool:
    """True iff an object at d_object meters is within the sensing range."""
    if d_object < 0:
        raise DomainError("object distance must be nonnegative")
    return d_object <= max_sensing_range(s)
