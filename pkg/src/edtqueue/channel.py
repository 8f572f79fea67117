"""Two-state continuous-time Markov model of primary-user activity.

Parameters are mean durations, not rates: ``lam`` is the mean busy period
and ``mu`` the mean idle period.  Rates ``1/lam`` and ``1/mu`` only appear
inside the functions below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

__all__ = [
    "ChannelParams",
    "SensingMode",
    "SensingStrategy",
    "stationary_on_prob",
    "beta",
    "p_on_given_off",
]


def _check_duration(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive duration, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ChannelParams:
    """Mean busy (``lam``) and idle (``mu``) durations of the primary user."""

    lam: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_duration("lam", self.lam))
        object.__setattr__(self, "mu", _check_duration("mu", self.mu))

    @property
    def switch_rate(self) -> float:
        """Sum of the two transition rates, ``1/lam + 1/mu``."""
        return 1.0 / self.lam + 1.0 / self.mu


class SensingMode(str, Enum):
    CONTINUOUS = "continuous"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class SensingStrategy:
    mode: SensingMode
    ts: float | None = None

    def __post_init__(self):
        mode = SensingMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is SensingMode.PERIODIC:
            if self.ts is None:
                raise DomainError("periodic sensing requires a sensing period ts")
            object.__setattr__(self, "ts", _check_duration("ts", self.ts))
        elif self.ts is not None:
            raise DomainError("continuous sensing takes no sensing period")

    @classmethod
    def continuous(cls) -> "SensingStrategy":
        return cls(SensingMode.CONTINUOUS)

    @classmethod
    def periodic(cls, ts: float) -> "SensingStrategy":
        return cls(SensingMode.PERIODIC, ts)

    @property
    def is_periodic(self) -> bool:
        return self.mode is SensingMode.PERIODIC


def stationary_on_prob(params: ChannelParams) -> float:
    """Long-run probability that the PU is busy, ``lam / (lam + mu)``."""
    return params.lam / (params.lam + params.mu)


def beta(params: ChannelParams, ts: float, *, approximate: bool = False) -> float:
    """Probability the PU is busy at a sensing instant given it was busy ``ts`` earlier.

    With ``approximate=True`` the small-period form ``exp(-ts/lam)`` is
    returned instead, which ignores off-on excursions between two sensing
    instants.
    """
    if not ts > 0.0:
        raise DomainError(f"sensing period must be > 0, got {ts!r}")
    if approximate:
        return math.exp(-ts / params.lam)
    p_on = stationary_on_prob(params)
    return p_on + (1.0 - p_on) * math.exp(-params.switch_rate * ts)


def p_on_given_off(params: ChannelParams, t: float) -> float:
    """Probability the PU is busy ``t`` after it was observed idle."""
    if not t >= 0.0:
        raise DomainError(f"elapsed time must be >= 0, got {t!r}")
    return -stationary_on_prob(params) * math.expm1(-params.switch_rate * t)
