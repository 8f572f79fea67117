"""Service-time moments for the two packet types and the two-type M/G/1 solution.

A packet that arrives to a nonempty system starts service the moment its
predecessor leaves, so it always sees the PU idle (type 1).  A packet that
arrives to an empty system sees the PU busy with probability
:func:`p_on_type2` (type 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import channel as ch
from .channel import ChannelParams, SensingStrategy
from .errors import DomainError, InstabilityError

__all__ = [
    "MomentPair",
    "QueueSolution",
    "moments_pon_continuous",
    "moments_poff_continuous",
    "moments_pon_periodic",
    "moments_poff_periodic",
    "service_moments",
    "p_on_type2",
    "type2_moments",
    "mg1_solve",
    "mg1_conventional",
    "solve_scenario",
    "STABILITY_MARGIN",
]

STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class MomentPair:
    """First and second raw moments of a service time."""

    m1: float
    m2: float

    def __post_init__(self):
        if not (math.isfinite(self.m1) and math.isfinite(self.m2)):
            raise DomainError(f"moments must be finite, got {self.m1!r}, {self.m2!r}")
        if not self.m1 > 0.0:
            raise DomainError(f"mean service time must be > 0, got {self.m1!r}")
        if self.m2 < self.m1 * self.m1 * (1.0 - 1e-12):
            raise DomainError(f"second moment {self.m2!r} is below the squared mean")

    @property
    def variance(self) -> float:
        return max(self.m2 - self.m1 * self.m1, 0.0)


@dataclass(frozen=True)
class QueueSolution:
    """Mean-value solution of the two-type M/G/1 queue."""

    p0: float
    e_st: float
    e_st2: float
    e_q: float
    e_nq: float
    e_d: float
    e_r: float


def _check_ttr(ttr):
    if not (math.isfinite(ttr) and ttr > 0.0):
        raise DomainError(f"transmission time must be finite and > 0, got {ttr!r}")


def moments_pon_continuous(ttr: float, params: ChannelParams) -> MomentPair:
    """Service moments under continuous sensing when the PU is busy at the start."""
    _check_ttr(ttr)
    lam, x = params.lam, ttr / params.mu
    m1 = ttr + lam * (1.0 + x)
    m2 = lam * lam * (x * x + 4.0 * x + 2.0) + 2.0 * lam * ttr * (1.0 + x) + ttr * ttr
    return MomentPair(m1, m2)


def moments_poff_continuous(ttr: float, params: ChannelParams) -> MomentPair:
    """Service moments under continuous sensing when the PU is idle at the start."""
    _check_ttr(ttr)
    lam, x = params.lam, ttr / params.mu
    m1 = ttr + lam * x
    m2 = lam * lam * (x * x + 2.0 * x) + 2.0 * lam * ttr * x + ttr * ttr
    return MomentPair(m1, m2)


def moments_pon_periodic(ttr: float, params: ChannelParams, ts: float, *,
                         approximate_beta: bool = False) -> MomentPair:
    """Service moments under periodic sensing when the PU is busy at the start."""
    _check_ttr(ttr)
    g = ts / (1.0 - ch.beta(params, ts, approximate=approximate_beta))
    x = ttr / params.mu
    m1 = ttr + g * (1.0 + x)
    m2 = g * g * (x * x + 4.0 * x + 2.0) + g * (2.0 * ttr - ts) * (1.0 + x) + ttr * ttr
    return MomentPair(m1, m2)


def moments_poff_periodic(ttr: float, params: ChannelParams, ts: float, *,
                          approximate_beta: bool = False) -> MomentPair:
    """Service moments under periodic sensing when the PU is idle at the start."""
    _check_ttr(ttr)
    g = ts / (1.0 - ch.beta(params, ts, approximate=approximate_beta))
    x = ttr / params.mu
    m1 = ttr * (1.0 + g / params.mu)
    m2 = g * g * (x * x + 2.0 * x) - g * ts * x + g * 2.0 * ttr * x + ttr * ttr
    return MomentPair(m1, m2)


def service_moments(ttr: float, params: ChannelParams, sensing: SensingStrategy):
    """``(busy-start, idle-start)`` moment pairs for the given sensing strategy."""
    if sensing.is_periodic:
        return (moments_pon_periodic(ttr, params, sensing.ts),
                moments_poff_periodic(ttr, params, sensing.ts))
    return moments_pon_continuous(ttr, params), moments_poff_continuous(ttr, params)


def p_on_type2(params: ChannelParams, psi: float) -> float:
    """Probability that a packet arriving to an empty system finds the PU busy.

    The PU is idle when the system empties; the idle gap until the next
    arrival is exponential with mean ``psi``.
    """
    if not (math.isfinite(psi) and psi > 0.0):
        raise DomainError(f"mean interarrival time must be finite and > 0, got {psi!r}")
    lam, mu = params.lam, params.mu
    return lam * psi / (lam * psi + lam * mu + mu * psi)


def type2_moments(pon2: float, mom_on: MomentPair, mom_off: MomentPair) -> MomentPair:
    """Mixture of the busy-start and idle-start moments with weight ``pon2``."""
    if not 0.0 <= pon2 <= 1.0:
        raise DomainError(f"pon2 must lie in [0, 1], got {pon2!r}")
    return MomentPair(pon2 * mom_on.m1 + (1.0 - pon2) * mom_off.m1,
                      pon2 * mom_on.m2 + (1.0 - pon2) * mom_off.m2)


def _check_stable(psi: float, bound: float):
    if not (math.isfinite(psi) and psi > bound * (1.0 + STABILITY_MARGIN)):
        raise InstabilityError(psi, bound)


def mg1_solve(psi: float, type1: MomentPair, type2: MomentPair) -> QueueSolution:
    """Mean-value solution of the FIFO queue with two service-time types.

    Type 1 serves packets that found the system busy, type 2 packets that
    found it empty.
    """
    _check_stable(psi, type1.m1)
    slack = psi - type1.m1
    den = psi + type2.m1 - type1.m1
    p0 = slack / den
    e_st = psi * type2.m1 / den
    e_st2 = (slack * type2.m2 + type2.m1 * type1.m2) / den
    e_q = e_st2 / (2.0 * slack)
    w1 = (1.0 - p0) * type1.m1
    w2 = p0 * type2.m1
    e_r = (0.5 * (1.0 - p0) * type1.m2 + 0.5 * p0 * type2.m2) / (w1 + w2)
    return QueueSolution(p0=p0, e_st=e_st, e_st2=e_st2, e_q=e_q, e_nq=e_q / psi,
                         e_d=e_st + e_q, e_r=e_r)


def mg1_conventional(psi: float, overall: MomentPair) -> float:
    """Mean delay of a standard M/G/1 queue with a single service law.

    Fed with the overall moments of :func:`mg1_solve`, this is the baseline
    that ignores that queued packets always start with the PU idle.
    """
    _check_stable(psi, overall.m1)
    return overall.m1 + overall.m2 / (2.0 * (psi - overall.m1))


def solve_scenario(ttr: float, params: ChannelParams, sensing: SensingStrategy, psi: float):
    """Return ``(QueueSolution, conventional mean delay)`` for one operating point."""
    mom_on, mom_off = service_moments(ttr, params, sensing)
    type2 = type2_moments(p_on_type2(params, psi), mom_on, mom_off)
    sol = mg1_solve(psi, mom_off, type2)
    return sol, mg1_conventional(psi, MomentPair(sol.e_st, sol.e_st2))
