"""Extended delivery time (EDT) laws for a fixed transmission time.

Continuous sensing yields a mixed law: an atom at ``ttr`` (the packet never
waits) plus a density built from ``I0``/``I1``.  Periodic sensing yields a
lattice law on ``n * ts + ttr``.

The pointwise periodic PMFs go through the terminating 1F1 series.  Full
PMF tables use the equivalent three-term Laguerre recurrence, since
``1F1(-m; 1; x) = L_m(x)`` and ``1F1(-m; 2; x) = L_m^(1)(x) / (m + 1)``;
that is O(N) instead of O(N^2) for a table of N entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import channel as ch
from .channel import ChannelParams
from .errors import DomainError, NumericFailure
from .quadrature import cell_integrals, integrate_adaptive
from .special import bessel_i_scaled, erlang_pdf, kummer_1f1_terminating_log

__all__ = [
    "MixedDistribution",
    "DiscreteEdtPmf",
    "prob_k_slots",
    "waiting_pdf_pon",
    "waiting_density_poff",
    "waiting_dist_poff",
    "edt_pdf_continuous",
    "waiting_pmf_pon_periodic",
    "waiting_pmf_poff_periodic",
    "periodic_waiting_table",
    "edt_pmf_periodic",
    "waiting_upper_limit",
    "waiting_pdf_pon_series",
    "waiting_density_poff_series",
    "waiting_pmf_pon_periodic_series",
    "waiting_pmf_poff_periodic_series",
    "conditional_waiting_pmfs",
]

PMF_TAIL = 1e-12
_MAX_PMF_LENGTH = 50_000_000
_CDF_CELLS = 20_000


# --------------------------------------------------------------------------
# Distribution containers
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MixedDistribution:
    """Atoms plus a continuous density on ``[support_low, support_high]``.

    ``density`` must accept arrays.  ``support_high`` is where the density's
    exponential envelope has fallen below 1e-16 of its peak; it is used as
    the upper limit of every improper integral.
    """

    atoms: tuple
    density: Callable = field(repr=False)
    support_low: float
    support_high: float
    points: tuple = ()

    def __post_init__(self):
        for loc, mass in self.atoms:
            if not 0.0 < mass <= 1.0:
                raise DomainError(f"atom mass must lie in (0, 1], got {mass!r} at {loc!r}")

    def pdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        inside = t_arr >= self.support_low
        out = np.zeros(t_arr.shape)
        if np.any(inside):
            out[inside] = self.density(t_arr[inside])
        return float(out) if np.ndim(t) == 0 else out

    @property
    def atom_mass(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    def continuous_mass(self) -> float:
        return integrate_adaptive(self._scalar_pdf, self.support_low, self.support_high,
                                  points=self.points)

    def total_mass(self) -> float:
        """Normalization audit: atom masses plus the integrated density."""
        return self.atom_mass + self.continuous_mass()

    def moment(self, order: int) -> float:
        cont = integrate_adaptive(lambda t: t ** order * self._scalar_pdf(t),
                                  self.support_low, self.support_high, points=self.points,
                                  epsabs=1e-12)
        return cont + math.fsum(m * loc ** order for loc, m in self.atoms)

    @property
    def mean(self) -> float:
        return self.moment(1)

    def _scalar_pdf(self, t):
        return float(self.density(np.asarray([t]))[0])

    @cached_property
    def _cdf_grid(self):
        edges = np.linspace(self.support_low, self.support_high, _CDF_CELLS + 1)
        cum = np.concatenate([[0.0], np.cumsum(cell_integrals(self.density, edges, order=8))])
        return edges, cum

    def cdf(self, t):
        """``P[X <= t]`` with atoms counted as jumps (right-continuous)."""
        edges, cum = self._cdf_grid
        t_arr = np.asarray(t, dtype=float)
        out = np.interp(t_arr, edges, cum, left=0.0, right=cum[-1])
        for loc, mass in self.atoms:
            out = out + mass * (t_arr >= loc)
        return float(out) if np.ndim(t) == 0 else out

    def cdf_left(self, t):
        """``P[X < t]``."""
        out = np.asarray(self.cdf(t), dtype=float)
        t_arr = np.asarray(t, dtype=float)
        for loc, mass in self.atoms:
            out = out - mass * (t_arr == loc)
        return float(out) if np.ndim(t) == 0 else out

    def bin_masses(self, edges) -> np.ndarray:
        """Continuous mass in each ``[edges[i], edges[i+1])``, atoms excluded."""
        clipped = np.maximum(np.asarray(edges, dtype=float), self.support_low)
        return cell_integrals(self.density, clipped, order=12)


@dataclass(frozen=True, eq=False)
class DiscreteEdtPmf:
    """Lattice law ``P[T_ED = n * ts + ttr] = probs[n]``."""

    ttr: float
    ts: float
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < 0.0):
            raise DomainError("PMF entries must be nonnegative")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def support(self) -> np.ndarray:
        return np.arange(len(self.probs)) * self.ts + self.ttr

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, n: int) -> float:
        return float(self.probs[n]) if 0 <= n < len(self.probs) else 0.0

    def as_mapping(self) -> dict:
        return {n: float(p) for n, p in enumerate(self.probs)}

    def total(self) -> float:
        return math.fsum(self.probs)

    def moment(self, order: int) -> float:
        return math.fsum(self.probs * self.support ** order)

    @property
    def mean(self) -> float:
        return self.moment(1)

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        cum = np.cumsum(self.probs)
        idx = np.floor((t_arr - self.ttr) / self.ts + 1e-9).astype(int)
        out = np.where(idx < 0, 0.0, cum[np.clip(idx, 0, len(cum) - 1)])
        return float(out) if np.ndim(t) == 0 else out


# --------------------------------------------------------------------------
# Continuous sensing
# --------------------------------------------------------------------------

def prob_k_slots(k: int, ttr: float, mu: float) -> float:
    """Probability the packet completes in exactly ``k`` transmission slots.

    Idle periods are exponential with mean ``mu``, so the number of
    interruptions before ``ttr`` of airtime is Poisson(``ttr/mu``).
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if not ttr >= 0.0 or not mu > 0.0:
        raise DomainError("ttr must be >= 0 and mu > 0")
    k = int(k)
    m = ttr / mu
    if m == 0.0:
        return 1.0 if k == 1 else 0.0
    return math.exp((k - 1) * math.log(m) - m - math.lgamma(k))


def waiting_upper_limit(ttr: float, params: ChannelParams) -> float:
    """Waiting time beyond which ``exp(-(sqrt(t/lam) - sqrt(ttr/mu))^2) < e^-64``."""
    return params.lam * (math.sqrt(ttr / params.mu) + 8.0) ** 2


def _check_ttr(ttr, strict=False):
    if strict and not ttr > 0.0:
        raise DomainError(f"transmission time must be > 0, got {ttr!r}")
    if not ttr >= 0.0 or not math.isfinite(ttr):
        raise DomainError(f"transmission time must be finite and >= 0, got {ttr!r}")


def waiting_pdf_pon(t, ttr: float, params: ChannelParams):
    """Waiting-time density for a packet that finds the PU busy."""
    _check_ttr(ttr)
    lam, mu = params.lam, params.mu
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("waiting time must be >= 0")
    x = 2.0 * np.sqrt(ttr * t_arr / (mu * lam))
    log_f = -math.log(lam) - ttr / mu - t_arr / lam + x + np.log(bessel_i_scaled(0, x))
    out = np.exp(log_f)
    return float(out) if np.ndim(t) == 0 else out


def waiting_density_poff(t, ttr: float, params: ChannelParams):
    """Continuous part of the waiting law for a packet that finds the PU idle."""
    _check_ttr(ttr)
    lam, mu = params.lam, params.mu
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("waiting time must be >= 0")
    if ttr == 0.0:
        out = np.zeros(t_arr.shape)
        return float(out) if np.ndim(t) == 0 else out
    pos = t_arr > 0.0
    safe_t = np.where(pos, t_arr, 1.0)
    x = 2.0 * np.sqrt(ttr * safe_t / (mu * lam))
    with np.errstate(divide="ignore"):
        log_f = (0.5 * np.log(ttr / (mu * lam * safe_t)) - ttr / mu - safe_t / lam
                 + x + np.log(bessel_i_scaled(1, x)))
    at_zero = ttr / (mu * lam) * math.exp(-ttr / mu)
    out = np.where(pos, np.exp(log_f), at_zero)
    return float(out) if np.ndim(t) == 0 else out


def waiting_dist_poff(ttr: float, params: ChannelParams) -> MixedDistribution:
    """Waiting law for a packet that finds the PU idle: atom at 0 plus a density."""
    _check_ttr(ttr)
    atom = math.exp(-ttr / params.mu)
    return MixedDistribution(
        atoms=((0.0, atom),),
        density=lambda t: waiting_density_poff(t, ttr, params),
        support_low=0.0,
        support_high=waiting_upper_limit(ttr, params),
    )


def edt_pdf_continuous(ttr: float, params: ChannelParams) -> MixedDistribution:
    """EDT law under continuous sensing with a fixed transmission time."""
    _check_ttr(ttr, strict=True)
    p_on = ch.stationary_on_prob(params)
    p_off = 1.0 - p_on

    def density(t):
        s = np.maximum(np.asarray(t, dtype=float) - ttr, 0.0)
        return p_on * waiting_pdf_pon(s, ttr, params) + p_off * waiting_density_poff(s, ttr, params)

    return MixedDistribution(
        atoms=((ttr, p_off * math.exp(-ttr / params.mu)),),
        density=density,
        support_low=ttr,
        support_high=ttr + waiting_upper_limit(ttr, params),
    )


def _slot_mixture(t, ttr, params, shift):
    """``sum_k P_k * Erlang(k - shift, lam)(t)`` summed until the terms are negligible."""
    total, k, peak = [], 1 + shift, 0.0
    while True:
        term = prob_k_slots(k, ttr, params.mu) * float(erlang_pdf(k - shift, params.lam, t))
        total.append(term)
        peak = max(peak, term)
        if k > ttr / params.mu + 1 and term <= 1e-18 * peak:
            return math.fsum(total)
        k += 1


def waiting_pdf_pon_series(t: float, ttr: float, params: ChannelParams) -> float:
    """Busy-start waiting density as a slot-count mixture of Erlang densities."""
    _check_ttr(ttr)
    if not t > 0.0:
        raise DomainError("series form needs t > 0")
    return _slot_mixture(float(t), ttr, params, 0)


def waiting_density_poff_series(t: float, ttr: float, params: ChannelParams) -> float:
    """Continuous part of the idle-start waiting law as an Erlang mixture."""
    _check_ttr(ttr)
    if not t > 0.0:
        raise DomainError("series form needs t > 0")
    return _slot_mixture(float(t), ttr, params, 1)


# --------------------------------------------------------------------------
# Periodic sensing
# --------------------------------------------------------------------------

def _periodic_args(n, ts, params, approximate_beta):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    b = ch.beta(params, ts, approximate=approximate_beta)
    return int(n), b


def waiting_pmf_pon_periodic(n: int, ttr: float, params: ChannelParams, ts: float, *,
                             approximate_beta: bool = False) -> float:
    """``P[T_w = n ts]`` for a packet that finds the PU busy (zero for ``n = 0``)."""
    _check_ttr(ttr)
    n, b = _periodic_args(n, ts, params, approximate_beta)
    if n == 0:
        return 0.0
    z = -ttr * (1.0 - b) / (params.mu * b)
    hyp = kummer_1f1_terminating_log(1 - n, 1, z)
    log_pre = math.log1p(-b) + (n - 1) * math.log(b) - ttr / params.mu
    return hyp.scale_exp(log_pre).value


def waiting_pmf_poff_periodic(n: int, ttr: float, params: ChannelParams, ts: float, *,
                              approximate_beta: bool = False) -> float:
    """``P[T_w = n ts]`` for a packet that finds the PU idle."""
    _check_ttr(ttr)
    n, b = _periodic_args(n, ts, params, approximate_beta)
    if n == 0:
        return math.exp(-ttr / params.mu)
    if ttr == 0.0:
        return 0.0
    z = -ttr * (1.0 - b) / (params.mu * b)
    hyp = kummer_1f1_terminating_log(1 - n, 2, z)
    log_pre = (math.log(ttr / params.mu) + math.log1p(-b) + (n - 1) * math.log(b)
               - ttr / params.mu)
    return hyp.scale_exp(log_pre).value


def _binomial_series(n, ttr, params, b, k_offset):
    """``sum_{k<n} x^k / (k + k_offset)! * C(n-1, k)`` in log space, ``x = ttr(1-b)/(mu b)``."""
    log_x = math.log(ttr * (1.0 - b) / (params.mu * b))
    logs = [k * log_x - math.lgamma(k + k_offset + 1) + math.lgamma(n)
            - math.lgamma(k + 1) - math.lgamma(n - k) for k in range(n)]
    top = max(logs)
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def waiting_pmf_pon_periodic_series(n: int, ttr: float, params: ChannelParams, ts: float, *,
                                    approximate_beta: bool = False) -> float:
    """Busy-start periodic waiting PMF as a finite binomial sum."""
    _check_ttr(ttr, strict=True)
    n, b = _periodic_args(n, ts, params, approximate_beta)
    if n == 0:
        return 0.0
    log_pre = math.log1p(-b) + (n - 1) * math.log(b) - ttr / params.mu
    return math.exp(log_pre + _binomial_series(n, ttr, params, b, 0))


def waiting_pmf_poff_periodic_series(n: int, ttr: float, params: ChannelParams, ts: float, *,
                                     approximate_beta: bool = False) -> float:
    """Idle-start periodic waiting PMF as a finite binomial sum."""
    _check_ttr(ttr, strict=True)
    n, b = _periodic_args(n, ts, params, approximate_beta)
    if n == 0:
        return math.exp(-ttr / params.mu)
    log_pre = (math.log(ttr * (1.0 - b) / params.mu) + (n - 1) * math.log(b) - ttr / params.mu)
    return math.exp(log_pre + _binomial_series(n, ttr, params, b, 1))


class WaitingRecurrence:
    """Column-by-column generator of the two conditional periodic waiting PMFs.

    Works on a vector of transmission times at once.  State per row is the
    pair of scaled Laguerre values ``beta^m L_m(-z)`` and
    ``beta^m L_m^(1)(-z)``; rows are renormalized when they leave
    ``[1e-200, 1e200]``, with the scale kept in log form.
    """

    _RESCALE_ABOVE = 1e200

    def __init__(self, ttrs, params: ChannelParams, b: float):
        self.ttrs = np.atleast_1d(np.asarray(ttrs, dtype=float))
        self.b = b
        mu = params.mu
        self.w = self.ttrs * (1.0 - b) / mu
        self.log_on = math.log1p(-b) - self.ttrs / mu
        with np.errstate(divide="ignore"):
            self.log_off = np.log(self.ttrs / mu) + math.log1p(-b) - self.ttrs / mu
        self.log_atom = -self.ttrs / mu
        self.m = -1
        self.q_prev = np.zeros_like(self.ttrs)
        self.q = np.ones_like(self.ttrs)
        self.r_prev = np.zeros_like(self.ttrs)
        self.r = np.ones_like(self.ttrs)
        self.log_scale = np.zeros_like(self.ttrs)

    def keep(self, rows: int):
        """Drop every row beyond the first ``rows``."""
        for name in ("ttrs", "w", "log_on", "log_off", "log_atom", "q_prev", "q",
                     "r_prev", "r", "log_scale"):
            setattr(self, name, getattr(self, name)[:rows])

    def next(self):
        """Return ``(pon[n], poff[n])`` for the next ``n``, starting at 0."""
        m = self.m
        self.m += 1
        if m < 0:
            return np.zeros_like(self.ttrs), np.exp(self.log_atom)
        if m > 0:
            b, w = self.b, self.w
            q_new = ((b * (2 * m - 1) + w) * self.q - b * b * (m - 1) * self.q_prev) / m
            r_new = ((b * 2 * m + w) * self.r - b * b * m * self.r_prev) / m
            self.q_prev, self.q = self.q, q_new
            self.r_prev, self.r = self.r, r_new
            size = np.maximum(np.abs(self.q), np.abs(self.r))
            big = size > self._RESCALE_ABOVE
            small = (size < 1.0 / self._RESCALE_ABOVE) & (size > 0.0)
            if np.any(big | small):
                factor = np.where(big, self._RESCALE_ABOVE,
                                  np.where(small, 1.0 / self._RESCALE_ABOVE, 1.0))
                for name in ("q", "q_prev", "r", "r_prev"):
                    setattr(self, name, getattr(self, name) / factor)
                self.log_scale = self.log_scale + np.log(factor)
        # column n = m + 1 uses the state at Laguerre degree m
        with np.errstate(divide="ignore"):
            pon = np.exp(np.log(self.q) + self.log_scale + self.log_on)
            poff = np.exp(np.log(self.r) + self.log_scale + self.log_off) / (m + 1)
        if np.any(~np.isfinite(pon)) or np.any(~np.isfinite(poff)):
            raise NumericFailure("periodic waiting recurrence produced a non-finite value")
        return pon, poff


def periodic_waiting_table(ttr, params: ChannelParams, ts: float, n_max: int, *,
                           approximate_beta: bool = False):
    """Conditional PMF tables ``(pon, poff)`` of shape ``(len(ttr), n_max + 1)``."""
    b = ch.beta(params, ts, approximate=approximate_beta)
    rec = WaitingRecurrence(ttr, params, b)
    pon = np.empty((len(rec.ttrs), n_max + 1))
    poff = np.empty_like(pon)
    for n in range(n_max + 1):
        pon[:, n], poff[:, n] = rec.next()
    return pon, poff


def _tail_index(p: np.ndarray, b: float) -> int | None:
    """Smallest N with a provable-by-ratio tail below PMF_TAIL, or None."""
    geo_n = math.ceil(math.log(PMF_TAIL * (1.0 - b)) / math.log(b)) if b > 0 else 1
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = p[1:] / p[:-1]
        bound = p[1:] * ratio / (1.0 - ratio)
    ok = (ratio < 1.0) & (bound < 0.1 * PMF_TAIL) | (p[1:] == 0.0)
    ok[: max(geo_n - 1, 0)] = False
    idx = np.flatnonzero(ok)
    return int(idx[0]) + 1 if len(idx) else None


def conditional_waiting_pmfs(ttr: float, params: ChannelParams, ts: float, *,
                             approximate_beta: bool = False):
    """Busy-start and idle-start waiting PMFs, truncated together.

    The cut is the first ``N`` where ``beta^N / (1 - beta)`` and the
    ratio-bounded tail of both PMFs are below 1e-12.
    """
    _check_ttr(ttr, strict=True)
    b = ch.beta(params, ts, approximate=approximate_beta)
    mean_n = (1.0 + ttr / params.mu) / (1.0 - b)
    n_max = int(2 * mean_n + 40.0 * math.sqrt(mean_n / (1.0 - b)) + 64)
    while True:
        if n_max > _MAX_PMF_LENGTH:
            raise NumericFailure("periodic EDT PMF did not reach its tail bound")
        pon, poff = periodic_waiting_table([ttr], params, ts, n_max,
                                           approximate_beta=approximate_beta)
        n_on = _tail_index(pon[0], b)
        n_off = _tail_index(poff[0], b)
        if n_on is not None and n_off is not None:
            cut = max(n_on, n_off)
            return pon[0, :cut + 1], poff[0, :cut + 1]
        n_max *= 2


def edt_pmf_periodic(ttr: float, params: ChannelParams, ts: float, *,
                     approximate_beta: bool = False) -> DiscreteEdtPmf:
    """EDT lattice law under periodic sensing with a fixed transmission time."""
    pon, poff = conditional_waiting_pmfs(ttr, params, ts, approximate_beta=approximate_beta)
    p_on = ch.stationary_on_prob(params)
    return DiscreteEdtPmf(ttr=ttr, ts=ts, probs=p_on * pon + (1.0 - p_on) * poff)
