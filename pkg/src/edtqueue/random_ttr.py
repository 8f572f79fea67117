"""EDT laws when the transmission time itself is random (quasi-static Rayleigh fading).

The transmission time follows from the instantaneous SNR through
``T = H / (W log2(1 + gamma))`` with ``gamma ~ Exp(mean_snr)``.  Its
density is obtained by change of variables; the EDT density then mixes the
fixed-``T`` laws of :mod:`edtqueue.edt` over ``T``.

Normalization audits integrate the density over ``[0, t_max]`` and add the
tail mass ``P[T_ED > t_max]`` computed independently by conditioning on
``T`` (the transmission-time law has a ``1/t`` survival tail, so truncation
alone cannot reach 1e-4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import channel as ch
from .channel import ChannelParams, SensingStrategy
from .edt import WaitingRecurrence, waiting_density_poff, waiting_pdf_pon, waiting_upper_limit
from .errors import DomainError
from .special import bessel_i_scaled
from .quadrature import cell_integrals, gauss_legendre, integrate_adaptive

__all__ = [
    "RayleighTtrSpec",
    "ttr_pdf_rayleigh",
    "ttr_pdf_rayleigh_printed",
    "ttr_cdf_rayleigh",
    "ttr_sf_rayleigh",
    "rayleigh_snr_pdf",
    "fixed_ttr_from_capacity",
    "edt_pdf_random_ttr_continuous",
    "edt_pdf_random_ttr_periodic",
    "edt_pdf_oneshot",
    "periodic_random_lattice",
    "RandomTtrLaw",
]

_LN2 = math.log(2.0)
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class RayleighTtrSpec:
    """Packet size ``entropy_h`` (bits), bandwidth ``bandwidth_w`` and linear mean SNR."""

    entropy_h: float
    bandwidth_w: float
    mean_snr: float

    def __post_init__(self):
        for name in ("entropy_h", "bandwidth_w", "mean_snr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and > 0, got {v!r}")

    @property
    def bits_per_hz(self) -> float:
        """``H / W``: transmission time at one bit/s/Hz."""
        return self.entropy_h / self.bandwidth_w


def _ttr_logpdf(t: np.ndarray, spec: RayleighTtrSpec) -> np.ndarray:
    c = spec.bits_per_hz
    g = spec.mean_snr
    pos = t > 0.0
    safe = np.where(pos, t, 1.0)
    u = c * _LN2 / safe
    big = u > _MAX_EXPONENT
    u = np.where(big, 0.0, u)
    snr = np.expm1(u)
    log_f = -math.log(g) - snr / g + math.log(c * _LN2) - 2.0 * np.log(safe) + u
    return np.where(pos & ~big, log_f, -np.inf)


def _ttr_pdf(t, spec):
    """Transmission-time density without argument checks (0 for t <= 0)."""
    return np.exp(_ttr_logpdf(np.asarray(t, dtype=float), spec))


def ttr_pdf_rayleigh(t, spec: RayleighTtrSpec):
    """Density of ``T = H / (W log2(1 + gamma))`` for Rayleigh-faded ``gamma``.

    Obtained as ``f_gamma(gamma(t)) |d gamma / dt|`` with
    ``gamma(t) = 2^(H/(W t)) - 1``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0.0)):
        raise DomainError("transmission time must be > 0")
    out = _ttr_pdf(t_arr, spec)
    return float(out) if np.ndim(t) == 0 else out


def ttr_pdf_rayleigh_printed(t, spec: RayleighTtrSpec):
    """``(c/(g T^2)) exp(1/g + c/T - exp(c/T)/g)`` with ``c = H/W``.

    This is the transmission-time density when capacity is counted in nats
    (``T = c / ln(1 + gamma)``).  Kept only so reports can quantify its
    distance from :func:`ttr_pdf_rayleigh`, which uses ``log2``.
    """
    t_arr = np.asarray(t, dtype=float)
    c, g = spec.bits_per_hz, spec.mean_snr
    u = np.minimum(c / t_arr, _MAX_EXPONENT)
    out = c / (g * t_arr ** 2) * np.exp(1.0 / g + u - np.exp(u) / g)
    return float(out) if np.ndim(t) == 0 else out


def ttr_cdf_rayleigh(t, spec: RayleighTtrSpec):
    """``P[T <= t] = exp(-(2^(H/(W t)) - 1) / mean_snr)``."""
    t_arr = np.asarray(t, dtype=float)
    pos = t_arr > 0.0
    u = np.minimum(spec.bits_per_hz * _LN2 / np.where(pos, t_arr, 1.0), _MAX_EXPONENT)
    out = np.where(pos, np.exp(-np.expm1(u) / spec.mean_snr), 0.0)
    return float(out) if np.ndim(t) == 0 else out


def ttr_sf_rayleigh(t, spec: RayleighTtrSpec):
    """``P[T > t]``, accurate in the ``1/t`` tail."""
    t_arr = np.asarray(t, dtype=float)
    pos = t_arr > 0.0
    u = np.minimum(spec.bits_per_hz * _LN2 / np.where(pos, t_arr, 1.0), _MAX_EXPONENT)
    out = np.where(pos, -np.expm1(-np.expm1(u) / spec.mean_snr), 1.0)
    return float(out) if np.ndim(t) == 0 else out


def rayleigh_snr_pdf(mean_snr: float):
    """Exponential SNR density of a Rayleigh-faded link."""
    if not mean_snr > 0.0:
        raise DomainError("mean SNR must be > 0")
    return lambda g: math.exp(-g / mean_snr) / mean_snr


def fixed_ttr_from_capacity(entropy_h: float, bandwidth_w: float, *,
                            snr: float | None = None, snr_pdf=None) -> float:
    """Constant transmission time from static or ergodic capacity.

    Pass exactly one of ``snr`` (static channel, linear scale) or
    ``snr_pdf`` (density of the SNR for a fast-fading channel).
    """
    if not (entropy_h > 0.0 and bandwidth_w > 0.0):
        raise DomainError("H and W must be > 0")
    if (snr is None) == (snr_pdf is None):
        raise DomainError("give exactly one of snr or snr_pdf")
    if snr is not None:
        spectral = math.log2(1.0 + snr) if snr > -1.0 else -math.inf
    else:
        spectral = integrate_adaptive(lambda g: math.log2(1.0 + g) * snr_pdf(g), 0.0, math.inf)
    if not spectral > 0.0:
        raise DomainError(f"capacity must be > 0, got {spectral!r} bit/s/Hz")
    return entropy_h / (bandwidth_w * spectral)


# --------------------------------------------------------------------------
# Random transmission time, full work-preserving transmission
# --------------------------------------------------------------------------

def _conditional_wait_density(s: float, ttr: float, params: ChannelParams, p_on: float) -> float:
    return (p_on * waiting_pdf_pon(s, ttr, params)
            + (1.0 - p_on) * waiting_density_poff(s, ttr, params))


def _slope(params: ChannelParams, sensing: SensingStrategy) -> float:
    """Asymptotic ratio ``E[T_ED | T] / T`` for large ``T``."""
    if sensing.is_periodic:
        return 1.0 + sensing.ts / (params.mu * (1.0 - ch.beta(params, sensing.ts)))
    return 1.0 + params.lam / params.mu


def _ttr_quantile(p: np.ndarray, spec: RayleighTtrSpec) -> np.ndarray:
    """Inverse of :func:`ttr_cdf_rayleigh` for ``0 < p < 1``."""
    return spec.bits_per_hz / np.log2(1.0 - spec.mean_snr * np.log(p))


_CONV_PANELS = 32
_CONV_ORDER = 8
# transmission-time quantiles used as extra panel edges so that the peak of
# f_T is resolved even when it is narrow compared with t
_CONV_LEVELS = np.array([1e-9, 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                         0.6, 0.7, 0.8, 0.9, 0.95, 0.99])


def _convolution_rule(t: np.ndarray, spec: RayleighTtrSpec, rel_breaks=()):
    """Composite Gauss nodes and weights for ``int_0^t g(T) dT``, one row per ``t``.

    Panels split ``[0, t]`` evenly, at the fractions ``rel_breaks`` of ``t``
    and at fixed quantiles of ``T``.
    """
    rel = np.union1d(np.linspace(0.0, 1.0, _CONV_PANELS + 1), np.asarray(rel_breaks, dtype=float))
    fixed = _ttr_quantile(_CONV_LEVELS, spec)
    edges = np.concatenate([t[:, None] * rel[None, :],
                            np.minimum(fixed[None, :], t[:, None])], axis=1)
    edges.sort(axis=1)
    x, w = gauss_legendre(_CONV_ORDER)
    width = np.diff(edges, axis=1)
    nodes = edges[:, :-1, None] + width[:, :, None] * x
    weights = width[:, :, None] * w
    return nodes.reshape(len(t), -1), weights.reshape(len(t), -1)


def _wait_density_grid(s, tr, params: ChannelParams, p_on: float):
    """Mixed conditional waiting density for arrays ``s > 0`` and ``tr > 0``."""
    lam, mu = params.lam, params.mu
    x = 2.0 * np.sqrt(tr * s / (mu * lam))
    scale = np.exp(x - tr / mu - s / lam)
    pon = bessel_i_scaled(0, x) / lam
    poff = np.sqrt(tr / (mu * lam * s)) * bessel_i_scaled(1, x)
    return scale * (p_on * pon + (1.0 - p_on) * poff)


def _vectorized(kernel, t, chunk=512):
    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.ravel()
    out = np.zeros(flat.shape)
    pos = np.flatnonzero(flat > 0.0)
    for i in range(0, pos.size, chunk):
        sel = pos[i:i + chunk]
        out[sel] = kernel(flat[sel])
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(t_arr.shape)


def edt_pdf_random_ttr_continuous(t, spec: RayleighTtrSpec, params: ChannelParams):
    """EDT density under continuous sensing with a Rayleigh-random transmission time.

    The atom of the conditional law at ``T_ED = T`` is added in closed form
    as ``(mu/(lam+mu)) exp(-t/mu) f_T(t)``; the continuous part of the
    conditional law is mixed over ``T`` by a composite Gauss rule whose
    panels follow both ``t`` and the quantiles of ``T``.
    """
    p_on = ch.stationary_on_prob(params)
    slope = 1.0 + params.lam / params.mu

    def kernel(tv):
        tr, w = _convolution_rule(tv, spec, rel_breaks=(1.0 / slope,))
        # zero-width panels carry zero weight; keep their waiting time positive
        wait = np.maximum(tv[:, None] - tr, 1e-300)
        cont = np.sum(_wait_density_grid(wait, tr, params, p_on)
                      * _ttr_pdf(tr, spec) * w, axis=1)
        return (1.0 - p_on) * np.exp(-tv / params.mu) * _ttr_pdf(tv, spec) + cont

    return _vectorized(kernel, t)


def periodic_random_lattice(tau: float, spec: RayleighTtrSpec, params: ChannelParams, ts: float,
                            m_max: int) -> np.ndarray:
    """Periodic-sensing EDT density at ``tau + m ts`` for ``m = 0..m_max``.

    ``f(tau + m ts) = sum_n P[T_w = n ts | T = tau + (m-n) ts] f_T(tau + (m-n) ts)``,
    evaluated for every ``m`` at once by running the waiting-PMF recurrence
    over all lattice transmission times together.
    """
    if not 0.0 < tau <= ts * (1.0 + 1e-12):
        raise DomainError("tau must lie in (0, ts]")
    trs = tau + ts * np.arange(m_max + 1)
    f_tr = _ttr_pdf(trs, spec)
    nz = np.flatnonzero(f_tr > 0.0)
    out = np.zeros(m_max + 1)
    if len(nz) == 0:
        return out
    j0 = int(nz[0])
    p_on = ch.stationary_on_prob(params)
    rec = WaitingRecurrence(trs[j0:], params, ch.beta(params, ts))
    weights = f_tr[j0:]
    for n in range(m_max - j0 + 1):
        rows = m_max - j0 - n + 1
        rec.keep(rows)
        pon, poff = rec.next()
        out[j0 + n: j0 + n + rows] += weights[:rows] * (p_on * pon + (1.0 - p_on) * poff)
    return out


def _lattice_position(t: float, ts: float):
    m = max(math.ceil(t / ts) - 1, 0)
    tau = t - m * ts
    if tau <= 0.0:
        m -= 1
        tau += ts
    return tau, m


def edt_pdf_random_ttr_periodic(t: float, spec: RayleighTtrSpec, params: ChannelParams,
                                ts: float) -> float:
    """EDT density under periodic sensing with a Rayleigh-random transmission time."""
    if not ts > 0.0:
        raise DomainError("sensing period must be > 0")
    if np.ndim(t) != 0:
        return np.array([edt_pdf_random_ttr_periodic(float(x), spec, params, ts)
                         for x in np.ravel(t)]).reshape(np.shape(t))
    t = float(t)
    if t <= 0.0:
        return 0.0
    tau, m = _lattice_position(t, ts)
    return float(periodic_random_lattice(tau, spec, params, ts, m)[m])


# --------------------------------------------------------------------------
# One-shot transmission: the packet needs a single idle period
# --------------------------------------------------------------------------

def _oneshot_periodic_vec(t: np.ndarray, spec, params, ts) -> np.ndarray:
    p_on = ch.stationary_on_prob(params)
    b = ch.beta(params, ts)
    out = (1.0 - p_on) * _ttr_pdf(t, spec)
    n_hi = int(np.max(np.floor(t / ts))) if t.size else 0
    for n in range(1, n_hi + 1):
        out += p_on * (1.0 - b) * b ** (n - 1) * _ttr_pdf(t - n * ts, spec)
    return out


def _oneshot_periodic_lattice(tau: float, spec, params, ts, m_max: int) -> np.ndarray:
    """One-shot periodic density at ``tau + m ts``, the geometric sum as a convolution."""
    p_on = ch.stationary_on_prob(params)
    b = ch.beta(params, ts)
    f_tr = _ttr_pdf(tau + ts * np.arange(m_max + 1), spec)
    geo = np.zeros(m_max + 1)
    geo[1:] = (1.0 - b) * b ** np.arange(m_max)
    return (1.0 - p_on) * f_tr + p_on * np.convolve(f_tr, geo)[:m_max + 1]


def edt_pdf_oneshot(t, spec: RayleighTtrSpec, params: ChannelParams, strategy: SensingStrategy):
    """EDT density for packets that always finish within one idle period."""
    p_on = ch.stationary_on_prob(params)
    if strategy.is_periodic:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = _oneshot_periodic_vec(t_arr, spec, params, strategy.ts)
        return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))
    lam = params.lam

    def kernel(tv):
        tr, w = _convolution_rule(tv, spec)
        conv = np.sum(np.exp(-(tv[:, None] - tr) / lam) / lam * _ttr_pdf(tr, spec) * w, axis=1)
        return p_on * conv + (1.0 - p_on) * _ttr_pdf(tv, spec)

    return _vectorized(kernel, t)


# --------------------------------------------------------------------------
# Law object used by audits and Monte-Carlo comparisons
# --------------------------------------------------------------------------

class RandomTtrLaw:
    """One of the four random-``T`` EDT densities, with audit helpers.

    Parameters
    ----------
    spec, params, sensing
        Transmission-time, channel and sensing description.
    oneshot : bool
        Use the one-idle-period law instead of the work-preserving one.
    """

    atoms = ()

    def __init__(self, spec: RayleighTtrSpec, params: ChannelParams, sensing: SensingStrategy,
                 oneshot: bool = False):
        self.spec = spec
        self.params = params
        self.sensing = sensing
        self.oneshot = oneshot

    @property
    def edge_quantum(self):
        """Bin edges must be multiples of this under periodic sensing."""
        return self.sensing.ts if self.sensing.is_periodic else None

    def __repr__(self):
        return (f"RandomTtrLaw({self.spec!r}, {self.params!r}, {self.sensing!r}, "
                f"oneshot={self.oneshot})")

    def pdf(self, t):
        if self.oneshot:
            return edt_pdf_oneshot(t, self.spec, self.params, self.sensing)
        if self.sensing.is_periodic:
            return edt_pdf_random_ttr_periodic(t, self.spec, self.params, self.sensing.ts)
        return edt_pdf_random_ttr_continuous(t, self.spec, self.params)

    # -- integration over [0, t_max] ---------------------------------------

    def _lattice_cell_masses(self, m_max: int, order: int = 12) -> np.ndarray:
        """Mass of every cell ``[m ts, (m+1) ts]`` for ``m = 0..m_max``.

        The one-shot law is cheap per node but inherits the sharp peak of the
        transmission-time density, so its cells are split further.
        """
        ts = self.sensing.ts
        split = 64 if self.oneshot else 1
        x, w = gauss_legendre(order)
        x = ((np.arange(split)[:, None] + x[None, :]) / split).ravel()
        w = np.tile(w / split, split)
        masses = np.zeros(m_max + 1)
        for xi, wi in zip(x, w):
            tau = ts * xi
            if self.oneshot:
                vals = _oneshot_periodic_lattice(tau, self.spec, self.params, ts, m_max)
            else:
                vals = periodic_random_lattice(tau, self.spec, self.params, ts, m_max)
            masses += wi * ts * vals
        return masses

    def bin_masses(self, edges, split: int = 2) -> np.ndarray:
        """Probability of each ``[edges[i], edges[i+1])``.

        Under periodic sensing the edges must be multiples of ``ts``;
        otherwise each bin is cut into ``split`` Gauss cells.
        """
        edges = np.asarray(edges, dtype=float)
        if self.sensing.is_periodic:
            ts = self.sensing.ts
            idx = np.rint(edges / ts).astype(int)
            if np.any(np.abs(idx * ts - edges) > 1e-9 * max(1.0, edges.max())) or idx[0] < 0:
                raise DomainError("periodic bin edges must be nonnegative multiples of ts")
            cells = self._lattice_cell_masses(int(idx[-1]) - 1)
            cum = np.concatenate([[0.0], np.cumsum(cells)])
            return cum[idx[1:]] - cum[idx[:-1]]
        fine = np.concatenate([np.linspace(a, b, split, endpoint=False)
                               for a, b in zip(edges[:-1], edges[1:])] + [edges[-1:]])
        cells = cell_integrals(lambda t: np.asarray(self.pdf(t), dtype=float), fine, order=8)
        return cells.reshape(-1, split).sum(axis=1)

    def integral(self, t_max: float) -> float:
        """``int_0^t_max f(t) dt``."""
        if self.sensing.is_periodic:
            ts = self.sensing.ts
            m = int(round(t_max / ts))
            if abs(m * ts - t_max) > 1e-9 * t_max:
                raise DomainError("t_max must be a multiple of ts under periodic sensing")
            return math.fsum(self._lattice_cell_masses(m - 1))
        # composite Gauss on a log-spaced grid
        edges = np.concatenate([[0.0], np.geomspace(1e-3, t_max, 241)])
        return math.fsum(cell_integrals(lambda t: np.asarray(self.pdf(t), dtype=float),
                                        edges, order=8))

    # -- tail mass by conditioning on T -------------------------------------

    def tail_mass(self, t_max: float) -> float:
        """``P[T_ED > t_max]``, computed from the conditional laws given ``T``."""
        spec, params = self.spec, self.params
        p_on = ch.stationary_on_prob(params)
        sf = lambda x: float(ttr_sf_rayleigh(x, spec))  # noqa: E731
        if self.oneshot and self.sensing.is_periodic:
            ts = self.sensing.ts
            b = ch.beta(params, ts)
            n_hi = int(math.log(1e-18) / math.log(b)) + 1
            n = np.arange(1, n_hi + 1)
            tail_on = math.fsum((1.0 - b) * b ** (n - 1) * ttr_sf_rayleigh(t_max - n * ts, spec))
            return (1.0 - p_on) * sf(t_max) + p_on * tail_on
        if self.oneshot:
            lam = params.lam
            conv = integrate_adaptive(lambda w: math.exp(-w / lam) / lam * sf(t_max - w),
                                      0.0, t_max, epsabs=1e-12)
            return (1.0 - p_on) * sf(t_max) + p_on * (conv + math.exp(-t_max / lam))
        if self.sensing.is_periodic:
            return sf(t_max) + self._periodic_conditional_tail(t_max)
        return sf(t_max) + self._continuous_conditional_tail(t_max)

    def _continuous_conditional_tail(self, t_max: float) -> float:
        spec, params = self.spec, self.params
        p_on = ch.stationary_on_prob(params)

        def wait_sf(tr):
            f_tr = float(_ttr_pdf(tr, spec))
            if f_tr == 0.0:
                return 0.0
            w0 = t_max - tr
            hi = max(waiting_upper_limit(tr, params), w0)
            s = integrate_adaptive(lambda s: _conditional_wait_density(s, tr, params, p_on),
                                   w0, hi, epsabs=1e-12)
            return s * f_tr

        peak = t_max / _slope(params, self.sensing)
        return integrate_adaptive(wait_sf, 0.0, t_max, points=[peak], epsabs=1e-10)

    def _periodic_conditional_tail(self, t_max: float, order: int = 8) -> float:
        """``int_0^t_max f_T(T) P[n ts > t_max - T | T] dT``.

        The number of admissible waiting steps is constant on each cell
        ``T in (t_max - (k+1) ts, t_max - k ts]``, so each cell gets its own
        Gauss rule and the survival is accumulated along the recurrence.
        """
        spec, ts = self.spec, self.sensing.ts
        k_max = int(round(t_max / ts))
        x, w = gauss_legendre(order)
        # node T = t_max - (k + 1 - x) ts, admissible n <= k
        k = np.repeat(np.arange(k_max), order)
        trs = t_max - (k + 1 - np.tile(x, k_max)) * ts
        weights = np.tile(w, k_max) * ts * _ttr_pdf(trs, spec)
        keep = weights > 0.0
        trs, weights, k = trs[keep], weights[keep], k[keep]
        order_idx = np.argsort(-k, kind="stable")
        return self._tail_from_cumulative(trs[order_idx], weights[order_idx], k[order_idx])

    def _tail_from_cumulative(self, trs, weights, k) -> float:
        """``sum_i weights[i] P[n > k[i] | trs[i]]`` with rows sorted by decreasing ``k``."""
        params, ts = self.params, self.sensing.ts
        p_on = ch.stationary_on_prob(params)
        rec = WaitingRecurrence(trs, params, ch.beta(params, ts))
        cum = np.zeros(len(trs))
        done = np.zeros(len(trs))
        alive = len(trs)
        for n in range(int(k.max()) + 1 if len(k) else 0):
            rows = int(np.searchsorted(-k, -n, side="right"))
            if rows < alive:
                done[rows:alive] = cum[rows:alive]
                alive = rows
                rec.keep(rows)
            pon, poff = rec.next()
            cum[:alive] += p_on * pon + (1.0 - p_on) * poff
        done[:alive] = cum[:alive]
        return math.fsum(weights * (1.0 - done))

    def total_mass(self, t_max: float) -> float:
        """Normalization audit: ``int_0^t_max f + P[T_ED > t_max]``."""
        return self.integral(t_max) + self.tail_mass(t_max)

    # -- CDF for KS statistics ----------------------------------------------

    @cached_property
    def _cdf_grid(self):
        hi = self._cdf_upper
        if self.sensing.is_periodic:
            ts = self.sensing.ts
            edges = ts * np.arange(int(math.ceil(hi / ts)) + 1)
        else:
            edges = np.linspace(0.0, hi, 801)
        cum = np.concatenate([[0.0], np.cumsum(self.bin_masses(edges, split=1))])
        return edges, cum

    @property
    def comparison_upper(self) -> float:
        """End of the CDF grid; comparisons treat everything beyond it as one tail cell."""
        return self._cdf_upper

    @property
    def _cdf_upper(self) -> float:
        c = self.spec.bits_per_hz
        return 40.0 * c / math.log2(1.0 + self.spec.mean_snr) * _slope(self.params, self.sensing) \
            + 20.0 * self.params.lam

    def cdf(self, t):
        """``P[T_ED <= t]`` from cumulative bin masses; flat beyond the grid."""
        edges, cum = self._cdf_grid
        t_arr = np.asarray(t, dtype=float)
        out = np.interp(t_arr, edges, cum, left=0.0, right=cum[-1])
        return float(out) if np.ndim(t) == 0 else out

    cdf_left = cdf
