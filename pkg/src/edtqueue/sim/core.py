"""Monte-Carlo EDT sampling and FIFO queue simulation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelParams, SensingStrategy
from ..errors import DomainError, SimulationError
from ..random_ttr import RayleighTtrSpec
from . import kernels
from .rng import replica_generators, split_counts

__all__ = [
    "SimConfig",
    "EmpiricalDistribution",
    "EdtSamples",
    "QueueSimResult",
    "sample_edt",
    "simulate_edt_single",
    "simulate_queue",
    "default_warmup",
    "QUEUE_ASSUMPTIONS",
]

_INIT_MODES = {"stationary": 0, "on": 1, "off": 2}

#: Modelling choices the analysis leaves open, reported with every queue run.
QUEUE_ASSUMPTIONS = (
    "a packet arriving to an empty system while the PU is idle starts transmitting at once, "
    "also under periodic sensing",
    "periodic sensing instants are ts, 2 ts, ... after the SU starts waiting "
    "(arrival to a busy channel or interruption)",
)


@dataclass(frozen=True)
class SimConfig:
    """Simulation setup.

    ``ttr`` is either a fixed transmission time or a :class:`RayleighTtrSpec`.
    ``oneshot`` packets need a single idle period and ignore PU returns once
    they start.  ``n_samples`` is the total over all replicas.
    """

    channel: ChannelParams
    sensing: SensingStrategy
    ttr: float | RayleighTtrSpec
    n_samples: int = 1_000_000
    seed: int = 0
    replicas: int = 1
    oneshot: bool = False
    init_state: str = "stationary"
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.n_samples, bool) or int(self.n_samples) != self.n_samples \
                or self.n_samples < 1:
            raise DomainError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if isinstance(self.replicas, bool) or int(self.replicas) != self.replicas \
                or self.replicas < 1:
            raise DomainError(f"replicas must be a positive integer, got {self.replicas!r}")
        if self.init_state not in _INIT_MODES:
            raise DomainError(f"init_state must be one of {sorted(_INIT_MODES)}")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if not isinstance(self.ttr, RayleighTtrSpec):
            if not (math.isfinite(self.ttr) and self.ttr > 0.0):
                raise DomainError(f"transmission time must be finite and > 0, got {self.ttr!r}")
        replica_generators(self.seed, 1)  # validates the seed


def _map(fn, items, workers):
    if workers == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# Single-packet EDT
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EdtSamples:
    """Raw per-packet output: EDT, PU busy at arrival, transmission slots, sensing instants."""

    edt: np.ndarray = field(repr=False)
    busy_at_arrival: np.ndarray = field(repr=False)
    slots: np.ndarray = field(repr=False)
    senses: np.ndarray = field(repr=False)


def _draw_ttrs(rng, ttr, n):
    if isinstance(ttr, RayleighTtrSpec):
        snr = rng.exponential(ttr.mean_snr, n)
        with np.errstate(divide="ignore"):
            return ttr.bits_per_hz / np.log2(1.0 + snr)
    return np.full(n, float(ttr))


def _edt_replica(args):
    cfg, rng, n = args
    ttrs = _draw_ttrs(rng, cfg.ttr, n)
    if not np.all(np.isfinite(ttrs)):
        raise SimulationError("drew an infinite transmission time (zero SNR)")
    edt = np.empty(n)
    busy = np.empty(n, dtype=np.bool_)
    slots = np.empty(n, dtype=np.int64)
    senses = np.empty(n, dtype=np.int64)
    ts = cfg.sensing.ts if cfg.sensing.is_periodic else 0.0
    status, idx = kernels.edt_samples(rng, ttrs, cfg.channel.lam, cfg.channel.mu,
                                      cfg.sensing.is_periodic, ts, cfg.oneshot,
                                      _INIT_MODES[cfg.init_state], edt, busy, slots, senses)
    if status == kernels.BUDGET_EXHAUSTED:
        raise SimulationError(f"sample {idx} exceeded {kernels.EVENT_BUDGET} events")
    return edt, busy, slots, senses


def sample_edt(cfg: SimConfig) -> EdtSamples:
    """Draw ``cfg.n_samples`` independent EDTs; replicas are concatenated in order."""
    gens = replica_generators(cfg.seed, cfg.replicas)
    counts = split_counts(cfg.n_samples, cfg.replicas)
    parts = _map(_edt_replica, list(zip([cfg] * cfg.replicas, gens, counts)), cfg.workers)
    return EdtSamples(*(np.concatenate(cols) for cols in zip(*parts)))


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sample law with exact-repeat atoms split off from a uniform histogram.

    ``atom_candidates`` maps each value seen bit-identically at least twice
    to its count; the histogram holds every other sample.
    """

    atom_candidates: dict
    low: float
    width: float
    counts: np.ndarray = field(repr=False)
    n: int
    mean: float
    m2: float
    samples: np.ndarray = field(repr=False)

    @classmethod
    def from_samples(cls, samples, n_bins: int = 200) -> "EmpiricalDistribution":
        x = np.sort(np.asarray(samples, dtype=float))
        if x.size == 0:
            raise DomainError("empty sample")
        values, first, reps = np.unique(x, return_index=True, return_counts=True)
        atom_mask = reps >= 2
        atoms = {float(v): int(c) for v, c in zip(values[atom_mask], reps[atom_mask])}
        rest = values[~atom_mask]
        if rest.size:
            low, high = float(rest[0]), float(rest[-1])
            width = (high - low) / n_bins if high > low else 1.0
            idx = np.minimum(((rest - low) / width).astype(np.int64), n_bins - 1)
            counts = np.bincount(idx, minlength=n_bins)
        else:
            low, width, counts = float(x[0]), 1.0, np.zeros(n_bins, dtype=np.int64)
        return cls(atom_candidates=atoms, low=low, width=width, counts=counts, n=int(x.size),
                   mean=float(np.mean(x)), m2=float(np.mean(x * x)), samples=x)

    def atom_mass(self, value: float) -> float:
        return self.atom_candidates.get(float(value), 0) / self.n

    def atom_stderr(self, value: float) -> float:
        p = self.atom_mass(value)
        return math.sqrt(max(p * (1.0 - p), 1.0 / self.n) / self.n)

    def moment_stderr(self, order: int) -> float:
        return float(np.std(self.samples ** order, ddof=1) / math.sqrt(self.n))


def simulate_edt_single(cfg: SimConfig, n_bins: int = 200) -> EmpiricalDistribution:
    """Empirical EDT law of ``cfg.n_samples`` packets arriving at random times."""
    return EmpiricalDistribution.from_samples(sample_edt(cfg).edt, n_bins=n_bins)


# --------------------------------------------------------------------------
# Queue
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QueueSimResult:
    """Post-warmup statistics of a queue run; ``*_se`` are batch-means standard errors."""

    n_packets: int
    mean_delay: float
    mean_delay_se: float
    mean_queue_wait: float
    mean_queue_wait_se: float
    mean_queue_len: float
    mean_queue_len_se: float
    p0_empirical: float
    type1_fraction: float
    type1_service: tuple
    type2_service: tuple
    type2_busy_fraction: float
    utilization: float
    unstable: bool
    type1_checks: int
    assumptions: tuple = QUEUE_ASSUMPTIONS


def default_warmup(n_packets: int) -> int:
    return max(10_000, n_packets // 100)


def _overlap(lo, hi, a, b):
    """Length of ``[lo, hi] ∩ [a, b]`` elementwise."""
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def _queue_replica(args):
    cfg, psi, rng, n, warmup = args
    ts = cfg.sensing.ts if cfg.sensing.is_periodic else 0.0
    arrival = np.empty(n)
    start = np.empty(n)
    departure = np.empty(n)
    service = np.empty(n)
    type1 = np.empty(n, dtype=np.bool_)
    busy = np.empty(n, dtype=np.bool_)
    status, checks = kernels.queue_run(rng, n, psi, float(cfg.ttr), cfg.channel.lam,
                                       cfg.channel.mu, cfg.sensing.is_periodic, ts,
                                       arrival, start, departure, service, type1, busy)
    if status == kernels.TYPE1_SAW_BUSY:
        raise SimulationError("a queued packet reached the head of the queue while the PU was busy")
    if status == kernels.BUDGET_EXHAUSTED:
        raise SimulationError(f"a service exceeded {kernels.EVENT_BUDGET} events")
    return arrival, start, departure, service, type1, busy, checks


def _batch_se(values, batches=50):
    if len(values) < 2 * batches:
        return float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.inf
    means = np.array([b.mean() for b in np.array_split(values, batches)])
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def _window_stats(arrival, start, departure, warmup, batches=50):
    """Time-average queue length and empty fraction over ``[arrival[w], arrival[-1]]``.

    Also returns a batch-means standard error of the queue length.
    """
    a, b = arrival[warmup], arrival[-1]
    in_queue = _overlap(arrival, start, a, b)
    prev_dep = np.concatenate([[0.0], departure[:-1]])
    empty = _overlap(prev_dep, arrival, a, b)
    span = b - a
    nq = in_queue.sum() / span
    p0 = empty.sum() / span
    cuts = arrival[warmup:][np.linspace(0, len(arrival) - warmup - 1, batches + 1).astype(int)]
    per = np.array([_overlap(arrival, start, lo, hi).sum() / (hi - lo)
                    for lo, hi in zip(cuts[:-1], cuts[1:]) if hi > lo])
    se = float(np.std(per, ddof=1) / math.sqrt(len(per))) if len(per) > 1 else math.inf
    return nq, se, p0


def simulate_queue(cfg: SimConfig, psi: float, n_packets: int, warmup: int | None = None
                   ) -> QueueSimResult:
    """FIFO queue with Poisson arrivals of mean spacing ``psi`` over one PU trajectory per replica.

    ``n_packets`` is split across replicas; each replica discards its own
    first ``warmup`` packets (default ``max(1e4, 1% of its share)``).
    """
    if isinstance(cfg.ttr, RayleighTtrSpec) or cfg.oneshot:
        raise DomainError("queue simulation needs a fixed transmission time")
    if not (math.isfinite(psi) and psi > 0.0):
        raise DomainError(f"psi must be finite and > 0, got {psi!r}")
    counts = split_counts(int(n_packets), cfg.replicas)
    if min(counts) < 1:
        raise DomainError("every replica needs at least one packet")
    warm = [default_warmup(c) if warmup is None else int(warmup) for c in counts]
    if any(w >= c - 1 for w, c in zip(warm, counts)):
        raise DomainError("warmup must leave at least two packets per replica")
    gens = replica_generators(cfg.seed, cfg.replicas)
    runs = _map(_queue_replica, [(cfg, psi, g, c, w) for g, c, w in zip(gens, counts, warm)],
                cfg.workers)

    delay, qwait, s1, s2, busy2, t1 = [], [], [], [], [], []
    nq_parts, nq_se_parts, p0_parts, spans = [], [], [], []
    checks = 0
    for (arrival, start, departure, service, type1, busy, c), w in zip(runs, warm):
        sl = slice(w, None)
        delay.append(departure[sl] - arrival[sl])
        qwait.append(start[sl] - arrival[sl])
        t1.append(type1[sl])
        s1.append(service[sl][type1[sl]])
        s2.append(service[sl][~type1[sl]])
        busy2.append(busy[sl][~type1[sl]])
        nq, nq_se, p0 = _window_stats(arrival, start, departure, w)
        nq_parts.append(nq)
        nq_se_parts.append(nq_se)
        p0_parts.append(p0)
        spans.append(arrival[-1] - arrival[w])
        checks += c
    delay, qwait = np.concatenate(delay), np.concatenate(qwait)
    t1, s1, s2, busy2 = (np.concatenate(x) for x in (t1, s1, s2, busy2))
    spans = np.asarray(spans)
    weights = spans / spans.sum()
    nq = float(np.dot(weights, nq_parts))
    nq_se = float(math.sqrt(np.dot(weights ** 2, np.square(nq_se_parts))))
    p0 = float(np.dot(weights, p0_parts))

    def moments(x):
        return (float(x.mean()), float((x * x).mean())) if x.size else (math.nan, math.nan)

    return QueueSimResult(
        n_packets=int(delay.size),
        mean_delay=float(delay.mean()),
        mean_delay_se=_batch_se(delay),
        mean_queue_wait=float(qwait.mean()),
        mean_queue_wait_se=_batch_se(qwait),
        mean_queue_len=nq,
        mean_queue_len_se=nq_se,
        p0_empirical=p0,
        type1_fraction=float(t1.mean()),
        type1_service=moments(s1),
        type2_service=moments(s2),
        type2_busy_fraction=float(busy2.mean()) if busy2.size else math.nan,
        utilization=1.0 - p0,
        unstable=(1.0 - p0) > 0.999,
        type1_checks=checks,
    )
