"""Discrete-event oracle for the analytic EDT and queue results."""

from .compare import AtomDelta, ComparisonReport, compare_distributions
from .core import (
    QUEUE_ASSUMPTIONS,
    EdtSamples,
    EmpiricalDistribution,
    QueueSimResult,
    SimConfig,
    default_warmup,
    sample_edt,
    simulate_edt_single,
    simulate_queue,
)
from .rng import replica_generators, split_counts

__all__ = [
    "AtomDelta",
    "ComparisonReport",
    "compare_distributions",
    "QUEUE_ASSUMPTIONS",
    "EdtSamples",
    "EmpiricalDistribution",
    "QueueSimResult",
    "SimConfig",
    "default_warmup",
    "sample_edt",
    "simulate_edt_single",
    "simulate_queue",
    "replica_generators",
    "split_counts",
]
