"""Random streams for simulation replicas.

Every replica draws from ``Philox(seed)`` advanced by ``replica * 2**128``
steps (``BitGenerator.jumped``).  Philox has period ``2**256``, so the
substreams cannot overlap unless one replica consumes more than ``2**128``
blocks.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError

__all__ = ["replica_generators", "split_counts"]


def replica_generators(seed: int, replicas: int) -> list[np.random.Generator]:
    """One independent generator per replica, in replica order."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise DomainError(f"seed must be a 64-bit nonnegative integer, got {seed!r}")
    if replicas < 1:
        raise DomainError("replicas must be >= 1")
    base = np.random.Philox(int(seed))
    return [np.random.Generator(base.jumped(i)) for i in range(replicas)]


def split_counts(total: int, parts: int) -> list[int]:
    """Split ``total`` into ``parts`` near-equal nonnegative counts."""
    q, r = divmod(total, parts)
    return [q + (i < r) for i in range(parts)]
