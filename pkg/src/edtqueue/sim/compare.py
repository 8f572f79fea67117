"""Goodness-of-fit between an analytic EDT law and an empirical one."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..edt import DiscreteEdtPmf
from ..errors import DomainError
from .core import EmpiricalDistribution

__all__ = ["ComparisonReport", "AtomDelta", "compare_distributions", "MIN_EXPECTED"]

MIN_EXPECTED = 100.0


@dataclass(frozen=True)
class AtomDelta:
    location: float
    analytic: float
    empirical: float
    z: float


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """KS and total-variation distances, atom deltas and per-bin z-scores.

    ``bin_z`` is reported only for bins with at least ``MIN_EXPECTED``
    expected counts; ``max_abs_z`` is taken over those bins.
    """

    n: int
    ks: float
    tv: float
    atoms: tuple
    edges: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)
    bin_z: np.ndarray = field(repr=False)

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.bin_z))) if self.bin_z.size else 0.0


def _z(observed, expected_prob, n):
    var = n * expected_prob * (1.0 - expected_prob)
    return (observed - n * expected_prob) / np.sqrt(var)


def _compare_lattice(pmf: DiscreteEdtPmf, emp: EmpiricalDistribution) -> ComparisonReport:
    x = emp.samples
    idx = np.rint((x - pmf.ttr) / pmf.ts).astype(np.int64)
    if np.any(idx < 0) or np.any(np.abs(idx * pmf.ts + pmf.ttr - x) > 1e-6 * pmf.ts):
        raise DomainError("empirical values are off the lattice of the analytic PMF")
    size = max(len(pmf), int(idx.max()) + 1)
    observed = np.bincount(idx, minlength=size).astype(float)
    probs = np.zeros(size)
    probs[:len(pmf)] = pmf.probs
    n = emp.n
    freq = observed / n
    tv = 0.5 * math.fsum(np.abs(freq - probs)) + 0.5 * max(0.0, 1.0 - math.fsum(probs))
    ks = float(np.max(np.abs(np.cumsum(freq) - np.cumsum(probs))))
    atom = AtomDelta(pmf.ttr, float(probs[0]), float(freq[0]),
                     float(_z(observed[0], probs[0], n)) if 0.0 < probs[0] < 1.0 else math.nan)
    keep = probs * n >= MIN_EXPECTED
    edges = pmf.ttr + pmf.ts * (np.arange(size + 1) - 0.5)
    return ComparisonReport(n=n, ks=ks, tv=tv, atoms=(atom,), edges=edges, expected=probs * n,
                            observed=observed, bin_z=_z(observed[keep], probs[keep], n))


def _default_edges(emp: EmpiricalDistribution, atoms, n_bins, quantum, upper):
    """Equiprobable bins from empirical quantiles, snapped to ``quantum`` if given."""
    atom_locs = np.array([loc for loc, _ in atoms])
    x = emp.samples
    if atom_locs.size:
        x = x[~np.isin(x, atom_locs)]
    top = min(0.9995, float(np.mean(x <= upper)))
    edges = np.quantile(x, np.linspace(0.0005, top, n_bins + 1))
    if atom_locs.size:
        edges = np.maximum(edges, float(atom_locs.max()))
    if quantum:
        edges = np.rint(edges / quantum) * quantum
    return np.unique(edges)


def _compare_continuous(analytic, emp: EmpiricalDistribution, edges, n_bins) -> ComparisonReport:
    n = emp.n
    x = emp.samples
    atoms = tuple(analytic.atoms)
    quantum = getattr(analytic, "edge_quantum", None)
    upper = getattr(analytic, "comparison_upper", math.inf)
    edges = _default_edges(emp, atoms, n_bins, quantum, upper) if edges is None \
        else np.asarray(edges, dtype=float)

    # KS over every jump point of the empirical CDF up to ``upper``, from both sides
    values, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / n
    left = right - counts / n
    inside = values <= upper
    values, right, left = values[inside], right[inside], left[inside]
    ks = float(max(np.max(np.abs(right - analytic.cdf(values))),
                   np.max(np.abs(left - analytic.cdf_left(values)))))

    atom_deltas = []
    cells_p, cells_o = [], []
    for loc, mass in atoms:
        obs = emp.atom_candidates.get(float(loc), 0)
        atom_deltas.append(AtomDelta(loc, mass, obs / n, float(_z(obs, mass, n))))
        cells_p.append(mass)
        cells_o.append(obs)
    atom_locs = np.array([loc for loc, _ in atoms])
    cont = x[~np.isin(x, atom_locs)] if atom_locs.size else x
    observed = np.histogram(cont, bins=edges)[0].astype(float)
    # np.histogram closes the last bin; reassign a sample sitting on the top edge
    observed[-1] -= np.count_nonzero(cont == edges[-1])
    probs = np.asarray(analytic.bin_masses(edges), dtype=float)
    cells_p.extend(probs)
    cells_o.extend(observed)
    cells_p.append(max(0.0, 1.0 - math.fsum(cells_p)))
    cells_o.append(n - sum(cells_o))
    tv = 0.5 * float(np.sum(np.abs(np.asarray(cells_o) / n - np.asarray(cells_p))))
    keep = probs * n >= MIN_EXPECTED
    return ComparisonReport(n=n, ks=ks, tv=tv, atoms=tuple(atom_deltas), edges=edges,
                            expected=probs * n, observed=observed,
                            bin_z=_z(observed[keep], probs[keep], n))


def compare_distributions(analytic, empirical: EmpiricalDistribution, *, edges=None,
                          n_bins: int = 100) -> ComparisonReport:
    """Compare an analytic law with samples.

    ``analytic`` is a :class:`DiscreteEdtPmf` (lattice comparison) or any
    object with ``atoms``, ``cdf``, ``cdf_left`` and ``bin_masses``.  An
    optional ``comparison_upper`` attribute caps the histogram range and the
    KS sup; mass beyond it is a single tail cell.  Default bins are
    equiprobable under the empirical law.
    """
    if empirical.n == 0:
        raise DomainError("empty empirical law")
    if isinstance(analytic, DiscreteEdtPmf):
        return _compare_lattice(analytic, empirical)
    return _compare_continuous(analytic, empirical, edges, n_bins)
