"""Adaptive and fixed-order quadrature used by the normalization and moment audits."""

from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericFailure

ABS_TOL = 1e-8
REL_TOL = 1e-10
MAX_EVALUATIONS = 1_000_000
#: QUADPACK's QAGS uses a 21-point Kronrod rule per subinterval.
_MAX_SUBINTERVALS = MAX_EVALUATIONS // 21


def integrate_adaptive(f, a, b, *, points=None, epsabs=ABS_TOL, epsrel=REL_TOL):
    """Adaptive Gauss-Kronrod integral of a scalar function over ``[a, b]``.

    Raises :class:`NumericFailure` when the error estimate misses the
    requested tolerance or the evaluation budget is exhausted.
    """
    if b <= a:
        return 0.0
    if points is not None:
        points = [p for p in points if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                             limit=_MAX_SUBINTERVALS if points is None else 2000,
                             points=points, full_output=1)
    value, abserr, info = res[0], res[1], res[2]
    if info["neval"] > MAX_EVALUATIONS:
        raise NumericFailure(f"quadrature over [{a}, {b}] exceeded {MAX_EVALUATIONS} evaluations")
    if len(res) > 3 and abserr > 10.0 * max(epsabs, epsrel * abs(value)):
        raise NumericFailure(f"quadrature over [{a}, {b}] failed: {res[3]} (abserr={abserr:.3g})")
    return value


@lru_cache(maxsize=16)
def gauss_legendre(order: int):
    """Nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def cell_integrals(f, edges, order: int = 10) -> np.ndarray:
    """Integral of a vectorized ``f`` over every cell ``[edges[i], edges[i+1]]``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    width = np.diff(edges)
    nodes = edges[:-1, None] + width[:, None] * x[None, :]
    values = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return (values @ w) * width
