"""Special functions and elementary distributions used by the closed forms.

Everything here is a pure function.  Values that multiply an exponentially
small factor by an exponentially large one (``exp(-t/lam) * I0(...)``) are
combined through :class:`LogScaledValue` or through the exponentially scaled
Bessel functions, never by forming the large factor on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NumericFailure

__all__ = [
    "LogScaledValue",
    "bessel_i_scaled",
    "log_bessel_i",
    "kummer_1f1_terminating",
    "kummer_1f1_terminating_log",
    "erlang_pdf",
    "erlang_mgf",
    "neg_binomial_pmf",
    "neg_binomial_mgf",
    "neumaier_sum",
]

#: Below this argument the Bessel power series is used, above it the
#: Hankel asymptotic expansion.
ASYMPTOTIC_FROM = 30.0
SERIES_RTOL = 1e-16
MAX_SERIES_TERMS = 10_000
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class LogScaledValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign`` is 0 exactly when the value is zero, in which case
    ``log_magnitude`` is ``-inf``.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if (self.sign == 0) != (self.log_magnitude == -math.inf):
            raise DomainError("sign == 0 iff log_magnitude == -inf")
        if math.isnan(self.log_magnitude):
            raise DomainError("log_magnitude is NaN")

    @classmethod
    def from_float(cls, value: float) -> "LogScaledValue":
        if value == 0.0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = 1) -> "LogScaledValue":
        if log_magnitude == -math.inf:
            return cls(-math.inf, 0)
        return cls(float(log_magnitude), sign)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > _LOG_MAX:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.value

    def scale_exp(self, exponent: float) -> "LogScaledValue":
        """Multiply by ``exp(exponent)``."""
        if self.sign == 0:
            return self
        return LogScaledValue(self.log_magnitude + exponent, self.sign)

    def __mul__(self, other) -> "LogScaledValue":
        if not isinstance(other, LogScaledValue):
            other = LogScaledValue.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return LogScaledValue(-math.inf, 0)
        return LogScaledValue(self.log_magnitude + other.log_magnitude,
                              self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogScaledValue":
        if not isinstance(other, LogScaledValue):
            other = LogScaledValue.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScaledValue")
        if self.sign == 0:
            return self
        return LogScaledValue(self.log_magnitude - other.log_magnitude,
                              self.sign * other.sign)

    def __add__(self, other) -> "LogScaledValue":
        if not isinstance(other, LogScaledValue):
            other = LogScaledValue.from_float(float(other))
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log_magnitude >= other.log_magnitude else (other, self)
        total = hi.sign + lo.sign * math.exp(lo.log_magnitude - hi.log_magnitude)
        if total == 0.0:
            return LogScaledValue(-math.inf, 0)
        return LogScaledValue(hi.log_magnitude + math.log(abs(total)),
                              1 if total > 0 else -1)

    __radd__ = __add__


def neumaier_sum(values) -> float:
    """Compensated (Neumaier) left-to-right summation."""
    s = 0.0
    c = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


# --------------------------------------------------------------------------
# Modified Bessel functions of the first kind, orders 0 and 1
# --------------------------------------------------------------------------

def _series_scalar(order: int, x: float) -> float:
    half = 0.5 * x
    q = half * half
    term = half if order == 1 else 1.0
    total = term
    for k in range(1, MAX_SERIES_TERMS + 1):
        term *= q / (k * (k + order))
        total += term
        if term <= SERIES_RTOL * total:
            return total * math.exp(-x)
    raise NumericFailure(f"Bessel series for I{order}({x}) hit the term cap")


def _asymptotic_scalar(order: int, x: float) -> float:
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    for k in range(1, MAX_SERIES_TERMS + 1):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(nxt) > abs(term):
            # smallest term reached; the expansion starts to diverge
            break
        term = nxt
        total += term
        if abs(term) <= SERIES_RTOL * abs(total):
            break
    else:
        raise NumericFailure(f"Bessel asymptotic series for I{order}({x}) hit the term cap")
    return total / math.sqrt(2.0 * math.pi * x)


def _series_array(order: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    q = half * half
    term = half.copy() if order == 1 else np.ones_like(x)
    total = term.copy()
    for k in range(1, MAX_SERIES_TERMS + 1):
        term *= q / (k * (k + order))
        total += term
        if np.all(term <= SERIES_RTOL * total):
            return total * np.exp(-x)
    raise NumericFailure(f"Bessel series for I{order} hit the term cap")


def _asymptotic_array(order: int, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, MAX_SERIES_TERMS + 1):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        active &= np.abs(nxt) <= np.abs(term)
        term = np.where(active, nxt, 0.0)
        total += term
        active &= np.abs(term) > SERIES_RTOL * np.abs(total)
        if not active.any():
            return total / np.sqrt(2.0 * np.pi * x)
    raise NumericFailure(f"Bessel asymptotic series for I{order} hit the term cap")


def bessel_i_scaled(order: int, x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I_order(x)``.

    Parameters
    ----------
    order : {0, 1}
    x : float or array_like
        Nonnegative argument(s).

    Returns
    -------
    float or ndarray
        Same shape as ``x``.

    Notes
    -----
    A power series with a relative term stopping rule is used below
    ``x = 30`` and the Hankel asymptotic expansion above, which keeps the
    relative error near 1e-14 up to ``x = 1e6`` and beyond.
    """
    if order not in (0, 1):
        raise DomainError(f"only orders 0 and 1 are supported, got {order!r}")
    if np.ndim(x) == 0:
        xf = float(x)
        if not xf >= 0.0:
            raise DomainError(f"Bessel argument must be >= 0, got {x!r}")
        if math.isinf(xf):
            return 0.0
        if xf < ASYMPTOTIC_FROM:
            return _series_scalar(order, xf)
        return _asymptotic_scalar(order, xf)

    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError("Bessel argument must be >= 0")
    out = np.empty_like(arr)
    small = arr < ASYMPTOTIC_FROM
    if small.any():
        out[small] = _series_array(order, arr[small])
    big = ~small
    if big.any():
        out[big] = _asymptotic_array(order, arr[big])
    return out


def log_bessel_i(order: int, x):
    """Natural log of ``I_order(x)``; ``-inf`` for ``I1(0)``."""
    scaled = bessel_i_scaled(order, x)
    with np.errstate(divide="ignore"):
        return np.log(scaled) + x


# --------------------------------------------------------------------------
# Terminating Kummer series 1F1(a; b; x) with a a nonpositive integer
# --------------------------------------------------------------------------

def _check_kummer_args(a, b):
    if isinstance(a, bool) or isinstance(b, bool):
        raise DomainError("boolean parameters are not accepted")
    try:
        a_int = int(a)
    except (TypeError, ValueError):
        raise DomainError(f"a must be a nonpositive integer, got {a!r}") from None
    if a_int != a or a_int > 0:
        raise DomainError(f"a must be a nonpositive integer (general 1F1 not implemented), got {a!r}")
    try:
        b_int = int(b)
    except (TypeError, ValueError):
        raise DomainError(f"b must be a positive integer, got {b!r}") from None
    if b_int != b or b_int <= 0:
        raise DomainError(f"b must be a positive integer, got {b!r}")
    return a_int, b_int


def kummer_1f1_terminating_log(a: int, b: int, x: float) -> LogScaledValue:
    """Terminating ``1F1(a; b; x)`` returned as a :class:`LogScaledValue`.

    Terms are generated by the Pochhammer ratio recurrence in log form and
    summed left to right, relative to the largest term, with compensation.
    """
    a, b = _check_kummer_args(a, b)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    logs = [0.0]
    signs = [1]
    log_t = 0.0
    sign = 1
    for k in range(-a):
        ratio = (a + k) / (b + k) * x / (k + 1)
        if ratio == 0.0:
            break
        log_t += math.log(abs(ratio))
        if ratio < 0:
            sign = -sign
        logs.append(log_t)
        signs.append(sign)
    top = max(logs)
    total = neumaier_sum(s * math.exp(lt - top) for s, lt in zip(signs, logs))
    if total == 0.0:
        return LogScaledValue(-math.inf, 0)
    return LogScaledValue(top + math.log(abs(total)), 1 if total > 0 else -1)


def kummer_1f1_terminating(a: int, b: int, x: float) -> float:
    """Terminating confluent hypergeometric series ``1F1(a; b; x)``.

    ``a`` must be a nonpositive integer so that the series has ``|a| + 1``
    terms; ``b`` a positive integer.  For ``x <= 0`` every term is
    positive.  For ``x > 0`` the terms alternate and the result carries an
    absolute error near ``1e-16`` times the largest term.

    >>> round(kummer_1f1_terminating(-2, 2, 1.0), 15)  # 1 - 1 + 1/6
    0.166666666666667
    """
    value = kummer_1f1_terminating_log(a, b, x).value
    if not math.isfinite(value):
        raise NumericFailure(f"1F1({a}; {b}; {x}) overflows double precision")
    return value


# --------------------------------------------------------------------------
# Elementary distributions
# --------------------------------------------------------------------------

def _positive_int(name, value, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def erlang_pdf(k: int, scale: float, t):
    """Density of the sum of ``k`` i.i.d. exponentials with mean ``scale``."""
    k = _positive_int("k", k)
    if not scale > 0.0:
        raise DomainError(f"scale must be > 0, got {scale!r}")
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0.0):
        raise DomainError("t must be >= 0")
    if k <= 20:
        out = t ** (k - 1) * np.exp(-t / scale) / (scale ** k * math.factorial(k - 1))
    else:
        with np.errstate(divide="ignore"):
            log_f = (k - 1) * np.log(t) - t / scale - k * math.log(scale) - math.lgamma(k)
        out = np.exp(log_f)
    return float(out) if scalar else out


def erlang_mgf(k: int, scale: float, s: float) -> float:
    """MGF ``(1 - scale*s)^(-k)`` of the Erlang law, for ``s < 1/scale``."""
    if not s * scale < 1.0:
        raise DomainError("Erlang MGF diverges for s >= 1/scale")
    return (1.0 - scale * s) ** (-k)


def neg_binomial_pmf(k: int, beta: float, n):
    """Probability that the ``k``-th success occurs at trial ``n``.

    Each trial fails (PU found busy) with probability ``beta``; the result is
    ``(1-beta)^k beta^(n-k) C(n-1, k-1)`` and 0 for ``n < k``.
    """
    k = _positive_int("k", k)
    if not 0.0 <= beta < 1.0:
        raise DomainError(f"beta must lie in [0, 1), got {beta!r}")
    if np.ndim(n) == 0:
        n = int(n)
        if n < k:
            return 0.0
        if beta == 0.0:
            return 1.0 if n == k else 0.0
        if n <= 60:
            return (1.0 - beta) ** k * beta ** (n - k) * math.comb(n - 1, k - 1)
        log_c = math.lgamma(n) - math.lgamma(k) - math.lgamma(n - k + 1)
        return math.exp(k * math.log1p(-beta) + (n - k) * math.log(beta) + log_c)

    n = np.asarray(n)
    out = np.zeros(n.shape, dtype=float)
    ok = n >= k
    if beta == 0.0:
        out[n == k] = 1.0
        return out
    nn = n[ok].astype(float)
    log_c = gammaln(nn) - gammaln(k) - gammaln(nn - k + 1)
    out[ok] = np.exp(k * math.log1p(-beta) + (nn - k) * math.log(beta) + log_c)
    return out


def neg_binomial_mgf(k: int, beta: float, ts: float, s: float) -> float:
    """MGF of ``ts * N`` where ``N`` is negative binomial(k, beta) on ``{k, k+1, ...}``."""
    z = math.exp(s * ts)
    if not beta * z < 1.0:
        raise DomainError("negative binomial MGF diverges for beta*exp(s*ts) >= 1")
    return ((1.0 - beta) * z / (1.0 - beta * z)) ** k
