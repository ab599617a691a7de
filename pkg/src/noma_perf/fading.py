"""Nakagami-m channel statistics in the power-gain domain.

A Nakagami-m amplitude with integer shape ``mu`` and mean square ``omega``
has a squared envelope (the channel power gain) that is gamma distributed
with shape ``mu`` and mean ``omega``.  All distribution work here runs in
that power-gain domain: density, CDF, the CDF/PDF of the m-th smallest of
M i.i.d. gains, small-argument leading terms for high-SNR analysis, and
reproducible sampling.

The ordered CDF is evaluated from a short binomial sum in the plain CDF,
which is numerically benign because every power of the CDF enters with a
strictly increasing exponent (no like-order cancellation).  An expanded
alternating form of the same quantity, produced by raising the truncated
exponential series of the CDF to integer powers, is also provided; it
matches the structure of the analytic outage expressions and is retained
for cross-checking, not production use, since its cancellation grows
without bound as the argument shrinks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import (
    compositions,
    log_binomial,
    log_gamma,
    log_multinomial,
    sum_signed_exp,
)

logger = logging.getLogger(__name__)

__all__ = [
    "FadingParams",
    "OrderedIndex",
    "cdf_small_arg",
    "gamma_cdf",
    "gamma_pdf",
    "ordered_cdf",
    "ordered_cdf_series",
    "ordered_cdf_small_arg",
    "ordered_pdf",
    "sample_gain",
    "sample_sorted_gains",
]

# Log of the smallest positive double; below this we fall back to a
# log-domain leading term, and below the representable range we clamp to
# zero (logged at debug level, never silently NaN).
_LOG_TINY = math.log(2.2250738585072014e-308)


# =====================================================================
# Parameter containers
# =====================================================================

@dataclass(frozen=True)
class FadingParams:
    """Shape and mean of one gamma-distributed channel power gain.

    Attributes
    ----------
    mu : int
        Integer fading severity (shape); 1 recovers Rayleigh power fading.
    omega : float
        Mean power gain, strictly positive.
    """

    mu: int
    omega: float

    def __post_init__(self) -> None:
        if not isinstance(self.mu, (int, np.integer)) or isinstance(self.mu, bool):
            raise ValueError(f"mu must be an integer, got {self.mu!r}")
        if self.mu < 1:
            raise ValueError(f"mu must be >= 1, got {self.mu}")
        if not (isinstance(self.omega, (int, float, np.floating, np.integer))
                and math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be finite and > 0, got {self.omega!r}")

    @property
    def rate(self) -> float:
        """Exponential rate mu / omega of each gamma summand."""
        return self.mu / self.omega


@dataclass(frozen=True)
class OrderedIndex:
    """Position of one user in an ascending sort of i.i.d. gains.

    Attributes
    ----------
    rank : int
        1-based position after sorting ascending (1 = weakest).
    total : int
        Number of i.i.d. gains sorted.
    """

    rank: int
    total: int

    def __post_init__(self) -> None:
        if not isinstance(self.rank, (int, np.integer)) or isinstance(self.rank, bool):
            raise ValueError(f"rank must be an integer, got {self.rank!r}")
        if not isinstance(self.total, (int, np.integer)) or isinstance(self.total, bool):
            raise ValueError(f"total must be an integer, got {self.total!r}")
        if self.total < 1 or not 1 <= self.rank <= self.total:
            raise ValueError(
                f"need 1 <= rank <= total with total >= 1, got rank={self.rank}, total={self.total}"
            )


# =====================================================================
# Single-gain density and CDF
# =====================================================================

def gamma_pdf(p: FadingParams, x):
    """Density of the power gain at ``x`` (scalar or ndarray), zero for x < 0."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x).astype(float)
    out = np.zeros_like(xv)
    pos = xv > 0
    xp = xv[pos]
    rate = p.rate
    # log-domain assembly keeps mu**mu / omega**mu from overflowing first
    log_pdf = (
        p.mu * math.log(rate)
        - log_gamma(p.mu)
        + (p.mu - 1) * np.log(xp)
        - rate * xp
    )
    out[pos] = np.exp(log_pdf)
    if scalar:
        return float(out[0])
    return out


def gamma_cdf(p: FadingParams, x):
    """CDF of the power gain at ``x`` (scalar or ndarray), zero for x <= 0.

    Evaluated as the regularized lower incomplete gamma function at
    ``mu * x / omega``, which for integer ``mu`` equals one minus the
    truncated exponential series of that argument.
    """
    x = np.asarray(x, dtype=float)
    out = special.gammainc(p.mu, np.maximum(x, 0.0) * p.rate)
    if out.ndim == 0:
        return float(out)
    return out


def cdf_small_arg(p: FadingParams, x):
    """Leading small-argument term of the CDF: (mu*x/omega)^mu / mu!.

    Relative error is O(x), so this is only meaningful for small x; values
    are not clamped and exceed 1 for large x by design.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(p.mu * np.log(np.maximum(x, 0.0) * p.rate) - log_gamma(p.mu + 1))
    out = np.where(x <= 0, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


# =====================================================================
# Order statistics of M i.i.d. gains
# =====================================================================

def _ordered_prefactor_log(idx: OrderedIndex) -> float:
    """log of total! / ((rank-1)! (total-rank)!)."""
    return (
        log_gamma(idx.total + 1)
        - log_gamma(idx.rank)
        - log_gamma(idx.total - idx.rank + 1)
    )


def ordered_cdf(p: FadingParams, idx: OrderedIndex, x) -> float:
    """CDF of the rank-th smallest of ``total`` i.i.d. gains at scalar ``x``.

    Binomial expansion of the order-statistic CDF in powers of the plain
    CDF F(x).  All powers of F are distinct, so the alternating signs never
    cancel like-order terms and the direct sum is stable.  When F(x)^rank
    underflows, the leading log-domain term C(total, rank) * F^rank is used;
    results below the double range clamp to 0.0 with a debug log entry.
    """
    x = float(x)
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    big_f = gamma_cdf(p, x)
    if big_f == 0.0:
        return 0.0
    if big_f >= 1.0:
        return 1.0
    m, total = idx.rank, idx.total
    log_f = math.log(big_f)
    if m * log_f < _LOG_TINY:
        log_lead = log_binomial(total, m) + m * log_f
        if log_lead < _LOG_TINY:
            logger.debug(
                "ordered_cdf underflow: rank=%d total=%d x=%.3e, clamping to 0", m, total, x
            )
            return 0.0
        return math.exp(log_lead)
    prefactor = math.exp(_ordered_prefactor_log(idx))
    terms = [
        (-1.0) ** i * math.comb(total - m, i) / (m + i) * big_f ** (m + i)
        for i in range(total - m + 1)
    ]
    value = prefactor * math.fsum(terms)
    return min(1.0, max(0.0, value))


def ordered_pdf(p: FadingParams, idx: OrderedIndex, x) -> float:
    """Density of the rank-th smallest of ``total`` i.i.d. gains at scalar ``x``."""
    x = float(x)
    if x <= 0 or math.isinf(x):
        return 0.0
    big_f = gamma_cdf(p, x)
    little_f = gamma_pdf(p, x)
    m, total = idx.rank, idx.total
    # 0**0 = 1.0 covers the boundary ranks at F in {0, 1}
    return (
        math.exp(_ordered_prefactor_log(idx))
        * little_f
        * big_f ** (m - 1)
        * (1.0 - big_f) ** (total - m)
    )


def ordered_cdf_small_arg(p: FadingParams, idx: OrderedIndex, x) -> float:
    """Leading small-argument term of the ordered CDF.

    Equals C(total, rank) * [(mu*x/omega)^mu / mu!]^rank, the dominant
    behaviour as x -> 0; decays with exponent mu * rank.  Not clamped.
    """
    x = float(x)
    if x <= 0:
        return 0.0
    log_val = (
        log_binomial(idx.total, idx.rank)
        + idx.rank * (p.mu * math.log(x * p.rate) - log_gamma(p.mu + 1))
    )
    return math.exp(log_val)


def ordered_cdf_series(p: FadingParams, idx: OrderedIndex, x) -> float:
    """Ordered CDF via the fully expanded alternating sum.

    Expands F(x)^(rank+i) through the binomial theorem over the truncated
    exponential series, enumerating integer compositions for the powers of
    the series.  Mirrors the expanded structure used by the closed-form
    outage expressions.  Kept for validation only: the terms are O(1) while
    the sum shrinks with x, so cancellation destroys accuracy for small
    F(x).  Production callers use :func:`ordered_cdf`.
    """
    x = float(x)
    if x <= 0:
        return 0.0
    m, total = idx.rank, idx.total
    psi = x * p.rate
    log_fact = [log_gamma(k + 1) for k in range(p.mu)]
    log_psi = math.log(psi)
    log_terms: list[float] = []
    signs: list[int] = []
    for i in range(total - m + 1):
        log_outer = log_binomial(total - m, i) - math.log(m + i)
        for q in range(m + i + 1):
            log_q = log_outer + log_binomial(m + i, q) - q * psi
            for parts in compositions(q, p.mu):
                log_term = log_q + log_multinomial(q, parts)
                for k, exponent in enumerate(parts):
                    if exponent:
                        log_term += exponent * (k * log_psi - log_fact[k])
                log_terms.append(log_term)
                signs.append(1 if (i + q) % 2 == 0 else -1)
    value = math.exp(_ordered_prefactor_log(idx)) * sum_signed_exp(log_terms, signs)
    return value


# =====================================================================
# Sampling
# =====================================================================

def sample_gain(p: FadingParams, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw power gains as a sum of ``mu`` inverse-transform exponentials.

    The inverse-transform path keeps draws reproducible across platforms
    for a fixed generator state.  Returns shape ``size`` (scalar for None).
    """
    shape = () if size is None else (tuple(size) if isinstance(size, (tuple, list)) else (size,))
    exps = rng.standard_exponential(shape + (p.mu,), method="inv")
    out = exps.sum(axis=-1) * (p.omega / p.mu)
    if size is None:
        return float(out)
    return out


def sample_sorted_gains(
    p: FadingParams, total: int, rng: np.random.Generator, size=None
) -> np.ndarray:
    """Draw ``total`` i.i.d. gains and sort ascending along the last axis.

    Element ``rank - 1`` of the result realizes the rank-th order
    statistic.  Returns shape ``(total,)`` or ``size + (total,)``.
    """
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    shape = () if size is None else (tuple(size) if isinstance(size, (tuple, list)) else (size,))
    gains = sample_gain(p, rng, size=shape + (total,))
    return np.sort(np.asarray(gains, dtype=float), axis=-1)
