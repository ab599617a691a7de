"""Closed-form outage, asymptotics, and throughput for both scenarios.

The outage of every served user reduces to gain cuts: deterministic
thresholds on channel power gains, obtained by inverting the SINR
conditions of the decoding chain at a given transmit SNR.  A user is in
outage exactly when the relevant gains fall below their cuts, so every
probability is a CDF evaluation.

Cooperative scenario: the far message travels over a direct link and,
in a second slot, over a fixed-gain amplify-and-forward relay; the two
branches fail independently, so the outage is the product of the direct
factor (ordered CDF at the cut) and the relay factor.  The relay factor
has a closed form in modified Bessel functions of the second kind,
obtained by integrating the first-hop density against the conditional
second-hop CDF.  The near user decodes the far message first (SIC), so
its cut is the larger of the far-message cut and its own-message cut.

Non-cooperative scenario: user m must clear every SIC stage i <= m in a
single slot, giving a per-stage family of cuts whose running maximum is
the decode cut; the outage is the ordered CDF of the m-th user's gain at
that cut.

High-SNR behaviour replaces the ordered CDF of the direct link by its
leading small-argument term, which exposes the decay exponents directly;
for the cooperative users the relay factor is kept in closed form since
its slow (logarithmic-over-power) decay has no polynomial leading term.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .configs import CoopConfig, DirectConfig
from .fading import (
    FadingParams,
    OrderedIndex,
    ordered_cdf,
    ordered_cdf_small_arg,
)
from .numerics import bessel_k_scaled, log_binomial, log_gamma

logger = logging.getLogger(__name__)

__all__ = [
    "COOP_USERS",
    "CoopCuts",
    "coop_cuts",
    "direct_cuts",
    "diversity_order_fit",
    "far_outage_parts",
    "fixed_gain_constant",
    "near_outage_parts",
    "outage_direct_asymptotic",
    "outage_direct_exact",
    "outage_far_asymptotic",
    "outage_far_exact",
    "outage_near_asymptotic",
    "outage_near_exact",
    "outage_oma",
    "relay_outage",
    "relay_outage_closed",
    "threshold_snr",
    "throughput_coop",
    "throughput_direct",
]

COOP_USERS = ("far", "near")

# exp(-x) underflows past this, so the relay-branch bracket is an exact
# double-precision zero and the outage saturates at 1
_EXP_UNDERFLOW = 745.0


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (math.isfinite(rho) and rho > 0):
        raise ValueError(f"transmit SNR rho must be finite and > 0, got {rho}")
    return rho


# =====================================================================
# Thresholds and gain cuts
# =====================================================================

def threshold_snr(rate: float, slots: int) -> float:
    """SINR threshold 2**(slots * rate) - 1 for a target rate in bit/s/Hz.

    ``slots`` is the number of orthogonal time slots the transmission
    occupies (2 for the cooperative protocol, 1 for single-slot
    signalling); each slot halves the effective spectral efficiency, so
    the threshold rises accordingly.
    """
    if slots not in (1, 2):
        raise ValueError(f"slots must be 1 or 2, got {slots}")
    if not (math.isfinite(rate) and rate >= 0):
        raise ValueError(f"rate must be finite and >= 0, got {rate}")
    return 2.0 ** (slots * rate) - 1.0


def fixed_gain_constant(cfg: CoopConfig, rho: float | None = None,
                        mode: str = "literal-kappa") -> float:
    """Noise-scaling constant of the fixed-gain relay.

    ``literal-kappa`` uses the configured amplification factor (constant
    1 / relay_gain**2, or the explicit ``relay_const`` override) and is
    what every closed form in this module consumes.  ``power-normalized``
    instead sets the gain so the relay's average transmit power is unit,
    giving ``omega_sr + 1 / rho``; it requires ``rho`` and is provided
    for comparisons only.
    """
    if mode == "literal-kappa":
        return cfg.noise_scale
    if mode == "power-normalized":
        if rho is None:
            raise ValueError("power-normalized mode requires rho")
        return cfg.omega_sr + 1.0 / _check_rho(rho)
    raise ValueError(f"mode must be 'literal-kappa' or 'power-normalized', got {mode!r}")


@dataclass(frozen=True)
class CoopCuts:
    """Gain cuts of the cooperative pair at one transmit SNR.

    Attributes
    ----------
    gamma_far, gamma_near : float
        Two-slot SINR thresholds of the far and near messages.
    far_cut : float
        Gain cut for decoding the far message (direct or relay path);
        infinite when the power split cannot support the far rate, in
        which case the far message is undecodable at any gain.
    near_rate_cut : float
        Gain cut for the near user's own message after SIC.
    near_cut : float
        Effective near-user cut: the larger of ``far_cut`` (SIC stage)
        and ``near_rate_cut``.
    """

    gamma_far: float
    gamma_near: float
    far_cut: float
    near_rate_cut: float
    near_cut: float


def coop_cuts(cfg: CoopConfig, rho: float) -> CoopCuts:
    """Invert the cooperative SINR conditions into gain cuts at SNR ``rho``."""
    rho = _check_rho(rho)
    gamma_far = threshold_snr(cfg.rate_far, slots=2)
    gamma_near = threshold_snr(cfg.rate_near, slots=2)
    headroom = cfg.power_far - cfg.power_near * gamma_far
    # gamma_far = 0 keeps headroom = power_far > 0, so the cut is 0 there
    far_cut = gamma_far / (rho * headroom) if headroom > 0 else math.inf
    near_rate_cut = gamma_near / (cfg.power_near * rho)
    return CoopCuts(
        gamma_far=gamma_far,
        gamma_near=gamma_near,
        far_cut=far_cut,
        near_rate_cut=near_rate_cut,
        near_cut=max(far_cut, near_rate_cut),
    )


def direct_cuts(cfg: DirectConfig, rho: float) -> np.ndarray:
    """Per-stage gain cuts of the single-slot SIC chain at SNR ``rho``.

    Entry i (0-based) is the gain a user needs to decode message i + 1
    against the residual interference of messages i + 2 .. M.  Infinite
    entries mark stages whose power allocation cannot meet the rate no
    matter the gain.  User m's decode cut is the maximum of the first m
    entries.
    """
    rho = _check_rho(rho)
    cuts = np.empty(cfg.n_users)
    for i in range(cfg.n_users):
        gamma_i = threshold_snr(cfg.rates[i], slots=1)
        residual = math.fsum(cfg.power[i + 1:])
        headroom = cfg.power[i] - gamma_i * residual
        cuts[i] = gamma_i / (rho * headroom) if headroom > 0 else math.inf
    return cuts


# =====================================================================
# Relay branch closed form
# =====================================================================

def _relay_outage_f64(cut: float, mu: int, omega_sr: float, omega_rd: float,
                      noise_scale: float) -> float:
    """Double-precision evaluation of the relay-branch outage at gain cut ``cut``."""
    zc = cut * noise_scale
    arg = 2.0 * mu * math.sqrt(zc / (omega_sr * omega_rd))
    log_pref = (
        math.log(2.0)
        + mu * math.log(mu)
        - mu * cut / omega_sr
        - mu * math.log(omega_sr)
        - log_gamma(mu)
    )
    half_log = 0.5 * (math.log(zc) + math.log(omega_sr) - math.log(omega_rd))
    log_cut = math.log(cut)
    log_zc_term = math.log(zc) + math.log(mu) - math.log(omega_rd)
    terms = []
    for k in range(mu):
        log_k = k * log_zc_term - log_gamma(k + 1)
        for i in range(mu):
            order = i - k + 1
            scaled = bessel_k_scaled(abs(order), arg)
            log_term = (
                log_pref
                + log_k
                + log_binomial(mu - 1, i)
                + (mu - 1 - i) * log_cut
                + order * half_log
                + math.log(scaled)
                - arg
            )
            terms.append(math.exp(log_term))
    return 1.0 - math.fsum(terms)


def _relay_outage_mp(cut: float, mu: int, omega_sr: float, omega_rd: float,
                     noise_scale: float, dps: int) -> float:
    """Arbitrary-precision mirror of :func:`_relay_outage_f64`."""
    from mpmath import mp

    with mp.workdps(dps):
        z = mp.mpf(cut)
        w_sr = mp.mpf(omega_sr)
        w_rd = mp.mpf(omega_rd)
        shape = mp.mpf(mu)
        zc = z * mp.mpf(noise_scale)
        arg = 2 * shape * mp.sqrt(zc / (w_sr * w_rd))
        pref = 2 * shape ** shape * mp.e ** (-shape * z / w_sr) / (w_sr ** shape * mp.gamma(shape))
        total = mp.mpf(0)
        for k in range(mu):
            coef_k = zc ** k / mp.gamma(k + 1) * (shape / w_rd) ** k
            inner = mp.mpf(0)
            for i in range(mu):
                order = i - k + 1
                inner += (
                    mp.binomial(mu - 1, i)
                    * z ** (mu - 1 - i)
                    * (zc * w_sr / w_rd) ** (mp.mpf(order) / 2)
                    * mp.besselk(order, arg)
                )
            total += coef_k * inner
        return float(1 - pref * total)


def relay_outage_closed(cut: float, *, mu: int, omega_sr: float, omega_rd: float,
                        noise_scale: float) -> float:
    """Outage of the fixed-gain relay branch at gain cut ``cut``.

    Probability that the cascaded first-hop gain y and second-hop gain w
    fail the decode condition ``y > cut and w >= cut * noise_scale /
    (y - cut)``.  The double-precision Bessel-sum evaluation is used when
    it is well conditioned; once the result drops below 1e-6 (the bracket
    cancels against 1), the same expression is re-evaluated in arbitrary
    precision with enough digits to leave at least ten guard digits.

    Returns exactly 0.0 at ``cut = 0`` and exactly 1.0 once the bracket
    underflows to zero (deep outage).
    """
    if not isinstance(mu, int) or mu < 1:
        raise ValueError(f"mu must be an integer >= 1, got {mu!r}")
    for name, v in (("omega_sr", omega_sr), ("omega_rd", omega_rd),
                    ("noise_scale", noise_scale)):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be finite and > 0, got {v}")
    cut = float(cut)
    if math.isnan(cut) or cut < 0:
        raise ValueError(f"cut must be >= 0, got {cut}")
    if cut == 0.0:
        return 0.0
    if math.isinf(cut) or mu * cut / omega_sr > _EXP_UNDERFLOW:
        return 1.0
    value = _relay_outage_f64(cut, mu, omega_sr, omega_rd, noise_scale)
    if value >= 1e-6:
        return value
    # near-total cancellation of the bracket against 1; escalate precision
    dps = 40
    while True:
        value = _relay_outage_mp(cut, mu, omega_sr, omega_rd, noise_scale, dps)
        if value == 0.0 or value > 10.0 ** (10 - dps) or dps >= 320:
            return max(value, 0.0)
        dps *= 2


def relay_outage(cfg: CoopConfig, cut: float, user: str = "far") -> float:
    """Relay-branch outage for the far or near user of ``cfg`` at gain cut ``cut``."""
    return relay_outage_closed(
        cut,
        mu=cfg.mu,
        omega_sr=cfg.omega_sr,
        omega_rd=cfg.relay_mean(user),
        noise_scale=cfg.noise_scale,
    )


# =====================================================================
# Exact outage, cooperative pair
# =====================================================================

def far_outage_parts(cfg: CoopConfig, rho: float) -> tuple[float, float]:
    """Direct-branch and relay-branch outage factors of the far user.

    The far user is served by selection over the two branches, so its
    outage is the product of these factors.  Returns (1.0, 1.0) when the
    power split cannot support the far rate and (0.0, 0.0) at zero rate.
    """
    cuts = coop_cuts(cfg, rho)
    if cuts.gamma_far == 0.0:
        return 0.0, 0.0
    if math.isinf(cuts.far_cut):
        return 1.0, 1.0
    direct = ordered_cdf(
        FadingParams(cfg.mu, cfg.direct_mean("far")),
        OrderedIndex(cfg.far_rank, cfg.users),
        cuts.far_cut,
    )
    relay = relay_outage(cfg, cuts.far_cut, user="far")
    return direct, relay


def outage_far_exact(cfg: CoopConfig, rho: float) -> float:
    """Exact outage probability of the far user at transmit SNR ``rho``."""
    direct, relay = far_outage_parts(cfg, rho)
    return direct * relay


def near_outage_parts(cfg: CoopConfig, rho: float) -> tuple[float, float]:
    """Direct-branch and relay-branch outage factors of the near user.

    The near user must decode the far message (SIC stage) and then its
    own; both branches apply the same effective cut, the larger of the
    two stage cuts.  Returns (1.0, 1.0) when the far stage is infeasible
    and (0.0, 0.0) when both rates are zero.
    """
    cuts = coop_cuts(cfg, rho)
    if math.isinf(cuts.near_cut):
        return 1.0, 1.0
    if cuts.near_cut == 0.0:
        return 0.0, 0.0
    direct = ordered_cdf(
        FadingParams(cfg.mu, cfg.direct_mean("near")),
        OrderedIndex(cfg.near_rank, cfg.users),
        cuts.near_cut,
    )
    relay = relay_outage(cfg, cuts.near_cut, user="near")
    return direct, relay


def outage_near_exact(cfg: CoopConfig, rho: float) -> float:
    """Exact outage probability of the near user at transmit SNR ``rho``."""
    direct, relay = near_outage_parts(cfg, rho)
    return direct * relay


# =====================================================================
# Exact outage, non-cooperative users
# =====================================================================

def outage_direct_exact(cfg: DirectConfig, rho: float, user: int) -> float:
    """Exact outage of served user ``user`` (1-based) in the single-slot system.

    The user fails if its gain misses the running maximum of the SIC
    stage cuts up to its own message; with an infeasible stage the
    outage is exactly 1.
    """
    if not 1 <= user <= cfg.n_users:
        raise ValueError(f"user must be in [1, {cfg.n_users}], got {user}")
    cuts = direct_cuts(cfg, rho)
    cut = float(np.max(cuts[:user]))
    if math.isinf(cut):
        return 1.0
    return ordered_cdf(
        FadingParams(cfg.mu, cfg.omega[user - 1]),
        OrderedIndex(cfg.ranks[user - 1], cfg.pool),
        cut,
    )


# =====================================================================
# High-SNR asymptotics
# =====================================================================

def outage_far_asymptotic(cfg: CoopConfig, rho: float) -> float:
    """High-SNR far-user outage: small-argument direct factor times relay factor.

    The direct branch contributes the polynomial decay (exponent
    mu * far_rank); the relay factor decays slower than any power thanks
    to its logarithmic Bessel tail, so it is kept exact.  Clamped to 1
    where the expansion exceeds unity (low SNR, outside its regime).
    """
    cuts = coop_cuts(cfg, rho)
    if cuts.gamma_far == 0.0:
        return 0.0
    if math.isinf(cuts.far_cut):
        return 1.0
    lead = ordered_cdf_small_arg(
        FadingParams(cfg.mu, cfg.direct_mean("far")),
        OrderedIndex(cfg.far_rank, cfg.users),
        cuts.far_cut,
    )
    return min(1.0, lead * relay_outage(cfg, cuts.far_cut, user="far"))


def outage_near_asymptotic(cfg: CoopConfig, rho: float) -> float:
    """High-SNR near-user outage, mirroring :func:`outage_far_asymptotic`."""
    cuts = coop_cuts(cfg, rho)
    if math.isinf(cuts.near_cut):
        return 1.0
    if cuts.near_cut == 0.0:
        return 0.0
    lead = ordered_cdf_small_arg(
        FadingParams(cfg.mu, cfg.direct_mean("near")),
        OrderedIndex(cfg.near_rank, cfg.users),
        cuts.near_cut,
    )
    return min(1.0, lead * relay_outage(cfg, cuts.near_cut, user="near"))


def outage_direct_asymptotic(cfg: DirectConfig, rho: float, user: int) -> float:
    """High-SNR outage of served user ``user``: small-argument ordered CDF.

    Decay exponent is mu times the user's sort rank.  Clamped to 1
    outside the high-SNR regime.
    """
    if not 1 <= user <= cfg.n_users:
        raise ValueError(f"user must be in [1, {cfg.n_users}], got {user}")
    cuts = direct_cuts(cfg, rho)
    cut = float(np.max(cuts[:user]))
    if math.isinf(cut):
        return 1.0
    lead = ordered_cdf_small_arg(
        FadingParams(cfg.mu, cfg.omega[user - 1]),
        OrderedIndex(cfg.ranks[user - 1], cfg.pool),
        cut,
    )
    return min(1.0, lead)


def diversity_order_fit(curve: Iterable[tuple[float, float]]) -> float:
    """Least-squares decay exponent of an outage curve P(rho).

    ``curve`` holds (rho, P) pairs with linear-scale rho.  Fits log10 P
    against log10 rho and returns the negated slope, the empirical
    diversity order.  Points with P below 1e-300 (including exact zeros
    from underflow) carry no usable information and are dropped with a
    warning; negative probabilities raise.
    """
    rhos: list[float] = []
    probs: list[float] = []
    dropped = 0
    for rho, p in curve:
        rho = float(rho)
        p = float(p)
        if not (math.isfinite(rho) and rho > 0):
            raise ValueError(f"curve points need rho > 0, got {rho}")
        if math.isnan(p) or p < 0:
            raise ValueError(f"curve points need P >= 0, got {p}")
        if p < 1e-300:
            dropped += 1
            continue
        rhos.append(rho)
        probs.append(p)
    if dropped:
        warnings.warn(
            f"diversity_order_fit dropped {dropped} point(s) with P below 1e-300",
            stacklevel=2,
        )
    if len(rhos) < 2:
        raise ValueError("diversity_order_fit needs at least two usable points")
    slope = np.polyfit(np.log10(rhos), np.log10(probs), 1)[0]
    return float(-slope) + 0.0


# =====================================================================
# Throughput and orthogonal-access baseline
# =====================================================================

def throughput_coop(cfg: CoopConfig, rho: float) -> float:
    """Delay-limited throughput of the cooperative pair in bit/s/Hz.

    Each user contributes its target rate scaled by its success
    probability; the ceiling rate_far + rate_near is approached when
    both outages vanish.
    """
    return (
        (1.0 - outage_far_exact(cfg, rho)) * cfg.rate_far
        + (1.0 - outage_near_exact(cfg, rho)) * cfg.rate_near
    )


def throughput_direct(cfg: DirectConfig, rho: float) -> float:
    """Delay-limited throughput of the single-slot system in bit/s/Hz."""
    return math.fsum(
        (1.0 - outage_direct_exact(cfg, rho, user + 1)) * cfg.rates[user]
        for user in range(cfg.n_users)
    )


def outage_oma(cfg: CoopConfig | DirectConfig, rho: float) -> float:
    """Outage of an orthogonal-access baseline carrying the same total rate.

    The strongest served user is scheduled alone at the sum of the
    target rates.  For the cooperative deployment the relay still serves
    that user in the second slot (selection over both branches, each
    with the doubled-threshold cut); the single-slot deployment keeps
    one slot and one user.
    """
    rho = _check_rho(rho)
    if isinstance(cfg, CoopConfig):
        total_rate = cfg.rate_far + cfg.rate_near
        if total_rate == 0.0:
            return 0.0
        cut = threshold_snr(total_rate, slots=2) / rho
        top_is_near = cfg.near_rank == cfg.users
        omega_sd = cfg.direct_mean("near") if top_is_near else cfg.omega_sd
        omega_rd = cfg.relay_mean("near") if top_is_near else cfg.omega_rd
        direct = ordered_cdf(
            FadingParams(cfg.mu, omega_sd),
            OrderedIndex(cfg.users, cfg.users),
            cut,
        )
        relay = relay_outage_closed(
            cut,
            mu=cfg.mu,
            omega_sr=cfg.omega_sr,
            omega_rd=omega_rd,
            noise_scale=cfg.noise_scale,
        )
        return direct * relay
    if isinstance(cfg, DirectConfig):
        cut = threshold_snr(math.fsum(cfg.rates), slots=1) / rho
        return ordered_cdf(
            FadingParams(cfg.mu, cfg.omega[-1]),
            OrderedIndex(cfg.ranks[-1], cfg.pool),
            cut,
        )
    raise TypeError(f"unsupported config type {type(cfg).__name__}")
