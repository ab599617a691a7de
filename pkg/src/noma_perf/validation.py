"""Independent numerical oracles and the exact-vs-oracle-vs-simulation gate.

The closed-form layer is checked against adaptive quadrature of the
underlying probability integrals.  The oracles here share only the
density/CDF primitives with the production code, never its Bessel-sum
algebra: the relay-branch oracle integrates the first-hop density
against the conditional second-hop CDF, and the ordered-CDF oracle
integrates the order-statistic density.  Both are arranged as sums of
positive terms so that relative accuracy survives even when the result
is far below one.

:func:`run_validation_suite` drives the full gate: for every configured
user and SNR point it compares the exact value against its oracle at a
relative tolerance, and (optionally) against a Monte Carlo estimate at a
multiple of the binomial standard error wherever the probability is
large enough for simulation to resolve.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .analytic import (
    coop_cuts,
    direct_cuts,
    outage_direct_exact,
    outage_far_exact,
    outage_near_exact,
)
from .configs import CoopConfig, DirectConfig
from .fading import FadingParams, OrderedIndex, gamma_cdf, gamma_pdf, ordered_pdf
from .montecarlo import (
    Estimate,
    TrialBatch,
    estimate_outage_coop,
    estimate_outage_direct,
)
from .numerics import integrate_semi_infinite

logger = logging.getLogger(__name__)

__all__ = [
    "ComparisonRow",
    "ordered_cdf_quadrature",
    "outage_oracle",
    "relay_outage_quadrature",
    "run_validation_suite",
]

#: probability below which a 3-sigma Monte Carlo gate is meaningless at
#: feasible trial counts, so the simulation leg is skipped
MC_PROBABILITY_FLOOR = 1e-4


# =====================================================================
# Quadrature oracles
# =====================================================================

def relay_outage_quadrature(
    cfg: CoopConfig,
    cut: float,
    user: str = "far",
    *,
    method: str = "tail",
    rel_tol: float = 1e-10,
) -> float:
    """Relay-branch outage by direct integration of the probability.

    The branch fails when the first-hop gain y stays below ``cut`` or,
    given y > cut, when the second-hop gain misses cut * noise_scale /
    (y - cut).  Both routes below accumulate positive terms only:

    - ``tail``: first-hop CDF at the cut plus the tail integral over y.
    - ``shifted``: same integral after substituting t = y - cut, which
      moves the boundary feature to the origin and gives the adaptive
      integrator a different subdivision problem.

    The two routes agreeing is itself a useful consistency check and is
    exercised by the test suite.
    """
    cut = float(cut)
    if math.isnan(cut) or cut < 0:
        raise ValueError(f"cut must be >= 0, got {cut}")
    if cut == 0.0:
        return 0.0
    if math.isinf(cut):
        return 1.0
    feed = FadingParams(cfg.mu, cfg.omega_sr)
    drop = FadingParams(cfg.mu, cfg.relay_mean(user))
    scaled = cut * cfg.noise_scale

    if method == "tail":
        def integrand(y: float) -> float:
            return gamma_pdf(feed, y) * gamma_cdf(drop, scaled / (y - cut))

        tail = integrate_semi_infinite(integrand, cut, rel_tol=rel_tol)
        return min(1.0, gamma_cdf(feed, cut) + tail.value)
    if method == "shifted":
        def integrand(t: float) -> float:
            return gamma_pdf(feed, t + cut) * gamma_cdf(drop, scaled / t)

        tail = integrate_semi_infinite(integrand, 0.0, rel_tol=rel_tol)
        return min(1.0, gamma_cdf(feed, cut) + tail.value)
    raise ValueError(f"method must be 'tail' or 'shifted', got {method!r}")


def ordered_cdf_quadrature(
    params: FadingParams,
    idx: OrderedIndex,
    x: float,
    *,
    rel_tol: float = 1e-10,
) -> float:
    """Ordered CDF by integrating the order-statistic density over (0, x)."""
    from scipy import integrate

    x = float(x)
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    value, err = integrate.quad(
        lambda y: ordered_pdf(params, idx, y),
        0.0,
        x,
        epsabs=1e-300,
        epsrel=rel_tol,
        limit=200,
    )
    return min(1.0, value)


def outage_oracle(cfg: CoopConfig | DirectConfig, rho: float, user) -> float:
    """Quadrature-only outage for one served user, no Bessel sums involved.

    ``user`` is ``'far'``/``'near'`` for the cooperative scenario and a
    1-based integer for the single-slot scenario.  Matches the exact
    closed forms up to quadrature error and is the reference leg of the
    validation gate.
    """
    if isinstance(cfg, CoopConfig):
        cuts = coop_cuts(cfg, rho)
        cut = cuts.far_cut if user == "far" else cuts.near_cut
        if user not in ("far", "near"):
            raise ValueError(f"user must be 'far' or 'near', got {user!r}")
        if math.isinf(cut):
            return 1.0
        if cut == 0.0:
            return 0.0
        direct = ordered_cdf_quadrature(
            FadingParams(cfg.mu, cfg.direct_mean(user)),
            OrderedIndex(cfg.rank(user), cfg.users),
            cut,
        )
        relay = relay_outage_quadrature(cfg, cut, user)
        return direct * relay
    if isinstance(cfg, DirectConfig):
        user = int(user)
        if not 1 <= user <= cfg.n_users:
            raise ValueError(f"user must be in [1, {cfg.n_users}], got {user}")
        cut = float(max(direct_cuts(cfg, rho)[:user]))
        if math.isinf(cut):
            return 1.0
        return ordered_cdf_quadrature(
            FadingParams(cfg.mu, cfg.omega[user - 1]),
            OrderedIndex(cfg.ranks[user - 1], cfg.pool),
            cut,
        )
    raise TypeError(f"unsupported config type {type(cfg).__name__}")


# =====================================================================
# Validation gate
# =====================================================================

@dataclass(frozen=True)
class ComparisonRow:
    """One gated comparison of exact, oracle, and simulated outage."""

    snr_db: float
    scenario: str
    mu: int
    user: str
    p_exact: float
    p_oracle: float
    rel_err: float
    p_mc: float
    mc_stderr: float
    passed: bool
    gate: str


def _gate_row(
    snr_db: float,
    scenario: str,
    mu: int,
    user: str,
    exact: float,
    oracle: float,
    estimate: Estimate | None,
    *,
    oracle_rel_tol: float,
    mc_sigmas: float,
) -> ComparisonRow:
    rel_err = abs(exact - oracle) / max(abs(oracle), 1e-300)
    ok = rel_err <= oracle_rel_tol
    gate = f"rel_err<={oracle_rel_tol:g}"
    p_mc = math.nan
    mc_stderr = math.nan
    if estimate is not None:
        p_mc = estimate.p_hat
        mc_stderr = estimate.stderr
        # standard error under the exact probability is the natural null
        # scale and stays positive even when the empirical count is 0 or n
        se_exact = math.sqrt(exact * (1.0 - exact) / estimate.trials)
        tol = mc_sigmas * max(estimate.stderr, se_exact)
        ok = ok and abs(exact - p_mc) <= tol
        gate += f" & |exact-mc|<={mc_sigmas:g}se"
    return ComparisonRow(
        snr_db=snr_db,
        scenario=scenario,
        mu=mu,
        user=user,
        p_exact=exact,
        p_oracle=oracle,
        rel_err=rel_err,
        p_mc=p_mc,
        mc_stderr=mc_stderr,
        passed=ok,
        gate=gate,
    )


def run_validation_suite(
    configs: Sequence[CoopConfig | DirectConfig],
    snr_db: Sequence[float],
    batch: TrialBatch | None = None,
    *,
    oracle_rel_tol: float = 1e-6,
    mc_sigmas: float = 3.0,
    mc_floor: float = MC_PROBABILITY_FLOOR,
) -> list[ComparisonRow]:
    """Gate every configured user at every SNR point; returns all rows.

    Each row compares the exact closed form against its quadrature
    oracle at ``oracle_rel_tol`` relative error.  When ``batch`` is
    given, users whose exact outage exceeds ``mc_floor`` are also
    simulated and gated at ``mc_sigmas`` standard errors; smaller
    probabilities skip the simulation leg (noted in the gate string).
    An empty config or SNR list yields an empty report.
    """
    rows: list[ComparisonRow] = []
    for cfg in configs:
        for db in snr_db:
            rho = 10.0 ** (float(db) / 10.0)
            if isinstance(cfg, CoopConfig):
                exact = {
                    "far": outage_far_exact(cfg, rho),
                    "near": outage_near_exact(cfg, rho),
                }
                estimates: dict[str, Estimate | None] = {"far": None, "near": None}
                if batch is not None and max(exact.values()) > mc_floor:
                    far_est, near_est = estimate_outage_coop(cfg, rho, batch)
                    if exact["far"] > mc_floor:
                        estimates["far"] = far_est
                    if exact["near"] > mc_floor:
                        estimates["near"] = near_est
                for user in ("far", "near"):
                    rows.append(
                        _gate_row(
                            float(db), "coop", cfg.mu, user,
                            exact[user], outage_oracle(cfg, rho, user),
                            estimates[user],
                            oracle_rel_tol=oracle_rel_tol, mc_sigmas=mc_sigmas,
                        )
                    )
            elif isinstance(cfg, DirectConfig):
                for user in range(1, cfg.n_users + 1):
                    exact_u = outage_direct_exact(cfg, rho, user)
                    est = None
                    if batch is not None and exact_u > mc_floor:
                        est = estimate_outage_direct(cfg, rho, user, batch)
                    rows.append(
                        _gate_row(
                            float(db), "direct", cfg.mu, str(user),
                            exact_u, outage_oracle(cfg, rho, user), est,
                            oracle_rel_tol=oracle_rel_tol, mc_sigmas=mc_sigmas,
                        )
                    )
            else:
                raise TypeError(f"unsupported config type {type(cfg).__name__}")
    return rows
