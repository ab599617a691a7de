"""Scenario configuration containers, canonical presets, and INI loading.

Two deployments are modelled.  ``CoopConfig`` describes a two-user
downlink where a far user (weak direct link, low sort rank) and a near
user (strong direct link, high sort rank) are picked from a pool of M
sorted users and additionally served through a fixed-gain amplify-and-
forward relay over a second time slot.  ``DirectConfig`` describes a
single-slot downlink serving every user by superposition coding with
successive interference cancellation and no relay.

Configs are frozen dataclasses validated on construction; the CLI builds
them from INI files with the same field names.
"""

from __future__ import annotations

import configparser
import logging
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

logger = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "CoopConfig",
    "DirectConfig",
    "comparison_presets",
    "coop_preset",
    "direct_preset",
    "load_config_file",
    "load_config_text",
    "preset_configs",
    "with_mu",
]

_POWER_SUM_TOL = 1e-9


class ConfigError(ValueError):
    """Raised for invalid scenario parameters; message names the field."""


def _check_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be finite and > 0, got {value}")


def _check_mu(mu: int) -> None:
    if not isinstance(mu, int) or isinstance(mu, bool) or mu < 1:
        raise ConfigError(f"mu must be an integer >= 1, got {mu!r}")


# =====================================================================
# Cooperative (relay-assisted) two-user scenario
# =====================================================================

@dataclass(frozen=True)
class CoopConfig:
    """Relay-assisted two-user downlink over Nakagami-m fading.

    Attributes
    ----------
    users : int
        Pool size M of sorted direct links.
    far_rank, near_rank : int
        1-based ascending sort positions of the served far and near user;
        ``far_rank < near_rank``.
    power_far, power_near : float
        Superposition power fractions; sum to 1 with the far user favored.
    rate_far, rate_near : float
        Target rates in bit/s/Hz; the two-slot protocol doubles the SNR
        thresholds relative to single-slot signalling.  Zero is allowed
        and makes the corresponding outage trivially zero.
    relay_gain : float
        Fixed amplification factor of the relay.  The derived constant
        ``relay_const`` = 1 / relay_gain**2 scales the noise forwarded by
        the relay; passing ``relay_const`` instead overrides it directly.
    mu : int
        Integer fading severity shared by all links.
    omega_sd : float
        Mean direct-link power gain of the sorted pool.
    omega_sr, omega_rd : float
        Mean gains of the source-relay hop and the relay-user hops.
    omega_sd_far, omega_sd_near, omega_rd_far, omega_rd_near : float or None
        Optional per-user overrides.  Distinct direct-link means break the
        identically-distributed assumption behind the sorted pool, so
        using them emits a warning.
    """

    users: int
    far_rank: int
    near_rank: int
    power_far: float
    power_near: float
    rate_far: float
    rate_near: float
    relay_gain: float | None = 0.9
    relay_const: float | None = None
    mu: int = 1
    omega_sd: float = 1.0
    omega_sr: float = 4.0
    omega_rd: float = 4.0
    omega_sd_far: float | None = None
    omega_sd_near: float | None = None
    omega_rd_far: float | None = None
    omega_rd_near: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.users, int) or self.users < 2:
            raise ConfigError(f"users must be an integer >= 2, got {self.users!r}")
        for name in ("far_rank", "near_rank"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 1 <= v <= self.users:
                raise ConfigError(f"{name} must be an integer in [1, users], got {v!r}")
        if self.far_rank >= self.near_rank:
            raise ConfigError(
                f"far_rank must be below near_rank, got {self.far_rank} >= {self.near_rank}"
            )
        _check_positive("power_far", self.power_far)
        _check_positive("power_near", self.power_near)
        if self.power_far <= self.power_near:
            raise ConfigError(
                "power_far must exceed power_near (far user is decoded first), "
                f"got {self.power_far} <= {self.power_near}"
            )
        if abs(self.power_far + self.power_near - 1.0) > _POWER_SUM_TOL:
            raise ConfigError(
                f"power_far + power_near must equal 1, got {self.power_far + self.power_near}"
            )
        for name in ("rate_far", "rate_near"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")
        if (self.relay_gain is None) == (self.relay_const is None):
            raise ConfigError("exactly one of relay_gain and relay_const must be set")
        if self.relay_gain is not None:
            _check_positive("relay_gain", self.relay_gain)
        if self.relay_const is not None:
            _check_positive("relay_const", self.relay_const)
        _check_mu(self.mu)
        for name in ("omega_sd", "omega_sr", "omega_rd"):
            _check_positive(name, getattr(self, name))
        for name in ("omega_sd_far", "omega_sd_near", "omega_rd_far", "omega_rd_near"):
            v = getattr(self, name)
            if v is not None:
                _check_positive(name, v)
        if self.omega_sd_far is not None or self.omega_sd_near is not None:
            warnings.warn(
                "distinct per-user direct-link means break the i.i.d. assumption "
                "behind the sorted pool; ordered-statistics results are heuristic",
                stacklevel=2,
            )

    # -- derived quantities -------------------------------------------

    @property
    def noise_scale(self) -> float:
        """Relay noise constant 1 / relay_gain**2 (or the explicit override)."""
        if self.relay_const is not None:
            return self.relay_const
        return 1.0 / (self.relay_gain * self.relay_gain)

    def direct_mean(self, user: str) -> float:
        """Mean direct-link gain for 'far' or 'near', honoring overrides."""
        if user == "far":
            return self.omega_sd if self.omega_sd_far is None else self.omega_sd_far
        if user == "near":
            return self.omega_sd if self.omega_sd_near is None else self.omega_sd_near
        raise ValueError(f"user must be 'far' or 'near', got {user!r}")

    def relay_mean(self, user: str) -> float:
        """Mean relay-to-user gain for 'far' or 'near', honoring overrides."""
        if user == "far":
            return self.omega_rd if self.omega_rd_far is None else self.omega_rd_far
        if user == "near":
            return self.omega_rd if self.omega_rd_near is None else self.omega_rd_near
        raise ValueError(f"user must be 'far' or 'near', got {user!r}")

    def rank(self, user: str) -> int:
        if user == "far":
            return self.far_rank
        if user == "near":
            return self.near_rank
        raise ValueError(f"user must be 'far' or 'near', got {user!r}")

    @classmethod
    def from_geometry(
        cls,
        *,
        relay_distance: float = 0.5,
        pathloss_exp: float = 2.0,
        **kwargs,
    ) -> "CoopConfig":
        """Place the relay on the unit source-user segment.

        ``omega_sr`` and ``omega_rd`` follow the inverse power law
        ``d**-pathloss_exp`` for hop lengths ``relay_distance`` and
        ``1 - relay_distance``.
        """
        if not 0 < relay_distance < 1:
            raise ConfigError(f"relay_distance must lie in (0, 1), got {relay_distance}")
        _check_positive("pathloss_exp", pathloss_exp)
        return cls(
            omega_sr=relay_distance ** -pathloss_exp,
            omega_rd=(1.0 - relay_distance) ** -pathloss_exp,
            **kwargs,
        )


# =====================================================================
# Non-cooperative M-user scenario
# =====================================================================

@dataclass(frozen=True)
class DirectConfig:
    """Single-slot M-user downlink with superposition coding and SIC.

    Attributes
    ----------
    power : tuple of float
        Power fractions per served user, strictly descending, summing
        to 1.  User 1 gets the most power and is decoded first.
    rates : tuple of float
        Target rates in bit/s/Hz per served user, strictly positive.
    omega : tuple of float
        Mean power gain per served user (statistically ordered users
        have ascending means, but any positive values are accepted).
    mu : int
        Integer fading severity shared by all users.
    ranks : tuple of int or None
        Ascending 1-based sort positions of the served users inside a
        pool of ``pool`` i.i.d. links.  Default: users 1..M of a pool of
        size M, which is the fully loaded system.
    pool : int or None
        Sorted pool size; defaults to ``len(power)`` (or ``max(ranks)``).
    """

    power: tuple[float, ...]
    rates: tuple[float, ...]
    omega: tuple[float, ...]
    mu: int = 1
    ranks: tuple[int, ...] | None = None
    pool: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "power", tuple(float(a) for a in self.power))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        m = len(self.power)
        if m < 1:
            raise ConfigError("power must contain at least one user")
        if len(self.rates) != m or len(self.omega) != m:
            raise ConfigError(
                f"power, rates and omega must have equal length, got "
                f"{m}, {len(self.rates)}, {len(self.omega)}"
            )
        for i, a in enumerate(self.power, start=1):
            _check_positive(f"power[{i}]", a)
        if any(a <= b for a, b in zip(self.power, self.power[1:])):
            raise ConfigError(f"power must be strictly descending, got {self.power}")
        if abs(sum(self.power) - 1.0) > _POWER_SUM_TOL:
            raise ConfigError(f"power must sum to 1, got {sum(self.power)}")
        for i, r in enumerate(self.rates, start=1):
            _check_positive(f"rates[{i}]", r)
        for i, w in enumerate(self.omega, start=1):
            _check_positive(f"omega[{i}]", w)
        _check_mu(self.mu)
        ranks = self.ranks if self.ranks is not None else tuple(range(1, m + 1))
        ranks = tuple(int(r) for r in ranks)
        if len(ranks) != m:
            raise ConfigError(f"ranks must list one sort position per user, got {ranks}")
        if any(r1 >= r2 for r1, r2 in zip(ranks, ranks[1:])):
            raise ConfigError(f"ranks must be strictly ascending, got {ranks}")
        pool = self.pool if self.pool is not None else max(m, ranks[-1])
        if not isinstance(pool, int) or pool < ranks[-1] or pool < 1:
            raise ConfigError(f"pool must be an integer >= max rank, got {pool!r}")
        if ranks[0] < 1:
            raise ConfigError(f"ranks must be >= 1, got {ranks}")
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "pool", pool)

    @property
    def n_users(self) -> int:
        """Number of served users M."""
        return len(self.power)


# =====================================================================
# Canonical presets (committed INI files are the source of truth)
# =====================================================================

def preset_configs(name: str) -> dict[str, "CoopConfig | DirectConfig"]:
    """Load a committed preset file by name ('coop', 'direct', 'comparison')."""
    from importlib import resources

    filename = name if name.endswith(".ini") else f"{name}.ini"
    try:
        text = resources.files("noma_perf").joinpath(f"presets/{filename}").read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"no such preset: {name}") from exc
    return load_config_text(text, f"preset {filename}")


def coop_preset(mu: int = 1) -> CoopConfig:
    """Reference cooperative setup: pool of 5, weakest and strongest served.

    Far/near power split 0.8/0.2, target rates 1 and 1.5 bit/s/Hz, relay
    gain 0.9, relay halfway along a unit path with square-law pathloss
    (both hop means equal 4), unit direct-link mean.
    """
    return with_mu(preset_configs("coop")["coop"], mu)


def direct_preset(mu: int = 1) -> DirectConfig:
    """Reference non-cooperative setup: three users, ascending link quality.

    Power split 0.5/0.4/0.1, rates 0.2/1/2 bit/s/Hz, mean gains
    0.3/1.5/5.
    """
    return with_mu(preset_configs("direct")["direct"], mu)


def comparison_presets(mu: int = 1) -> tuple[CoopConfig, DirectConfig]:
    """Matched pair for a cooperative vs non-cooperative comparison.

    Both deployments serve the weakest and strongest of a pool of three
    unit-mean direct links with power split 0.8/0.2 and rates 0.5 and
    1 bit/s/Hz; the cooperative side adds the reference relay geometry.
    With everything else equal, the relay branch can only lower outage,
    so the cooperative curves sit below the non-cooperative ones once
    past the low-SNR regime.
    """
    cfgs = preset_configs("comparison")
    return with_mu(cfgs["coop"], mu), with_mu(cfgs["direct"], mu)


# =====================================================================
# INI loading
# =====================================================================

def _get_float(section, key: str, where: str) -> float:
    try:
        return section.getfloat(key)
    except ValueError as exc:
        raise ConfigError(f"{where}: key '{key}' is not a number: {section.get(key)}") from exc


def _get_int(section, key: str, where: str) -> int:
    try:
        return section.getint(key)
    except ValueError as exc:
        raise ConfigError(f"{where}: key '{key}' is not an integer: {section.get(key)}") from exc


def _get_floats(section, key: str, where: str) -> tuple[float, ...]:
    raw = section.get(key)
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{where}: key '{key}' is not a number list: {raw}") from exc


def _get_ints(section, key: str, where: str) -> tuple[int, ...]:
    raw = section.get(key)
    try:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{where}: key '{key}' is not an integer list: {raw}") from exc


_COOP_KEYS = {
    "users", "far_rank", "near_rank", "power_far", "power_near", "rate_far",
    "rate_near", "relay_gain", "relay_const", "mu", "omega_sd", "omega_sr",
    "omega_rd", "omega_sd_far", "omega_sd_near", "omega_rd_far",
    "omega_rd_near", "relay_distance", "pathloss_exp",
}
_DIRECT_KEYS = {"power", "rates", "omega", "mu", "ranks", "pool"}


def _coop_from_section(section, where: str) -> CoopConfig:
    unknown = set(section.keys()) - _COOP_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    for key in ("users", "far_rank", "near_rank", "power_far", "power_near",
                "rate_far", "rate_near"):
        if key not in section:
            raise ConfigError(f"{where}: missing required key '{key}'")
    kwargs: dict = {
        "users": _get_int(section, "users", where),
        "far_rank": _get_int(section, "far_rank", where),
        "near_rank": _get_int(section, "near_rank", where),
        "power_far": _get_float(section, "power_far", where),
        "power_near": _get_float(section, "power_near", where),
        "rate_far": _get_float(section, "rate_far", where),
        "rate_near": _get_float(section, "rate_near", where),
    }
    if "mu" in section:
        kwargs["mu"] = _get_int(section, "mu", where)
    if "relay_const" in section:
        kwargs["relay_const"] = _get_float(section, "relay_const", where)
        kwargs["relay_gain"] = None
    elif "relay_gain" in section:
        kwargs["relay_gain"] = _get_float(section, "relay_gain", where)
    for key in ("omega_sd", "omega_sd_far", "omega_sd_near", "omega_rd_far",
                "omega_rd_near"):
        if key in section:
            kwargs[key] = _get_float(section, key, where)
    geometric = "relay_distance" in section or "pathloss_exp" in section
    explicit = "omega_sr" in section or "omega_rd" in section
    if geometric and explicit:
        raise ConfigError(
            f"{where}: give either relay_distance/pathloss_exp or omega_sr/omega_rd, not both"
        )
    if explicit:
        for key in ("omega_sr", "omega_rd"):
            if key in section:
                kwargs[key] = _get_float(section, key, where)
        return CoopConfig(**kwargs)
    geo = {}
    if "relay_distance" in section:
        geo["relay_distance"] = _get_float(section, "relay_distance", where)
    if "pathloss_exp" in section:
        geo["pathloss_exp"] = _get_float(section, "pathloss_exp", where)
    return CoopConfig.from_geometry(**geo, **kwargs)


def _direct_from_section(section, where: str) -> DirectConfig:
    unknown = set(section.keys()) - _DIRECT_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    for key in ("power", "rates", "omega"):
        if key not in section:
            raise ConfigError(f"{where}: missing required key '{key}'")
    kwargs: dict = {
        "power": _get_floats(section, "power", where),
        "rates": _get_floats(section, "rates", where),
        "omega": _get_floats(section, "omega", where),
    }
    if "mu" in section:
        kwargs["mu"] = _get_int(section, "mu", where)
    if "ranks" in section:
        kwargs["ranks"] = _get_ints(section, "ranks", where)
    if "pool" in section:
        kwargs["pool"] = _get_int(section, "pool", where)
    return DirectConfig(**kwargs)


def load_config_text(text: str, source: str) -> dict[str, CoopConfig | DirectConfig]:
    """Parse INI text with [coop] and/or [direct] sections into configs.

    Returns a dict keyed by scenario name.  Raises :class:`ConfigError`
    naming ``source`` plus the offending section/key for malformed input.
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {source}: {exc}") from exc
    known = {"coop", "direct"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(
            f"{source}: unknown sections {sorted(unknown)} (expected [coop]/[direct])"
        )
    out: dict[str, CoopConfig | DirectConfig] = {}
    if parser.has_section("coop"):
        out["coop"] = _coop_from_section(parser["coop"], f"{source} [coop]")
    if parser.has_section("direct"):
        out["direct"] = _direct_from_section(parser["direct"], f"{source} [direct]")
    if not out:
        raise ConfigError(f"{source}: no [coop] or [direct] section found")
    return out


def load_config_file(path: str | Path) -> dict[str, CoopConfig | DirectConfig]:
    """Parse an INI file with optional [coop] and [direct] sections."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return load_config_text(text, str(path))


def with_mu(cfg: CoopConfig | DirectConfig, mu: int):
    """Copy of ``cfg`` with the fading severity replaced."""
    return replace(cfg, mu=mu)
