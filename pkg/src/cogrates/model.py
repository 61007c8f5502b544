"""Channel instances, message-sharing schemes, and rate tuples.

Everything downstream consumes these value types.  Powers and noise
variances are stored in linear units; decibels appear only at the
configuration boundary (``db_to_linear`` / ``validate_config``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

DEFAULT_GAIN = 0.55
DEFAULT_NOISE = 1.0
DEFAULT_POWER_DB = 10.0

GAIN_NAMES = ("a12", "a13", "a21", "a23", "a31", "a32")


class ConfigError(ValueError):
    """A channel configuration or run parameter violates its contract."""


class Scheme(Enum):
    """Message-sharing / rate-splitting scheme of the three-sender channel.

    CUMS1, CUMS2: cumulative sharing (sender 2 knows message 1, sender 3
    knows messages 1 and 2), with all-senders or secondary-only splitting.
    PRMS1, PRMS2: both secondary senders know message 1 only.
    COMS: sender 3 knows messages 1 and 2; senders 1 and 2 do not split.
    """

    CUMS1 = "cums1"
    CUMS2 = "cums2"
    PRMS1 = "prms1"
    PRMS2 = "prms2"
    COMS = "coms"

    @property
    def gaussian_capable(self) -> bool:
        """True when a Gaussian auxiliary parameterization is available.

        The all-splitting schemes are supported only by the discrete
        brute-force oracle.
        """
        return self in (Scheme.CUMS2, Scheme.PRMS2, Scheme.COMS)

    @property
    def split_rate_names(self) -> tuple[str, ...]:
        return _SPLIT_NAMES[self]

    @property
    def split_dimension(self) -> int:
        return len(_SPLIT_NAMES[self])

    def projection_matrix(self):
        """3 x d map taking split rates to the user rate triple."""
        import numpy as np

        names = self.split_rate_names
        mat = np.zeros((3, len(names)))
        for j, name in enumerate(names):
            mat[_SPLIT_TARGET[name], j] = 1.0
        return mat


_SPLIT_NAMES = {
    Scheme.CUMS1: ("r10", "r11", "r20", "r22", "r30", "r33"),
    Scheme.CUMS2: ("r11", "r21", "r22", "r31", "r33"),
    Scheme.PRMS1: ("r10", "r11", "r20", "r22", "r30", "r33"),
    Scheme.PRMS2: ("r11", "r21", "r22", "r31", "r33"),
    Scheme.COMS: ("r1", "r2", "r31", "r33"),
}

# user index (0-based) receiving each sub-message rate
_SPLIT_TARGET = {
    "r10": 0, "r11": 0,
    "r20": 1, "r21": 1, "r22": 1,
    "r30": 2, "r31": 2, "r33": 2,
    "r1": 0, "r2": 1,
}


def db_to_linear(x_db: float) -> float:
    """Convert a decibel quantity to linear scale."""
    if not math.isfinite(x_db):
        raise ConfigError(f"dB value must be finite, got {x_db!r}")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a positive linear quantity to decibels."""
    if not (math.isfinite(x) and x > 0):
        raise ConfigError(f"linear value must be finite and positive, got {x!r}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ChannelGains:
    """Real cross gains of the standard-form channel; direct gains are 1."""

    a12: float = DEFAULT_GAIN
    a13: float = DEFAULT_GAIN
    a21: float = DEFAULT_GAIN
    a23: float = DEFAULT_GAIN
    a31: float = DEFAULT_GAIN
    a32: float = DEFAULT_GAIN

    def __post_init__(self):
        for name in GAIN_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"gain {name} must be finite, got {v!r}")

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in GAIN_NAMES}


@dataclass(frozen=True)
class ChannelConfig:
    """Transmit powers, noise variances and cross gains, all linear scale.

    ``mac_noise`` normalizes the dual multiple-access bound; it defaults
    to the first receiver's noise variance.
    """

    p1: float = db_to_linear(DEFAULT_POWER_DB)
    p2: float = db_to_linear(DEFAULT_POWER_DB)
    p3: float = db_to_linear(DEFAULT_POWER_DB)
    q1: float = DEFAULT_NOISE
    q2: float = DEFAULT_NOISE
    q3: float = DEFAULT_NOISE
    gains: ChannelGains = field(default_factory=ChannelGains)
    mac_noise: float | None = None

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"power {name} must be finite and >= 0, got {v!r}")
        for name in ("q1", "q2", "q3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"noise variance {name} must be positive, got {v!r}")
        if self.mac_noise is not None and not (
            math.isfinite(self.mac_noise) and self.mac_noise > 0
        ):
            raise ConfigError(
                f"noise variance mac_noise must be positive, got {self.mac_noise!r}"
            )

    @property
    def powers(self) -> tuple[float, float, float]:
        return (self.p1, self.p2, self.p3)

    @property
    def noises(self) -> tuple[float, float, float]:
        return (self.q1, self.q2, self.q3)

    @property
    def effective_mac_noise(self) -> float:
        return self.q1 if self.mac_noise is None else self.mac_noise

    def as_dict(self) -> dict[str, float]:
        d = {k: getattr(self, k) for k in ("p1", "p2", "p3", "q1", "q2", "q3")}
        d.update(self.gains.as_dict())
        if self.mac_noise is not None:
            d["mac_noise"] = self.mac_noise
        return d


@dataclass(frozen=True)
class GpParams:
    """One binning parameterization: power-split fractions plus the
    coefficients each auxiliary carries against the known signals."""

    tau: float = 0.5
    kappa: float = 0.5
    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0

    def __post_init__(self):
        for name in ("tau", "kappa"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ConfigError(f"fraction {name} must lie in [0, 1], got {v!r}")
        for name in ("alpha1", "alpha2", "alpha3", "alpha4", "beta1", "beta2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"coefficient {name} must be finite, got {v!r}")

    def replace(self, **kw) -> "GpParams":
        from dataclasses import replace as _replace

        return _replace(self, **kw)


@dataclass(frozen=True)
class RatePoint:
    """User rate triple in bits per channel use."""

    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        for name in ("r1", "r2", "r3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"rate {name} must be finite and >= 0, got {v!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r1, self.r2, self.r3)


def project_split_rates(split, scheme: Scheme) -> RatePoint:
    """Sum sub-message rates into the user rate triple.

    ``split`` follows the scheme's layout, e.g. (r11, r21, r22, r31, r33)
    for the secondary-splitting schemes.
    """
    names = scheme.split_rate_names
    values = tuple(float(v) for v in split)
    if len(values) != len(names):
        raise ConfigError(
            f"{scheme.value} expects {len(names)} split rates {names}, got {len(values)}"
        )
    sums = [0.0, 0.0, 0.0]
    for name, v in zip(names, values):
        if not (math.isfinite(v) and v >= 0):
            raise ConfigError(f"split rate {name} must be finite and >= 0, got {v!r}")
        sums[_SPLIT_TARGET[name]] += v
    return RatePoint(*sums)


_POWER_KEYS = ("p1", "p2", "p3")
_NOISE_KEYS = ("q1", "q2", "q3")
_SCALAR_KEYS = _POWER_KEYS + _NOISE_KEYS + ("mac_noise",)
_KNOWN_KEYS = (
    set(_SCALAR_KEYS)
    | set(GAIN_NAMES)
    | {k + "_db" for k in _POWER_KEYS + _NOISE_KEYS}
)


def validate_config(raw: dict | None = None) -> ChannelConfig:
    """Build a checked ChannelConfig from a flat key/value mapping.

    Omitted fields take the defaults (all gains 0.55, unit noise, 10 dB
    power).  Powers and noises accept either a linear key (``p1``) or a
    decibel key (``p1_db``), not both.
    """
    raw = dict(raw or {})
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    values: dict[str, float] = {}
    for key in _POWER_KEYS + _NOISE_KEYS:
        db_key = key + "_db"
        if key in raw and db_key in raw:
            raise ConfigError(f"give either {key} or {db_key}, not both")
        if db_key in raw:
            values[key] = db_to_linear(_as_float(db_key, raw[db_key]))
        elif key in raw:
            values[key] = _as_float(key, raw[key])
    if "mac_noise" in raw:
        values["mac_noise"] = _as_float("mac_noise", raw["mac_noise"])

    gain_kw = {
        name: _as_float(name, raw[name]) for name in GAIN_NAMES if name in raw
    }
    return ChannelConfig(gains=ChannelGains(**gain_kw), **values)


def _as_float(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {name} is not a number: {value!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"config key {name} must be finite, got {v!r}")
    return v
