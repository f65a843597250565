"""Link configuration and its flat key/value file format."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
import hashlib
import json
import math
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from rissim.transceiver import SCHEMES

__all__ = ["ConfigError", "LinkConfig", "parse_grid", "load_config", "PHASE_POLICIES"]

# verbatim/signed run the cosine-similarity rule; identity/random are baselines
PHASE_POLICIES = ("verbatim", "signed", "identity", "random")


class ConfigError(ValueError):
    """Invalid simulation configuration."""


def parse_grid(spec) -> tuple[float, ...]:
    """Es/N0 grid from ``"start:step:stop"`` (stop inclusive), a number or a list."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:step:stop, got {spec!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"grid step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError(f"empty grid {spec!r}")
        return tuple(float(np.round(start + k * step, 10)) for k in range(count))
    if isinstance(spec, (int, float)):
        return (float(spec),)
    return tuple(float(v) for v in spec)


@dataclass(frozen=True)
class LinkConfig:
    """Everything that determines a sweep's output.

    ``workers`` and ``out`` do not affect results and are excluded from
    :meth:`config_hash`.
    """

    scheme: str = "mimo"
    tx: int = 2
    rx: int = 2
    n_ris: int = 16
    mod_order: int = 2
    modulation: str = "psk"
    variant: str = "verbatim"
    quantize_levels: int | None = None
    sigma_e2: float = 0.0
    pathloss: tuple[float, float, float] | None = None  # d1 [m], d2 [m], carrier [GHz]
    esn0_db: tuple[float, ...] = (0.0,)
    max_trials: int = 10_000_000
    min_bit_errors: int = 200
    chunk_trials: int = 4096
    seed: int = 0
    quadrature_order: int = 64
    simulate: bool = True
    theory: bool = False
    noiseless: bool = False
    normalize_total_power: bool = False
    workers: int = field(default=1, compare=False)
    out: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "esn0_db", parse_grid(self.esn0_db))
        if self.pathloss is not None:
            object.__setattr__(self, "pathloss", tuple(float(v) for v in self.pathloss))
        self.validate()

    def validate(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        for name in ("tx", "rx", "n_ris", "mod_order", "max_trials", "min_bit_errors",
                     "chunk_trials", "workers", "quadrature_order"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.mod_order & (self.mod_order - 1) or self.mod_order < 2:
            raise ConfigError(f"mod_order must be a power of two >= 2, got {self.mod_order}")
        if self.scheme == "sm" and (self.tx < 2 or self.tx & (self.tx - 1)):
            raise ConfigError(f"spatial modulation needs a power-of-two tx >= 2, got {self.tx}")
        if self.modulation not in ("psk", "qam"):
            raise ConfigError(f"modulation must be psk or qam, got {self.modulation!r}")
        if self.variant not in PHASE_POLICIES:
            raise ConfigError(f"variant must be one of {PHASE_POLICIES}, got {self.variant!r}")
        if self.quantize_levels is not None:
            if self.quantize_levels < 1:
                raise ConfigError("quantize_levels must be positive")
            if self.variant not in ("verbatim", "signed"):
                raise ConfigError("quantization applies only to the cosine-similarity variants")
        if self.sigma_e2 < 0:
            raise ConfigError(f"sigma_e2 must be nonnegative, got {self.sigma_e2}")
        if self.pathloss is not None:
            if len(self.pathloss) != 3 or min(self.pathloss) <= 0:
                raise ConfigError(f"pathloss must be three positive numbers d1,d2,freq_ghz, got {self.pathloss}")
        if len(self.esn0_db) == 0:
            raise ConfigError("empty Es/N0 grid")
        if any(b <= a for a, b in zip(self.esn0_db, self.esn0_db[1:])):
            raise ConfigError("Es/N0 grid must be strictly increasing")
        if self.quadrature_order < 8:
            raise ConfigError("quadrature_order must be at least 8")
        if not (self.simulate or self.theory):
            raise ConfigError("nothing to do: both simulate and theory are off")

    def with_overrides(self, **kw) -> "LinkConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["esn0_db"] = list(self.esn0_db)
        d["pathloss"] = list(self.pathloss) if self.pathloss else None
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("workers")
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_FIELDS = {f.name for f in fields(LinkConfig)}


def config_from_mapping(data: dict) -> LinkConfig:
    unknown = set(data) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        return LinkConfig(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> LinkConfig:
    """Read a flat TOML file whose keys are :class:`LinkConfig` field names.

    Raises
    ------
    OSError
        If the file cannot be read.
    ConfigError
        On syntax errors or invalid values.
    """
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"{path}: config must be flat, found tables {nested}")
    return config_from_mapping(data)
