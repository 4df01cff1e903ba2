"""Engine configuration and the flat key=value config file format.

Config files are plain text, one ``key = value`` per line, ``#`` comments
and blank lines allowed.  Keys mirror the field names of the config
dataclasses; map-valued fields use dotted keys (``aspect_weight.speed``,
``agency_reputation.a01``).  Unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class EngineConfig:
    """Knobs of the reputation computation.

    ``aspect_weights`` assigns relative importance to rating aspects;
    aspects not listed (including the absent aspect) fall back to
    ``default_aspect_weight``.  ``blend_stake`` and ``blend_transaction``
    weight the two differential kinds against each other and may not both
    be zero.  ``rater_weight_floor`` is the minimum effective reputation a
    rater exerts regardless of its stored value.
    """

    default_reputation: float = 0.5
    aspect_weights: dict[str, float] = field(default_factory=dict)
    default_aspect_weight: float = 1.0
    blend_stake: float = 1.0
    blend_transaction: float = 1.0
    use_log_financial: bool = False
    use_log_differential: bool = False
    decay_recent: float = 1.0
    decay_past: float = 1.0
    rater_weight_floor: float = 0.0

    def validate(self) -> None:
        if not 0.0 <= self.default_reputation <= 1.0:
            raise ConfigError(
                f"default_reputation must lie in [0, 1], got {self.default_reputation}"
            )
        for name in ("blend_stake", "blend_transaction", "decay_recent",
                     "decay_past", "rater_weight_floor", "default_aspect_weight"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
        if self.blend_stake < 0.0 or self.blend_transaction < 0.0:
            raise ConfigError("blend weights must be non-negative")
        if self.blend_stake + self.blend_transaction <= 0.0:
            raise ConfigError("blend_stake and blend_transaction must not both be zero")
        if self.decay_recent <= 0.0 or self.decay_past <= 0.0:
            raise ConfigError("decay coefficients must be positive")
        if self.rater_weight_floor < 0.0:
            raise ConfigError("rater_weight_floor must be non-negative")
        if self.default_aspect_weight <= 0.0:
            raise ConfigError("default_aspect_weight must be positive")
        for aspect, weight in self.aspect_weights.items():
            if not (math.isfinite(weight) and weight > 0.0):
                raise ConfigError(f"aspect weight for {aspect!r} must be positive, got {weight}")


def parse_key_values(text: str) -> dict[str, str]:
    """Split flat config text into a key -> raw string map."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _as_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _as_bool(key: str, raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


_ENGINE_FLOAT_KEYS = (
    "default_reputation",
    "default_aspect_weight",
    "blend_stake",
    "blend_transaction",
    "decay_recent",
    "decay_past",
    "rater_weight_floor",
)
_ENGINE_BOOL_KEYS = ("use_log_financial", "use_log_differential")


def engine_config_from_text(text: str) -> EngineConfig:
    """Build a validated :class:`EngineConfig` from flat key=value text."""
    pairs = parse_key_values(text)
    cfg = EngineConfig()
    for key, raw in pairs.items():
        if key in _ENGINE_FLOAT_KEYS:
            setattr(cfg, key, _as_float(key, raw))
        elif key in _ENGINE_BOOL_KEYS:
            setattr(cfg, key, _as_bool(key, raw))
        elif key.startswith("aspect_weight."):
            aspect = key[len("aspect_weight."):]
            if not aspect:
                raise ConfigError("aspect_weight. key is missing the aspect name")
            cfg.aspect_weights[aspect] = _as_float(key, raw)
        else:
            raise ConfigError(f"unknown engine config key {key!r}")
    cfg.validate()
    return cfg


def load_engine_config(path: str | Path) -> EngineConfig:
    return engine_config_from_text(Path(path).read_text(encoding="utf-8"))
