"""Service configuration: TOML file, environment overrides, validation.

Precedence, lowest to highest: built-in defaults, config file, environment
variables (WARDEN_BIND, WARDEN_API_KEY, WARDEN_DATA_DIR,
WARDEN_SCHED_INTERVAL, WARDEN_WORKER_INTERVAL), explicit overrides.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def parse_duration(text: object, field_name: str) -> float:
    """Duration to seconds: bare numbers, or strings like '30s', '200ms', '2m'."""
    if isinstance(text, bool):
        raise ConfigError(f"{field_name}: expected a duration, got a boolean")
    if isinstance(text, (int, float)):
        return float(text)
    if not isinstance(text, str):
        raise ConfigError(f"{field_name}: expected a duration, got {type(text).__name__}")
    raw = text.strip().lower()
    for suffix, scale in (("ms", 0.001), ("s", 1.0), ("m", 60.0)):
        if raw.endswith(suffix):
            number = raw[: -len(suffix)]
            break
    else:
        number, scale = raw, 1.0
    try:
        return float(number) * scale
    except ValueError:
        raise ConfigError(f"{field_name}: cannot parse duration {text!r}") from None


def parse_bind(text: str, field_name: str = "bind") -> tuple[str, int]:
    """'host:port' to a (host, port) pair; port 0 requests an ephemeral port."""
    host, sep, port_text = text.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"{field_name}: expected host:port, got {text!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise ConfigError(f"{field_name}: invalid port {port_text!r}") from None
    if not 0 <= port <= 65535:
        raise ConfigError(f"{field_name}: port {port} out of range")
    return host, port


@dataclass(frozen=True)
class WardenConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8000
    api_keys: tuple[str, ...] = ()
    data_dir: Path = Path("warden-data")
    scheduler_interval: float = 30.0
    worker_interval: float = 15.0
    batch_limit: int = 500
    retrain_threshold: int = 25
    epsilon: float = 0.005
    test_fraction: float = 0.3
    split_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "data_dir", Path(self.data_dir))
        object.__setattr__(self, "api_keys", tuple(self.api_keys))
        if not 0 <= self.bind_port <= 65535:
            raise ConfigError(f"bind: port {self.bind_port} out of range")
        if self.scheduler_interval <= 0:
            raise ConfigError("scheduler_interval: must be a positive duration")
        if self.worker_interval <= 0:
            raise ConfigError("worker_interval: must be a positive duration")
        if self.batch_limit < 1:
            raise ConfigError("batch_limit: must be >= 1")
        if self.retrain_threshold < 1:
            raise ConfigError("retrain_threshold: must be >= 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon: must be non-negative")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction: must be in (0, 1)")

    @property
    def bind_address(self) -> str:
        return f"{self.bind_host}:{self.bind_port}"

    def require_api_keys(self) -> None:
        """Serving requires at least one key; everything data-facing is authenticated."""
        if not self.api_keys:
            raise ConfigError(
                "api_keys: at least one API key is required to serve "
                "(set api_keys in the config file or WARDEN_API_KEY)"
            )


_DURATION_FIELDS = {"scheduler_interval", "worker_interval"}
_INT_FIELDS = {"batch_limit", "retrain_threshold", "split_seed"}
_FLOAT_FIELDS = {"epsilon", "test_fraction"}


def _from_mapping(raw: Mapping[str, Any], origin: str) -> dict[str, Any]:
    known = {f.name for f in fields(WardenConfig)} | {"bind"}
    out: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"{key}: unknown setting in {origin}")
        if key == "bind":
            out["bind_host"], out["bind_port"] = parse_bind(str(value), "bind")
        elif key in _DURATION_FIELDS:
            out[key] = parse_duration(value, key)
        elif key == "api_keys":
            if not isinstance(value, (list, tuple)) or not all(isinstance(k, str) for k in value):
                raise ConfigError("api_keys: expected a list of strings")
            out[key] = tuple(value)
        elif key == "data_dir":
            out[key] = Path(str(value))
        elif key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key}: expected an integer")
            out[key] = value
        elif key in _FLOAT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key}: expected a number")
            out[key] = float(value)
        else:
            out[key] = value
    return out


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    **overrides: Any,
) -> WardenConfig:
    """Assemble the effective config from file, environment, and overrides."""
    env = os.environ if env is None else env
    settings: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config: file not found: {path}")
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config: invalid TOML in {path}: {exc}") from None
        settings.update(_from_mapping(raw, str(path)))

    if "WARDEN_BIND" in env:
        settings["bind_host"], settings["bind_port"] = parse_bind(env["WARDEN_BIND"], "WARDEN_BIND")
    if "WARDEN_API_KEY" in env:
        extra = env["WARDEN_API_KEY"]
        if extra:
            settings["api_keys"] = tuple(settings.get("api_keys", ())) + (extra,)
    if "WARDEN_DATA_DIR" in env:
        settings["data_dir"] = Path(env["WARDEN_DATA_DIR"])
    if "WARDEN_SCHED_INTERVAL" in env:
        settings["scheduler_interval"] = parse_duration(env["WARDEN_SCHED_INTERVAL"], "WARDEN_SCHED_INTERVAL")
    if "WARDEN_WORKER_INTERVAL" in env:
        settings["worker_interval"] = parse_duration(env["WARDEN_WORKER_INTERVAL"], "WARDEN_WORKER_INTERVAL")

    for key, value in overrides.items():
        if value is not None:
            settings[key] = value
    config = WardenConfig(**{k: v for k, v in settings.items() if k != "bind"})
    return config


def apply_overrides(config: WardenConfig, **changes: Any) -> WardenConfig:
    """Functional update helper for tests and the CLI."""
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
