"""Configuration file management for evoctrl.

A run is configured by a flat TOML file of `key = value` lines. Command-line
flags override the file, the file overrides EVOCTRL_SEED (seed only), and that
overrides the built-in defaults.
"""

import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from evoctrl.domain.errors import ConfigError

SEED_ENV_VAR = "EVOCTRL_SEED"

CHOICES: dict[str, tuple[str, ...]] = {
    "method": ("backward", "vi"),
    "alpha_schedule": ("constant", "polynomial"),
    "epsilon_schedule": ("constant", "linear"),
    "start_distribution": ("uniform-state", "uniform-bitstring"),
    "sampler": ("model", "bit"),
}


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of every subcommand, with its default."""

    n: int = 50
    grid_min: float = 0.01
    grid_max: float = 1.0
    grid_step: float = 0.01
    tolerance: float = 1e-9
    max_iterations: int = 100_000
    method: str = "backward"
    episodes: int = 200_000
    alpha_schedule: str = "polynomial"
    alpha: float = 1.0
    omega: float = 0.7
    epsilon_schedule: str = "linear"
    epsilon: float = 1.0
    epsilon_min: float = 0.05
    start_distribution: str = "uniform-state"
    sampler: str = "model"
    step_cap: int = 1_000_000
    runs: int = 2000
    seed: int = 42
    workers: int = 1
    output_dir: str = "."
    policies: str = "constant,reciprocal,optimal"
    start: str = "random"
    guide_policy: str = ""
    guide_rate: float = 0.0

    def __post_init__(self) -> None:
        for key, allowed in CHOICES.items():
            value = getattr(self, key)
            if value not in allowed:
                raise ConfigError(key, f"'{value}' is not one of {', '.join(allowed)}")


def get_xdg_config_home() -> Path:
    """Get XDG config directory, with fallback to ~/.config."""
    xdg_config = os.environ.get("XDG_CONFIG_HOME")
    if xdg_config:
        return Path(xdg_config)
    return Path.home() / ".config"


def get_config_path() -> Path:
    """Get the default config file path (XDG compliant)."""
    return get_xdg_config_home() / "evoctrl" / "config.toml"


def _field_types() -> dict[str, type]:
    return {f.name: f.type for f in fields(RunConfig) if isinstance(f.type, type)}


def validate_config(raw: dict[str, Any]) -> dict[str, Any]:
    """Check a flat config mapping against RunConfig.

    Integers are accepted for float keys and converted.

    Returns:
        The mapping with float keys coerced to float.

    Raises:
        ConfigError: On an unknown key, a nested table or a value of the wrong type.
    """
    types = _field_types()
    checked: dict[str, Any] = {}

    for key, value in raw.items():
        if key not in types:
            raise ConfigError(key, "unknown key")
        if isinstance(value, dict):
            raise ConfigError(key, "nested tables are not supported")

        expected = types[key]
        if isinstance(value, bool):
            raise ConfigError(key, f"expected {expected.__name__}, got a boolean")
        if expected is float and isinstance(value, int):
            value = float(value)
        if not isinstance(value, expected):
            raise ConfigError(key, f"expected {expected.__name__}, got {type(value).__name__}")
        checked[key] = value

    return checked


def create_default_config(config_path: Path | None = None) -> Path:
    """Write a config file holding every default.

    Args:
        config_path: Path to config file. If None, uses default location.

    Returns:
        The path written.
    """
    if config_path is None:
        config_path = get_config_path()

    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "wb") as f:
        tomli_w.dump(asdict(RunConfig()), f)
    return config_path


def load_config(config_path: Path | None = None) -> dict[str, Any]:
    """Load and validate a config file.

    Args:
        config_path: Path to config file. If None, uses default location.

    Returns:
        Validated configuration dictionary.

    Raises:
        FileNotFoundError: If config file doesn't exist.
        ConfigError: If the file is not valid TOML or holds an invalid key.
    """
    if config_path is None:
        config_path = get_config_path()

    try:
        with open(config_path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(str(config_path), f"invalid TOML: {e}") from e
    return validate_config(raw)


def _env_seed() -> dict[str, Any]:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return {}
    try:
        return {"seed": int(raw)}
    except ValueError:
        raise ConfigError("seed", f"{SEED_ENV_VAR}='{raw}' is not an integer") from None


def resolve_config(config_path: Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Merge defaults, EVOCTRL_SEED, the config file and flag overrides.

    Args:
        config_path: Explicit config file; it must exist. When None, the default
            location is used if a file is there.
        overrides: Flag values; None entries mean "not given".

    Returns:
        The effective RunConfig.

    Raises:
        ConfigError: On any invalid key or value.
        FileNotFoundError: If an explicit config file is missing.
    """
    merged: dict[str, Any] = _env_seed()

    if config_path is not None:
        merged.update(load_config(config_path))
    elif get_config_path().exists():
        merged.update(load_config(get_config_path()))

    given = {key: value for key, value in (overrides or {}).items() if value is not None}
    merged.update(validate_config(given))

    return replace(RunConfig(), **merged)
