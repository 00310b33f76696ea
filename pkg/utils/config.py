"""
Layered configuration: built-in defaults, YAML file, environment, CLI flags
"""

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

from .error_handler import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = Path.home() / '.holoportrait' / 'config.yaml'

ENV_OVERRIDES = {
    'HOLO_THREADS': 'threads',
    'HOLO_LOG_LEVEL': 'log_level',
    'HOLO_LOG_DIR': 'log_dir',
}


@dataclass(frozen=True)
class AnalysisConfig:
    """Tolerances and caps shared by every analysis module"""

    # evaluation and roots
    tau_pole: float = 1e-9
    tau_root: float = 1e-12
    tau_cluster: float = 1e-7
    cluster_search: float = 1e-4
    tau_order: float = 1e-6
    tau_zero: float = 1e-9
    max_root_iterations: int = 500

    # classification
    tau_center: float = 1e-9
    tau_band: float = 1e-6
    tau_line: float = 1e-6
    tau_psi: float = 1e-8

    # integration
    rtol: float = 1e-10
    atol: float = 1e-12
    tau_conv: float = 1e-8
    tau_close: float = 1e-6
    tau_grad: float = 1e-10
    t_cap: float = 1e3
    arclength_cap: float = 1e4
    max_steps: int = 200000
    r_escape: float = 1e6
    eps_sep_infinity: float = 1e-4
    eps_sep_finite: float = 1e-3

    # runtime
    threads: int = 4
    seed: int = 0
    log_level: str = 'INFO'
    log_dir: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def updated(self, **overrides: Any) -> 'AnalysisConfig':
        """Copy with the non-None overrides applied and type-checked"""
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **_coerce(clean))

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=True)


_FIELD_TYPES = {f.name: f.type for f in fields(AnalysisConfig)}


def _coerce(values: Dict[str, Any]) -> Dict[str, Any]:
    out = {}
    for key, value in values.items():
        if key not in _FIELD_TYPES:
            logger.warning(f"Ignoring unknown configuration key: {key}")
            continue
        kind = _FIELD_TYPES[key]
        try:
            if kind in (float, 'float'):
                out[key] = float(value)
            elif kind in (int, 'int'):
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError(value)
                out[key] = int(value)
            elif value is None:
                out[key] = None
            else:
                out[key] = str(value)
        except (TypeError, ValueError):
            raise ConfigError(f"Invalid value for {key}: {value!r}")
    if out.get('threads', 1) < 1:
        raise ConfigError("threads must be at least 1")
    return out


def _load_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration file {path} must hold a mapping")
    return data


def load_config(path: Optional[Union[str, Path]] = None, use_env: bool = True,
                **overrides: Any) -> AnalysisConfig:
    """Build the effective configuration

    Later layers win: defaults, then the YAML file (explicit path or the one in
    the user's home), then HOLO_* environment variables (a .env file in the
    working directory is honoured), then keyword overrides.
    """
    config = AnalysisConfig()

    config_file = Path(path) if path else DEFAULT_CONFIG_FILE
    if path and not config_file.exists():
        raise ConfigError(f"Configuration file not found: {config_file}")
    if config_file.exists():
        config = config.updated(**_load_yaml(config_file))
        logger.debug(f"Loaded configuration from {config_file}")

    if use_env:
        load_dotenv()
        env_values = {attr: os.environ[var] for var, attr in ENV_OVERRIDES.items()
                      if os.environ.get(var)}
        if env_values:
            config = config.updated(**env_values)

    return config.updated(**overrides)
