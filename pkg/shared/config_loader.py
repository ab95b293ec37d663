"""
YAML Configuration Loader

Loads flat lab configuration files with:
- Environment variable substitution (``${VAR}``)
- Project-root relative path resolution
- Validation into ``ExperimentConfig`` and ``SacConfig``

Usage:
    from shared.config_loader import load_lab_config

    lab = load_lab_config("config/lab_l8.yaml")
    lab.experiment.num_users
    lab.sac.total_steps

Keys shared by both models (``seed``, ``proto_dims``, ``knn_k``) are passed
to both. Any other key must belong to exactly one of them.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence
from pathlib import Path
import logging
import os
import re

import yaml
from pydantic import ValidationError

from agents.config import SacConfig
from .schemas.experiment import ExperimentConfig


logger = logging.getLogger(__name__)

SHARED_KEYS = frozenset({"seed", "proto_dims", "knn_k"})


class LabConfigError(ValueError):
    """Config file is missing, malformed, or fails validation."""
    pass


@dataclass(frozen=True)
class LabConfig:
    experiment: ExperimentConfig
    sac: SacConfig
    source: Optional[Path] = None

    def with_overrides(self, unset: Sequence[str] = (), **overrides: Any) -> "LabConfig":
        """Apply non-None flat overrides (CLI flags), drop the keys in ``unset``, re-validate."""
        values = {k: v for k, v in overrides.items() if v is not None}
        if not values and not unset:
            return self
        data = {**self.experiment.model_dump(), **self.sac.model_dump()}
        data.update(values)
        for key in unset:
            data.pop(key, None)
        return build_lab_config(data, self.source)


class ConfigLoader:
    """Configuration loader with YAML parsing and variable substitution."""

    def __init__(self):
        self._env_pattern = re.compile(r'\$\{([^}]+)\}')

    def load(self, config_path: str) -> Dict[str, Any]:
        """Read a flat YAML mapping from ``config_path``."""
        path = self.resolve(config_path)
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise LabConfigError(f"{path}: expected a key-value mapping, got {type(data).__name__}")
        nested = [k for k, v in data.items() if isinstance(v, dict)]
        if nested:
            raise LabConfigError(f"{path}: config is flat, nested sections found: {nested}")
        return self._substitute_env_vars(data)

    def resolve(self, config_path: str) -> Path:
        path = Path(config_path)
        if not path.is_absolute() and not path.exists():
            root = self._find_project_root()
            if root:
                path = root / config_path
        if not path.exists():
            raise LabConfigError(f"Configuration file not found: {config_path}")
        return path

    def _substitute_env_vars(self, obj: Any) -> Any:
        """
        Recursively substitute environment variables.

        Supports ${VAR} syntax; unknown variables are left as written.
        """
        if isinstance(obj, dict):
            return {k: self._substitute_env_vars(v) for k, v in obj.items()}
        elif isinstance(obj, list):
            return [self._substitute_env_vars(item) for item in obj]
        elif isinstance(obj, str):
            replaced = self._env_pattern.sub(
                lambda m: os.environ.get(m.group(1), m.group(0)),
                obj
            )
            if replaced != obj:
                # Substituted values are re-parsed so numbers stay numbers
                return yaml.safe_load(replaced)
            return obj
        return obj

    def _find_project_root(self) -> Optional[Path]:
        current = Path.cwd()
        indicators = ["pyproject.toml", "config"]
        for _ in range(10):
            if any((current / indicator).exists() for indicator in indicators):
                return current
            parent = current.parent
            if parent == current:
                break
            current = parent
        return None


def build_lab_config(data: Dict[str, Any], source: Optional[Path] = None) -> LabConfig:
    """Split a flat mapping between the experiment and SAC models."""
    experiment_keys = set(ExperimentConfig.model_fields)
    sac_keys = set(SacConfig.model_fields)
    unknown = sorted(set(data) - experiment_keys - sac_keys)
    if unknown:
        raise LabConfigError(f"Unknown config keys: {unknown}")

    experiment_data = {k: v for k, v in data.items() if k in experiment_keys}
    sac_data = {k: v for k, v in data.items() if k in sac_keys}
    for key in SHARED_KEYS:
        if key in data:
            experiment_data[key] = data[key]
            sac_data[key] = data[key]
    try:
        experiment = ExperimentConfig(**experiment_data)
        sac = SacConfig(**sac_data)
    except ValidationError as e:
        where = f"{source}: " if source else ""
        raise LabConfigError(f"{where}invalid configuration: {e}") from e
    return LabConfig(experiment=experiment, sac=sac, source=source)


def load_lab_config(config_path: Optional[str] = None) -> LabConfig:
    """Load a config file, or the defaults when no path is given."""
    if config_path is None:
        return build_lab_config({})
    loader = ConfigLoader()
    path = loader.resolve(config_path)
    data = loader.load(str(path))
    logger.debug(f"Loaded {len(data)} config keys from {path}")
    return build_lab_config(data, path)
