"""Application settings and configuration management."""

import json
import os
from pathlib import Path
from typing import Optional, Union
import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from src.config.models import AppConfig, DatasetRegistry, ExperimentConfig, GeneratorConfig
from src.exceptions import ConfigError

# Load environment variables
load_dotenv()

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent


def _env_flag(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Settings:
    """Application settings manager."""

    def __init__(self):
        """Initialize settings from environment variables."""
        self.config = AppConfig(
            log_level=os.getenv('CANONLAB_LOG_LEVEL', 'INFO'),
            log_file=os.getenv('CANONLAB_LOG_FILE', 'logs/canonlab.log') or None,
            output_dir=os.getenv('CANONLAB_OUTPUT_DIR', 'runs'),
            workers=int(os.getenv('CANONLAB_WORKERS', '1')),
            export_parquet=_env_flag('CANONLAB_EXPORT_PARQUET'),
        )

        self._registry: Optional[DatasetRegistry] = None

    def get_registry(self) -> DatasetRegistry:
        """
        Load and return the dataset generator registry.

        Returns:
            DatasetRegistry instance
        """
        if self._registry is None:
            registry_path = PROJECT_ROOT / 'datasets' / 'registry.yaml'
            with open(registry_path, 'r') as f:
                registry_data = yaml.safe_load(f)
            self._registry = DatasetRegistry(**registry_data)
        return self._registry

    def get_generator_config(self, kind: str) -> GeneratorConfig:
        """
        Load generator-specific configuration.

        Args:
            kind: Dataset kind from registry

        Returns:
            GeneratorConfig instance
        """
        entry = self.get_registry().get_dataset(kind)

        if not entry:
            raise ConfigError(f"Dataset kind '{kind}' not found in registry")

        config_path = PROJECT_ROOT / entry.config_path
        with open(config_path, 'r') as f:
            config_data = yaml.safe_load(f)

        return GeneratorConfig(**config_data)

    def resolve_path(self, path: Union[str, Path]) -> Path:
        """
        Resolve a user-supplied path against the working directory, then the project root.

        Args:
            path: Absolute or relative path

        Returns:
            Existing path, or the path as given when it exists nowhere
        """
        candidate = Path(path)
        if candidate.is_absolute() or candidate.exists():
            return candidate
        rooted = PROJECT_ROOT / candidate
        return rooted if rooted.exists() else candidate

    def load_experiment_config(self, path: Union[str, Path]) -> ExperimentConfig:
        """
        Load and validate an experiment configuration (JSON, or YAML by extension).

        Args:
            path: Config file path

        Returns:
            ExperimentConfig instance

        Raises:
            ConfigError: If the file is missing, unparsable or violates an invariant
        """
        config_path = self.resolve_path(path)
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {path}")

        try:
            with open(config_path, 'r') as f:
                if config_path.suffix in ('.yaml', '.yml'):
                    raw = yaml.safe_load(f)
                else:
                    raw = json.load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot parse config {config_path}: {e}") from e

        return parse_experiment_config(raw, source=str(config_path))


def parse_experiment_config(raw: dict, source: str = "<dict>") -> ExperimentConfig:
    """
    Validate a raw config mapping.

    Raises:
        ConfigError: Naming the first violated invariant
    """
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get('loc', ())) or "config"
        raise ConfigError(f"Invalid config {source}: {location}: {first['msg']}") from e


# Global settings instance
settings = Settings()
