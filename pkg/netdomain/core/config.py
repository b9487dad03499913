"""
Configuration management.

Process settings come from environment variables (and an optional .env file);
the pipeline itself is described by one YAML file validated into PipelineConfig.
"""
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from netdomain.core.exceptions import ConfigError
from netdomain.schemas.pipeline import PipelineConfig


class Settings(BaseSettings):
    # Logging
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Worker pool default when neither config nor CLI sets it
    jobs: int = 1

    # Progress bars for long loops
    progress: bool = False

    app_name: str = "netdomain"

    model_config = SettingsConfigDict(
        env_prefix="NETDOMAIN_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    return str(path)


def load_pipeline_config(path: str | Path, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """
    Load and validate a pipeline config file.

    Args:
        path: YAML file path
        overrides: top-level keys replacing file values (CLI flags); None values are ignored

    Returns:
        Validated PipelineConfig with paths resolved against the file's directory
    """
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {config_path} must hold a mapping at top level")

    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    base = config_path.resolve().parent
    raw["manifest"] = _resolve(base, raw.get("manifest"))
    raw["output_dir"] = _resolve(base, raw.get("output_dir", "out"))

    try:
        return PipelineConfig(**raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {config_path}: {e}") from e
