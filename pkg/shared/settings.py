"""
Process-level settings read from the environment.

    FGGM_LAB_OUTPUT_DIR   overrides the output directory of every subcommand
    FGGM_LAB_LOG_LEVEL    root log level used by the CLI
"""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="FGGM_LAB_", extra="ignore")

    output_dir: Optional[str] = None
    log_level: str = "INFO"


def get_settings() -> LabSettings:
    """Fresh settings snapshot (environment is re-read on every call)."""
    return LabSettings()
