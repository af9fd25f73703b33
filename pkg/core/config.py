"""
Process Settings

Environment-level defaults, read once per process. Everything physical
lives in the YAML run config instead (cli/config.py).

    JJRES_THREADS     default number of solver agents in the worker pool
    JJRES_LOG_LEVEL   logging level name (INFO)
    JJRES_OUTPUT_DIR  default output directory for CLI runs
    JJRES_HOST        bind address for `serve`
    JJRES_PORT        port for `serve`

A .env file in the working directory is read as well.
"""

import os
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="JJRES_", env_file=".env", extra="ignore")

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    log_level: str = "INFO"
    output_dir: Path = Path("results")
    host: str = "0.0.0.0"
    port: int = Field(8000, ge=1, le=65535)


@lru_cache
def get_settings() -> Settings:
    return Settings()
