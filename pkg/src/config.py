import logging
import sys

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Read from SEGFUSE_* env vars, then .env (python-dotenv), then these defaults
    model_config = SettingsConfigDict(env_prefix="SEGFUSE_", env_file=".env", extra="ignore")

    LOG_LEVEL: str = "INFO"

    # --- DATASET DEFAULTS ---
    DEFAULT_CATALOG: str = "cityscapes19"
    DEFAULT_JOBS: int = 1

    # --- NUMERICS ---
    # Per-pixel probability sums must be within this of 1.0
    PROB_TOLERANCE: float = 1e-6
    # Volumes read back from float32 .pvol files lose precision; they get a looser bound
    PVOL_TOLERANCE: float = 1e-5
    # Simulator: max uniform noise added to each channel before renormalizing
    NOISE_FLOOR: float = 0.05

    # --- IO ---
    WRITE_RETRY_ATTEMPTS: int = 3


settings = Settings()


def configure_logging(level: str | None = None) -> None:
    """Route every module logger to stderr. Safe to call more than once."""
    logging.basicConfig(
        stream=sys.stderr,
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
