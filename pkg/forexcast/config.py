from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional
import logging
import os

class Settings(BaseSettings):
    # Application
    APP_NAME: str = "forexcast"
    VERSION: str = "0.3.0"
    ENVIRONMENT: str = "development"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Synthetic data
    SYNTH_START_TIMESTAMP: int = 1577836800  # 2020-01-01T00:00:00Z
    SYNTH_BAR_SECONDS: int = 3600

    # Inference
    PREDICT_CHUNK_SIZE: int = 256  # windows per vectorized forward call

    # Checkpoints
    CHECKPOINT_FORMAT_VERSION: int = 1

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="FOREXCAST_",
        case_sensitive=True,
        extra="ignore",
    )

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

        if self.ENVIRONMENT == "test" and not os.getenv("FOREXCAST_LOG_LEVEL"):
            self.LOG_LEVEL = "WARNING"

        self.LOG_LEVEL = self.LOG_LEVEL.upper()


# Create settings instance
settings = Settings()


def configure_logging(level: Optional[str] = None) -> None:
    """Install the root logging handler using LOG_LEVEL/LOG_FORMAT, or an explicit override"""
    level_name = (level or settings.LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=settings.LOG_FORMAT,
        force=True,
    )
