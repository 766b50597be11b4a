from functools import lru_cache

from settings.config import Settings


@lru_cache
def get_settings() -> Settings:
    """Return application settings, read once per process."""
    return Settings()
