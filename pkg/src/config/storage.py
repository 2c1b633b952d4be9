from pydantic_settings import BaseSettings
from typing import Literal


class StorageSettings(BaseSettings):
    """Storage configuration for cached null tables."""
    
    # Backend selection
    STORAGE_BACKEND: Literal["local"] = "local"
    
    # Local backend path (~ is expanded)
    NULL_CACHE_PATH: str = "~/.cache/corank/null_tables"
    
    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore"
    }
