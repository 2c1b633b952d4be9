from pydantic_settings import BaseSettings
from typing import Literal


class Settings(BaseSettings):
    """General application settings."""
    
    # Test defaults
    DEFAULT_ALPHA: float = 0.05
    DEFAULT_PERMUTATIONS: int = 999
    DEFAULT_METHOD: Literal["asymptotic", "permutation"] = "asymptotic"
    
    # Seeds
    DEFAULT_GRID_SEED: int = 0
    DEFAULT_DATA_SEED: int = 1
    DEFAULT_NULL_SEED: int = 2
    
    # Parallelism
    WORKERS: int = 1
    
    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    
    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore"
    }
    
    def validate_defaults(self) -> None:
        """Validate the configured defaults."""
        if not 0.0 < self.DEFAULT_ALPHA < 1.0:
            raise ValueError(f"DEFAULT_ALPHA must be in (0, 1), got {self.DEFAULT_ALPHA}")
        if self.DEFAULT_PERMUTATIONS < 100:
            raise ValueError(
                f"DEFAULT_PERMUTATIONS must be >= 100, got {self.DEFAULT_PERMUTATIONS}"
            )
        if self.WORKERS < 1:
            raise ValueError(f"WORKERS must be >= 1, got {self.WORKERS}")
