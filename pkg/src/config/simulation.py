from pathlib import Path
from typing import List

from pydantic_settings import BaseSettings

BUNDLED_CASES_FILE = str(Path(__file__).resolve().parent.parent / "simulation_cases.yaml")


class SimulationSettings(BaseSettings):
    """Defaults for Monte Carlo power studies."""
    
    SIM_REPLICATIONS: int = 1000
    SIM_TAUS: List[float] = [0.0, 0.2, 0.4, 0.6, 0.8]
    SIM_CASES_FILE: str = BUNDLED_CASES_FILE
    
    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore"
    }
    
    def validate_study(self) -> None:
        """Validate replication count and tau grid."""
        if self.SIM_REPLICATIONS < 1:
            raise ValueError(f"SIM_REPLICATIONS must be >= 1, got {self.SIM_REPLICATIONS}")
        if any(tau < 0 for tau in self.SIM_TAUS):
            raise ValueError(f"SIM_TAUS must be nonnegative, got {self.SIM_TAUS}")
