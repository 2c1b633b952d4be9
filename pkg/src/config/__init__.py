from .settings import Settings
from .storage import StorageSettings
from .simulation import SimulationSettings
