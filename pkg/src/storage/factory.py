"""Factory for the null-table storage backend."""

from src.config.storage import StorageSettings
from src.storage.base import StorageBackend
from src.storage.local import LocalStorageBackend


def create_storage_backend(settings: StorageSettings | None = None) -> StorageBackend:
    """
    Create the storage backend that holds cached null tables.
    
    Args:
        settings: Optional settings instance (creates new if not provided)
    
    Returns:
        Configured storage backend
        
    Example:
        # Default cache under ~/.cache/corank
        storage = create_storage_backend()
        
        # In tests with dependency injection
        test_settings = StorageSettings(NULL_CACHE_PATH=str(tmp_path))
        storage = create_storage_backend(settings=test_settings)
    """
    if settings is None:
        settings = StorageSettings()
    
    backend_type = settings.STORAGE_BACKEND.lower()
    
    if backend_type == "local":
        return LocalStorageBackend(base_path=settings.NULL_CACHE_PATH)
    else:
        raise ValueError(f"Unknown storage backend: {backend_type}")
