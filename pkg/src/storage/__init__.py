from .base import StorageBackend
from .local import LocalStorageBackend
from .factory import create_storage_backend


__all__ = [
    "StorageBackend",
    "LocalStorageBackend",
    "create_storage_backend",
]
