import os
import tempfile
from pathlib import Path

from .base import StorageBackend


class LocalStorageBackend(StorageBackend):
    """Filesystem storage rooted at a cache directory."""
    
    def __init__(self, base_path: str | Path):
        self.base_path = Path(base_path).expanduser()
        self.base_path.mkdir(parents=True, exist_ok=True)
    
    def _get_full_path(self, key: str) -> Path:
        """Convert storage key to full filesystem path."""
        full_path = self.base_path / key
        # Keys may not escape base_path
        try:
            full_path.resolve().relative_to(self.base_path.resolve())
        except ValueError:
            raise ValueError(f"Key escapes storage root: {key}")
        return full_path
    
    def upload(self, key: str, data: bytes) -> str:
        """Write data atomically (temporary file, then rename)."""
        full_path = self._get_full_path(key)
        full_path.parent.mkdir(parents=True, exist_ok=True)
        
        fd, tmp_name = tempfile.mkstemp(dir=full_path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(data)
            os.replace(tmp_name, full_path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        
        return key
    
    def download(self, key: str) -> bytes:
        """Read data from the filesystem."""
        full_path = self._get_full_path(key)
        
        if not full_path.exists():
            raise FileNotFoundError(f"Key not found: {key}")
        
        with open(full_path, 'rb') as f:
            return f.read()
    
    def exists(self, key: str) -> bool:
        """Check if key exists on the filesystem."""
        return self._get_full_path(key).exists()
    
    def delete(self, key: str) -> None:
        """Delete key from the filesystem."""
        full_path = self._get_full_path(key)
        if full_path.exists():
            full_path.unlink()
